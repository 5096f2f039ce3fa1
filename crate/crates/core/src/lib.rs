//! Numerics for Sobolev-type fractional evolution equations with nonlocal
//! initial conditions and multi-integral controls.

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fracops;
pub mod mild_solver;
pub mod optctrl;
pub mod quad;
pub mod run;
pub mod solution_ops;
pub mod spectral;
pub mod specfun;

pub use error::{Error, Result};
