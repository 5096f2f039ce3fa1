//! One-dimensional quadrature helpers shared by the special functions.
//!
//! Two tools live here: fixed Gauss-Legendre panels (nodes from `gauss-quad`)
//! and a globally adaptive Gauss-Kronrod 7/15 integrator in the style of
//! QUADPACK's QAG. The adaptive routine is used for the integral
//! representations of the Mainardi density and the Mittag-Leffler function,
//! whose integrands can be sharply peaked.

#![allow(clippy::excessive_precision)]
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// 7-point Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let result = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (result, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Tolerances for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveTol {
    pub abs: f64,
    pub rel: f64,
    pub max_segments: usize,
}

impl Default for AdaptiveTol {
    fn default() -> Self {
        Self {
            abs: 1e-14,
            rel: 1e-13,
            max_segments: 4000,
        }
    }
}

/// Integrates `f` over the union of consecutive intervals given by `breaks`
/// (at least two strictly increasing finite points).
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: AdaptiveTol) -> Result<f64> {
    if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("integration breakpoints must be strictly increasing"));
    }
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        let (value, err) = gk15(&f, w[0], w[1]);
        total += value;
        total_err += err;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            err,
        });
    }
    while total_err > tol.abs.max(tol.rel * total.abs()) {
        if heap.len() >= tol.max_segments {
            return Err(Error::Evaluation(format!(
                "adaptive quadrature exhausted {} segments (estimate {total:e}, error {total_err:e})",
                tol.max_segments
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval cannot be split further in floating point
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Segment { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, err: e2 });
    }
    if !total.is_finite() {
        return Err(Error::Evaluation("adaptive quadrature produced a non-finite value".into()));
    }
    Ok(total)
}

/// Reference Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(points: usize) -> Result<Vec<(f64, f64)>> {
    let rule = GaussLegendre::new(points)
        .map_err(|e| Error::domain(format!("Gauss-Legendre rule of degree {points}: {e}")))?;
    let mut pairs = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(pairs)
}
