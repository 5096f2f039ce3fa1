//! Sine eigenbasis on `[0, π]` and the diagonal operators built on it.
//!
//! Fields are stored as coefficients with respect to
//! `w_n(x) = √(2/π) sin(nx)`, `n = 1..=N`. With `L = I - ∂²`, `E = -∂²` and
//! `M⁻¹ = ∂²` (homogeneous Dirichlet conditions) every operator in play is
//! diagonal, so applying one is a coefficient-wise multiplication.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Coefficients `(u_n)_{n=1..N}` of a function on `[0, π]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SpectralField {
    pub coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(modes: usize) -> Self {
        Self { coeffs: vec![0.0; modes] }
    }

    /// The basis function `w_n` itself (1-based `n`).
    pub fn basis(modes: usize, n: usize) -> Self {
        let mut f = Self::zeros(modes);
        f.coeffs[n - 1] = 1.0;
        f
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    /// `L²(0, π)` norm, by Parseval.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `‖u‖_q = ‖(-A)^q u‖`.
    pub fn norm_q(&self, q: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let s = generator_decay(i + 1).powf(q) * c;
                s * s
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| s * c).collect())
    }

    /// `self += s * other` on the shared modes.
    pub fn add_scaled(&mut self, s: f64, other: &SpectralField) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        Self::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect())
    }

    /// Truncates or zero-pads to `modes` coefficients.
    pub fn resized(&self, modes: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(modes, 0.0);
        Self::new(c)
    }
}

/// `λ_n = n²/(1+n²)`, the decay rate of mode `n` under `Q(t)`.
pub fn generator_decay(n: usize) -> f64 {
    let n2 = (n * n) as f64;
    n2 / (1.0 + n2)
}

/// Diagonal operators of the sine basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorKind {
    L,
    E,
    M,
    LInv,
    MInv,
    /// The semigroup `Q(t)` generated by `A = E L⁻¹`, `t ≥ 0`.
    Q(f64),
    /// Fractional power `(-A)^q`, `0 < q < 1`.
    APow(f64),
    A,
}

impl OperatorKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            OperatorKind::Q(t) if !(t >= 0.0 && t.is_finite()) => {
                Err(Error::domain(format!("Q(t) needs t >= 0, got {t}")))
            }
            OperatorKind::APow(q) if !(q > 0.0 && q < 1.0) => {
                Err(Error::domain(format!("A_pow(q) needs 0 < q < 1, got {q}")))
            }
            _ => Ok(()),
        }
    }

    /// Multiplier applied to coefficient `n`.
    pub fn symbol(&self, n: usize) -> f64 {
        let n2 = (n * n) as f64;
        match *self {
            OperatorKind::L => 1.0 + n2,
            OperatorKind::E => -n2,
            OperatorKind::M => -1.0 / n2,
            OperatorKind::LInv => 1.0 / (1.0 + n2),
            OperatorKind::MInv => -n2,
            OperatorKind::Q(t) => (-generator_decay(n) * t).exp(),
            OperatorKind::APow(q) => generator_decay(n).powf(q),
            OperatorKind::A => -generator_decay(n),
        }
    }

    /// Operator norm over the first `modes` modes.
    pub fn norm(&self, modes: usize) -> f64 {
        (1..=modes).map(|n| self.symbol(n).abs()).fold(0.0, f64::max)
    }
}

pub fn apply_operator(kind: OperatorKind, u: &SpectralField) -> Result<SpectralField> {
    kind.validate()?;
    Ok(SpectralField::new(
        u.coeffs.iter().enumerate().map(|(i, c)| kind.symbol(i + 1) * c).collect(),
    ))
}

/// Interior collocation points `x_j = jπ/(N_x+1)`, `j = 1..=N_x`, with the
/// basis and its derivative tabulated there. On this grid the discrete sine
/// transform is exactly orthogonal for `n ≤ N_x`.
#[derive(Debug, Clone)]
pub struct Collocation {
    modes: usize,
    points: Vec<f64>,
    sin_table: Vec<Vec<f64>>,
    cos_table: Vec<Vec<f64>>,
    r_max: usize,
}

/// Default ratio of collocation points to retained modes.
pub const COLLOCATION_FACTOR: usize = 8;
/// Highest spatial derivative available to nonlinearities by default.
pub const DEFAULT_R_MAX: usize = 2;

impl Collocation {
    pub fn new(modes: usize, points: usize, r_max: usize) -> Result<Self> {
        if modes < 1 {
            return Err(Error::domain("mode count must be at least 1"));
        }
        if points < 4 * modes {
            return Err(Error::domain(format!(
                "collocation needs at least 4N = {} points, got {points}",
                4 * modes
            )));
        }
        let norm = (2.0 / PI).sqrt();
        let xs: Vec<f64> = (1..=points).map(|j| j as f64 * PI / (points + 1) as f64).collect();
        let sin_table = (1..=modes)
            .map(|n| xs.iter().map(|&x| norm * (n as f64 * x).sin()).collect())
            .collect();
        let cos_table = (1..=modes)
            .map(|n| xs.iter().map(|&x| norm * (n as f64 * x).cos()).collect())
            .collect();
        Ok(Self {
            modes,
            points: xs,
            sin_table,
            cos_table,
            r_max,
        })
    }

    pub fn for_modes(modes: usize) -> Result<Self> {
        Self::new(modes, COLLOCATION_FACTOR * modes, DEFAULT_R_MAX)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn r_max(&self) -> usize {
        self.r_max
    }

    fn quad_weight(&self) -> f64 {
        PI / (self.points.len() + 1) as f64
    }

    /// Point values of `u` on the grid.
    pub fn evaluate(&self, u: &SpectralField) -> Vec<f64> {
        self.derivative_values(0, u)
    }

    fn derivative_values(&self, order: usize, u: &SpectralField) -> Vec<f64> {
        let mut out = vec![0.0; self.points.len()];
        // d^i/dx^i sin(nx) = n^i sin(nx + iπ/2)
        let (table, sign) = match order % 4 {
            0 => (&self.sin_table, 1.0),
            1 => (&self.cos_table, 1.0),
            2 => (&self.sin_table, -1.0),
            _ => (&self.cos_table, -1.0),
        };
        for (i, &c) in u.coeffs.iter().enumerate().take(self.modes) {
            if c == 0.0 {
                continue;
            }
            let scale = sign * c * ((i + 1) as f64).powi(order as i32);
            for (o, &b) in out.iter_mut().zip(&table[i]) {
                *o += scale * b;
            }
        }
        out
    }

    /// First `N` sine coefficients of grid values (composite trapezoid,
    /// endpoint values vanish).
    pub fn project_values(&self, values: &[f64]) -> SpectralField {
        let w = self.quad_weight();
        SpectralField::new(
            self.sin_table
                .iter()
                .map(|row| w * row.iter().zip(values).map(|(b, v)| b * v).sum::<f64>())
                .collect(),
        )
    }

    pub fn project(&self, f: impl Fn(f64) -> f64) -> SpectralField {
        let values: Vec<f64> = self.points.iter().map(|&x| f(x)).collect();
        self.project_values(&values)
    }

    /// `∂ₓ^i u` on the collocation grid, by exact spectral differentiation.
    pub fn apply_bi(&self, i: usize, u: &SpectralField) -> Result<Vec<f64>> {
        if i == 0 || i > self.r_max {
            return Err(Error::domain(format!(
                "derivative order {i} outside 1..={}",
                self.r_max
            )));
        }
        if u.modes() > self.modes {
            return Err(Error::domain(format!(
                "field has {} modes, collocation supports {}",
                u.modes(),
                self.modes
            )));
        }
        let values = self.derivative_values(i, u);
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation(format!("derivative of order {i} is not finite")));
        }
        Ok(values)
    }
}

/// Projects `f` onto the first `modes` sine modes using `8·modes` points.
pub fn project(f: impl Fn(f64) -> f64, modes: usize) -> Result<SpectralField> {
    Ok(Collocation::for_modes(modes)?.project(f))
}

/// Measured operator constants of the truncated instance.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BoundConstants {
    /// `‖L⁻¹‖`
    pub c1: f64,
    /// `‖M⁻¹‖` over the retained modes (grows like `N²`)
    pub c2: f64,
    /// `sup_t ‖Q(t)‖`
    pub m0: f64,
    /// Smallest `M_q` with `‖(-A)^q Q(t)‖ ≤ M_q t^{-q}` on the samples
    pub mq: f64,
}

pub fn measure_bounds(modes: usize, q: f64, t_samples: &[f64]) -> Result<BoundConstants> {
    if modes < 4 {
        return Err(Error::domain(format!("measure_bounds needs N >= 4, got {modes}")));
    }
    if t_samples.is_empty() || t_samples.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::domain("t_samples must be nonempty and nonnegative"));
    }
    OperatorKind::APow(q).validate()?;
    let c1 = OperatorKind::LInv.norm(modes);
    let c2 = OperatorKind::MInv.norm(modes);
    let mut m0: f64 = 0.0;
    for &t in t_samples {
        for n in 1..=modes {
            let s = OperatorKind::Q(t).symbol(n);
            if s > 1.0 {
                return Err(Error::PropertyFailure {
                    clause: "||Q(t)|| <= 1".into(),
                    t,
                    n,
                    detail: format!("symbol {s}"),
                });
            }
            m0 = m0.max(s);
        }
    }
    // per-mode stationary point t = q/λ_n of (λt)^q e^{-λt}, when inside the sampled range
    let t_lo = t_samples.iter().copied().fold(f64::INFINITY, f64::min);
    let t_hi = t_samples.iter().copied().fold(0.0, f64::max);
    let mut probe: Vec<f64> = t_samples.iter().copied().filter(|&t| t > 0.0).collect();
    probe.extend((1..=modes).map(|n| q / generator_decay(n)).filter(|&t| t >= t_lo && t <= t_hi));
    let mut mq: f64 = 0.0;
    for t in probe {
        let norm = (1..=modes)
            .map(|n| OperatorKind::APow(q).symbol(n) * OperatorKind::Q(t).symbol(n))
            .fold(0.0, f64::max);
        mq = mq.max(norm * t.powf(q));
    }
    Ok(BoundConstants { c1, c2, m0, mq })
}
