//! Discrete fractional calculus on uniform grids.
//!
//! The fractional integral uses product integration: the kernel
//! `(t-s)^{α-1}` is integrated exactly over each cell against the
//! left-endpoint value of `f`, giving a first-order scheme that is exact for
//! constants. Caputo and Riemann-Liouville derivatives are built on top of
//! it. Grünwald-Letnikov is kept as an independent oracle.

use crate::error::{Error, Result};
use crate::specfun::gamma;

/// Uniform grid `t_m = m a / M`, `m = 0..=M`, on `J = [0, a]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
        }
        if steps < 2 {
            return Err(Error::GridTooCoarse { steps, min: 2 });
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, m: usize) -> f64 {
        if m == self.steps {
            self.horizon
        } else {
            m as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |m| self.node(m))
    }

    /// Index of the node closest to `t`, and whether `t` had to move.
    pub fn snap(&self, t: f64) -> (usize, bool) {
        let idx = (t / self.step()).round().clamp(0.0, self.steps as f64) as usize;
        let moved = (self.node(idx) - t).abs() > 1e-12 * self.horizon;
        (idx, moved)
    }
}

/// A scalar function sampled on every node of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl SampledFn {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        Self { grid, values }
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        Self { grid: self.grid, values }
    }
}

fn check_order(alpha: f64, allow_one: bool) -> Result<()> {
    let ok = alpha > 0.0 && (alpha < 1.0 || (allow_one && alpha == 1.0));
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!("fractional order out of range: {alpha}")))
    }
}

fn check_fine(f: &SampledFn) -> Result<()> {
    if f.grid.steps() < 4 {
        Err(Error::GridTooCoarse { steps: f.grid.steps(), min: 4 })
    } else {
        Ok(())
    }
}

/// Cell weights `(k+1)^α - k^α`, `k = 0..steps`.
pub(crate) fn power_cell_weights(alpha: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|k| {
            let k = k as f64;
            (k + 1.0).powf(alpha) - k.powf(alpha)
        })
        .collect()
}

/// `I^α f(t) = Γ(α)⁻¹ ∫₀^t (t-s)^{α-1} f(s) ds` on the grid of `f`.
pub fn frac_integral(f: &SampledFn, alpha: f64) -> Result<SampledFn> {
    check_order(alpha, true)?;
    let m_steps = f.grid.steps();
    let b = power_cell_weights(alpha, m_steps);
    let scale = f.grid.step().powf(alpha) / gamma(alpha + 1.0)?;
    let mut out = vec![0.0; m_steps + 1];
    for (m, slot) in out.iter_mut().enumerate().skip(1) {
        let acc: f64 = (0..m).map(|j| f.values[j] * b[m - 1 - j]).sum();
        *slot = scale * acc;
    }
    Ok(f.with_values(out))
}

fn central_difference(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    d
}

/// Caputo derivative `I^{1-α} f'`, with `f'` from second-order differences.
pub fn caputo_deriv(f: &SampledFn, alpha: f64) -> Result<SampledFn> {
    check_order(alpha, false)?;
    check_fine(f)?;
    let df = f.with_values(central_difference(&f.values, f.grid.step()));
    frac_integral(&df, 1.0 - alpha)
}

/// Riemann-Liouville derivative `d/dt I^{1-α} f`.
///
/// At `t = 0` the value is `NaN` whenever `f(0) != 0`: the derivative blows
/// up like `t^{-α}` there.
pub fn rl_deriv(f: &SampledFn, alpha: f64) -> Result<SampledFn> {
    check_order(alpha, false)?;
    check_fine(f)?;
    let inner = frac_integral(f, 1.0 - alpha)?;
    let mut d = central_difference(&inner.values, f.grid.step());
    if f.values[0] != 0.0 {
        d[0] = f64::NAN;
    }
    Ok(f.with_values(d))
}

/// Grünwald-Letnikov derivative `h^{-α} Σ_j (-1)^j C(α, j) f(t - j h)`,
/// with `f = 0` before the origin.
pub fn gl_deriv(f: &SampledFn, alpha: f64) -> Result<SampledFn> {
    check_order(alpha, true)?;
    let n = f.values.len();
    let mut g = vec![1.0; n];
    for j in 1..n {
        g[j] = g[j - 1] * (1.0 - (alpha + 1.0) / j as f64);
    }
    let scale = f.grid.step().powf(-alpha);
    let out = (0..n)
        .map(|m| scale * (0..=m).map(|j| g[j] * f.values[m - j]).sum::<f64>())
        .collect();
    Ok(f.with_values(out))
}
