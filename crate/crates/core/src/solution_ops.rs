//! The subordinated solution operators `S_α(t)` and `T_α(t)`.
//!
//! Both are diagonal in the sine basis. Mode `n` of `S_α(t)` is
//! `(1+n²)⁻¹ ∫ ζ_α(θ) e^{-λ_n t^α θ} dθ` and mode `n` of `T_α(t)` carries an
//! extra factor `αθ`; the θ-integral is a [`QuadratureRule`]. At `α = 1` the
//! density degenerates to a point mass at `θ = 1` and the multipliers reduce
//! to `e^{-λ_n t}/(1+n²)`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fracops::TimeGrid;
use crate::spectral::{generator_decay, measure_bounds, BoundConstants, OperatorKind, SpectralField};
use crate::specfun::{gamma, theta_quadrature, QuadratureRule};

/// Default θ-quadrature budget.
pub const DEFAULT_QUAD_NODES: usize = 200;

#[derive(Debug, Clone)]
pub struct SolutionOperatorCache {
    alpha: f64,
    modes: usize,
    /// `None` on the `α = 1` path.
    rule: Option<QuadratureRule>,
    grid: Option<TimeGrid>,
    /// `s_table[m][n-1]` = S multiplier at grid node `m`.
    s_table: Vec<Vec<f64>>,
    t_table: Vec<Vec<f64>>,
}

impl SolutionOperatorCache {
    pub fn new(alpha: f64, modes: usize, quad_nodes: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::domain(format!("alpha out of (0,1]: {alpha}")));
        }
        if modes < 1 {
            return Err(Error::domain("mode count must be at least 1"));
        }
        let rule = if alpha == 1.0 { None } else { Some(theta_quadrature(alpha, quad_nodes)?) };
        Ok(Self {
            alpha,
            modes,
            rule,
            grid: None,
            s_table: Vec::new(),
            t_table: Vec::new(),
        })
    }

    /// Same operators with multipliers tabulated on every node of `grid`.
    pub fn with_grid(mut self, grid: TimeGrid) -> Result<Self> {
        let mut s_table = Vec::with_capacity(grid.len());
        let mut t_table = Vec::with_capacity(grid.len());
        for t in grid.nodes() {
            s_table.push((1..=self.modes).map(|n| self.s_multiplier(t, n)).collect::<Result<Vec<_>>>()?);
            t_table.push((1..=self.modes).map(|n| self.t_multiplier(t, n)).collect::<Result<Vec<_>>>()?);
        }
        self.grid = Some(grid);
        self.s_table = s_table;
        self.t_table = t_table;
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn grid(&self) -> Option<&TimeGrid> {
        self.grid.as_ref()
    }

    pub fn rule(&self) -> Option<&QuadratureRule> {
        self.rule.as_ref()
    }

    fn check(&self, t: f64, n: usize) -> Result<()> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::domain(format!("t must be finite and >= 0, got {t}")));
        }
        if n < 1 || n > self.modes {
            return Err(Error::domain(format!("mode {n} outside 1..={}", self.modes)));
        }
        Ok(())
    }

    /// `∫ θ^power ζ_α(θ) e^{-x θ} dθ` for `power ∈ {0, 1}`.
    fn laplace(&self, x: f64, power: i32) -> f64 {
        match &self.rule {
            None => (-x).exp(),
            Some(rule) => rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .zip(&rule.density)
                .map(|((&th, &w), &d)| w * d * th.powi(power) * (-x * th).exp())
                .sum(),
        }
    }

    pub fn s_multiplier(&self, t: f64, n: usize) -> Result<f64> {
        self.check(t, n)?;
        let x = generator_decay(n) * t.powf(self.alpha);
        Ok(self.laplace(x, 0) / (1.0 + (n * n) as f64))
    }

    pub fn t_multiplier(&self, t: f64, n: usize) -> Result<f64> {
        self.check(t, n)?;
        let x = generator_decay(n) * t.powf(self.alpha);
        Ok(self.alpha * self.laplace(x, 1) / (1.0 + (n * n) as f64))
    }

    /// Tabulated S multiplier at grid node `m`.
    ///
    /// Panics if the cache has no grid or `m`/`n` is out of range.
    pub fn s_node(&self, m: usize, n: usize) -> f64 {
        self.s_table[m][n - 1]
    }

    pub fn t_node(&self, m: usize, n: usize) -> f64 {
        self.t_table[m][n - 1]
    }

    fn apply(&self, u: &SpectralField, mult: impl Fn(usize) -> Result<f64>) -> Result<SpectralField> {
        if u.modes() > self.modes {
            return Err(Error::domain(format!(
                "field has {} modes, operators built for {}",
                u.modes(),
                self.modes
            )));
        }
        let coeffs = u
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| Ok(mult(i + 1)? * c))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralField::new(coeffs))
    }

    pub fn apply_s(&self, t: f64, u: &SpectralField) -> Result<SpectralField> {
        self.apply(u, |n| self.s_multiplier(t, n))
    }

    pub fn apply_t(&self, t: f64, u: &SpectralField) -> Result<SpectralField> {
        self.apply(u, |n| self.t_multiplier(t, n))
    }

    /// `‖(-A)^q T_α(t)‖` over the retained modes.
    pub fn apow_t_norm(&self, q: f64, t: f64) -> Result<f64> {
        (1..=self.modes).try_fold(0.0f64, |acc, n| {
            Ok(acc.max(OperatorKind::APow(q).symbol(n) * self.t_multiplier(t, n)?))
        })
    }
}

/// Outcome of one checked clause; `margin` is the smallest slack
/// `bound - value` seen (relative to the bound).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ClauseResult {
    pub clause: String,
    pub passed: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LemmaReport {
    pub constants: BoundConstants,
    pub clauses: Vec<ClauseResult>,
    /// `sup_t ‖(-A)^q T_α(t)‖ t^{qα}` over the positive samples.
    pub envelope_constant: f64,
    /// The theoretical envelope constant `α C₁ M_q Γ(2-q) / Γ(1+α(1-q))`.
    pub envelope_bound: f64,
}

/// Relative slack granted to bound checks, to absorb rounding.
const BOUND_SLACK: f64 = 1e-9;
/// Time offset for the continuity probe.
const CONTINUITY_GAP: f64 = 1e-6;
const CONTINUITY_TOL: f64 = 1e-4;

fn violation(clause: &str, t: f64, n: usize, detail: String) -> Error {
    Error::PropertyFailure {
        clause: clause.into(),
        t,
        n,
        detail,
    }
}

/// Empirical check of boundedness, strong continuity, monotone decay and
/// the `t^{-qα}` envelope of `(-A)^q T_α(t)`, using the measured operator
/// constants of the truncated instance.
pub fn verify_lemma22(
    cache: &SolutionOperatorCache,
    q: f64,
    t_samples: &[f64],
    trials: usize,
    seed: u64,
) -> Result<LemmaReport> {
    if t_samples.is_empty() {
        return Err(Error::domain("t_samples must be nonempty"));
    }
    let modes = cache.modes();
    // S_α(t) and T_α(t) use Q at every time t^α θ, so the semigroup
    // constants are measured over a wide range rather than the samples.
    let mut probe: Vec<f64> = (0..=140).map(|i| 10f64.powf(-4.0 + i as f64 / 20.0)).collect();
    probe.push(0.0);
    let consts = measure_bounds(modes.max(4), q, &probe)?;
    let alpha = cache.alpha();
    let s_bound = consts.c1 * consts.m0;
    let t_bound = s_bound / gamma(alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clauses = Vec::new();

    // boundedness on random fields
    let (mut s_margin, mut t_margin) = (f64::INFINITY, f64::INFINITY);
    for trial in 0..trials {
        let u = SpectralField::new((0..modes).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let norm = u.norm();
        if norm == 0.0 {
            continue;
        }
        let t = t_samples[trial % t_samples.len()];
        let s = cache.apply_s(t, &u)?.norm() / norm;
        let tt = cache.apply_t(t, &u)?.norm() / norm;
        if s > s_bound * (1.0 + BOUND_SLACK) {
            return Err(violation("boundedness of S", t, 0, format!("ratio {s} > {s_bound}")));
        }
        if tt > t_bound * (1.0 + BOUND_SLACK) {
            return Err(violation("boundedness of T", t, 0, format!("ratio {tt} > {t_bound}")));
        }
        s_margin = s_margin.min((s_bound - s) / s_bound);
        t_margin = t_margin.min((t_bound - tt) / t_bound);
    }
    clauses.push(ClauseResult { clause: "boundedness of S".into(), passed: true, margin: s_margin });
    clauses.push(ClauseResult { clause: "boundedness of T".into(), passed: true, margin: t_margin });

    // strong continuity and monotone decay, mode by mode
    let mut cont_margin = f64::INFINITY;
    let mut mono_margin = f64::INFINITY;
    let mut sorted = t_samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    for n in 1..=modes {
        let mut prev: Option<(f64, f64)> = None;
        for &t in &sorted {
            let (s0, t0) = (cache.s_multiplier(t, n)?, cache.t_multiplier(t, n)?);
            let (s1, t1) = (
                cache.s_multiplier(t + CONTINUITY_GAP, n)?,
                cache.t_multiplier(t + CONTINUITY_GAP, n)?,
            );
            let jump = (s1 - s0).abs().max((t1 - t0).abs());
            if jump > CONTINUITY_TOL {
                return Err(violation("strong continuity", t, n, format!("jump {jump}")));
            }
            cont_margin = cont_margin.min(CONTINUITY_TOL - jump);
            if let Some((sp, tp)) = prev {
                let rise = (s0 - sp).max(t0 - tp);
                if rise > 1e-14 {
                    return Err(violation("monotone decay", t, n, format!("increase {rise}")));
                }
                mono_margin = mono_margin.min(-rise);
            }
            prev = Some((s0, t0));
        }
    }
    clauses.push(ClauseResult { clause: "strong continuity".into(), passed: true, margin: cont_margin });
    clauses.push(ClauseResult { clause: "monotone decay".into(), passed: true, margin: mono_margin });

    // fractional-power envelope
    let envelope_bound = alpha * consts.c1 * consts.mq * gamma(2.0 - q)? / gamma(1.0 + alpha * (1.0 - q))?;
    let mut envelope_constant: f64 = 0.0;
    let mut env_margin = f64::INFINITY;
    for &t in sorted.iter().filter(|&&t| t > 0.0) {
        let scaled = cache.apow_t_norm(q, t)? * t.powf(q * alpha);
        if !scaled.is_finite() {
            return Err(violation("fractional-power envelope", t, 0, "not finite".into()));
        }
        if scaled > envelope_bound * (1.0 + BOUND_SLACK) {
            return Err(violation(
                "fractional-power envelope",
                t,
                0,
                format!("{scaled} > {envelope_bound}"),
            ));
        }
        envelope_constant = envelope_constant.max(scaled);
        env_margin = env_margin.min((envelope_bound - scaled) / envelope_bound);
    }
    clauses.push(ClauseResult {
        clause: "fractional-power envelope".into(),
        passed: true,
        margin: env_margin,
    });

    Ok(LemmaReport {
        constants: consts,
        clauses,
        envelope_constant,
        envelope_bound,
    })
}
