//! Mild solutions of the nonlocal Sobolev-type problem by Picard iteration.
//!
//! On the uniform grid `t_m = m h`, mode `n` of the fixed-point map reads
//!
//! ```text
//! (Pu)_n(t_m) = σ_n(t_m) [v0 + β(t_m)(u0 + h(u))]_n + Σ_{j<m} W_n(m-j) g_{j,n}
//! ```
//!
//! where `σ_n` is the symbol of `S_α(t) L M⁻¹`, `β(t) = t^{1-α}/Γ(2-α)` is the
//! exact Abel integral of a constant, `g_j = f(t_j, W(t_j)) + ∫₀^{t_j} Σ B u_j`
//! and `W_n(k) = (S_n((k-1)h) - S_n(kh))/λ_n` integrates
//! `τ^{α-1} T_n(τ)` exactly over one cell.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fracops::TimeGrid;
use crate::optctrl::ControlBundle;
use crate::solution_ops::{SolutionOperatorCache, DEFAULT_QUAD_NODES};
use crate::spectral::{generator_decay, Collocation, OperatorKind, SpectralField};
use crate::specfun::{gamma, FracOrder};

/// One term `c · u(t_η)` of the nonlocal sum `h(u)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NonlocalTerm {
    pub c: f64,
    pub t: f64,
}

/// Pointwise nonlinearity `f(t, x, W)` with `W = (∂ₓu, …, ∂ₓ^r u)`.
pub type PointwiseFn = dyn Fn(f64, f64, &[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct CustomNonlinearity {
    pub func: Arc<PointwiseFn>,
    /// Number of derivatives `r` passed in `W`.
    pub orders: usize,
    /// Declared growth constant `a_f`.
    pub gain: f64,
    /// Declared Lipschitz budget, spot-checked by `hypothesis_check`.
    pub lipschitz: f64,
}

impl fmt::Debug for CustomNonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomNonlinearity")
            .field("orders", &self.orders)
            .field("gain", &self.gain)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Nonlinearity {
    Zero,
    /// `gain · sin(∂ₓ^order u)`
    SinDerivative { gain: f64, order: usize },
    Custom(CustomNonlinearity),
}

impl Nonlinearity {
    /// Number of `B_i` the nonlinearity reads.
    pub fn orders(&self) -> usize {
        match self {
            Nonlinearity::Zero => 0,
            Nonlinearity::SinDerivative { order, .. } => *order,
            Nonlinearity::Custom(c) => c.orders,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Nonlinearity::Zero)
    }

    pub fn label(&self) -> String {
        match self {
            Nonlinearity::Zero => "zero".into(),
            Nonlinearity::SinDerivative { gain, order } => format!("{gain}*sin(d^{order}u/dx^{order})"),
            Nonlinearity::Custom(_) => "custom".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub order: FracOrder,
    pub horizon: f64,
    pub modes: usize,
    pub steps: usize,
    pub u0: SpectralField,
    pub v0: SpectralField,
    pub nonlocal: Vec<NonlocalTerm>,
    pub nonlinearity: Nonlinearity,
    /// Number of controls `k`; zero for the uncontrolled problem.
    pub controls: usize,
    /// Sine modes `N_c` carried by each control.
    pub control_modes: usize,
    pub quad_nodes: usize,
}

impl ProblemSpec {
    /// Uncontrolled instance with zero data and no nonlocal terms.
    pub fn new(order: FracOrder, horizon: f64, modes: usize, steps: usize) -> Self {
        Self {
            order,
            horizon,
            modes,
            steps,
            u0: SpectralField::zeros(modes),
            v0: SpectralField::zeros(modes),
            nonlocal: Vec::new(),
            nonlinearity: Nonlinearity::Zero,
            controls: 0,
            control_modes: 4.min(modes),
            quad_nodes: DEFAULT_QUAD_NODES,
        }
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.steps)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if self.modes < 1 {
            return Err(Error::domain("mode count must be at least 1"));
        }
        for (name, f) in [("u0", &self.u0), ("v0", &self.v0)] {
            if f.modes() > self.modes || !f.is_finite() {
                return Err(Error::domain(format!("{name} must be finite with at most {} modes", self.modes)));
            }
        }
        let mut last = 0.0;
        for term in &self.nonlocal {
            if !(term.c > 0.0 && term.c.is_finite()) {
                return Err(Error::domain(format!("nonlocal weight must be positive, got {}", term.c)));
            }
            if !(term.t > last && term.t < self.horizon) {
                return Err(Error::domain(format!(
                    "nonlocal times must increase strictly inside (0, {}), got {}",
                    self.horizon, term.t
                )));
            }
            last = term.t;
        }
        match &self.nonlinearity {
            Nonlinearity::SinDerivative { gain, order } => {
                if !gain.is_finite() || *order == 0 {
                    return Err(Error::domain("sin nonlinearity needs a finite gain and order >= 1"));
                }
            }
            Nonlinearity::Custom(c) if c.orders == 0 => {
                return Err(Error::domain("custom nonlinearity needs at least one derivative order"));
            }
            _ => {}
        }
        if self.control_modes < 1 || self.control_modes > self.modes {
            return Err(Error::domain(format!("control modes must lie in 1..={}", self.modes)));
        }
        self.order.check_solver()?;
        if self.controls > 0 {
            self.order.check_controls()?;
        }
        Ok(())
    }
}

/// One spectral field per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub fields: Vec<SpectralField>,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, fields: Vec<SpectralField>) -> Result<Self> {
        if fields.len() != grid.len() {
            return Err(Error::domain(format!("expected {} fields, got {}", grid.len(), fields.len())));
        }
        Ok(Self { grid, fields })
    }

    pub fn zeros(grid: TimeGrid, modes: usize) -> Self {
        Self {
            grid,
            fields: vec![SpectralField::zeros(modes); grid.len()],
        }
    }

    pub fn modes(&self) -> usize {
        self.fields.first().map_or(0, SpectralField::modes)
    }

    pub fn is_finite(&self) -> bool {
        self.fields.iter().all(SpectralField::is_finite)
    }

    /// `sup_m ‖u(t_m) - v(t_m)‖_q`.
    pub fn sup_diff_q(&self, other: &Trajectory, q: f64) -> f64 {
        self.fields
            .iter()
            .zip(&other.fields)
            .map(|(a, b)| a.sub(b).norm_q(q))
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            fields: self.fields.iter().map(|f| f.scaled(s)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum PicardScheme {
    /// Solve for the nonlocal sum `h(u)` exactly in every sweep, iterating
    /// only on `f`.
    NonlocalResolved,
    /// Plain `u ← P u`.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub scheme: PicardScheme,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            scheme: PicardScheme::NonlocalResolved,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residuals: Vec<f64>,
    pub converged: bool,
    /// Ratio of the last two residuals; zero when the last residual vanished.
    pub contraction_ratio: f64,
    pub scheme: PicardScheme,
    /// Whether any nonlocal time had to be moved onto the grid.
    pub snapped_nonlocal: bool,
}

impl SolveReport {
    /// Successive residual ratios `r_{k+1}/r_k`.
    pub fn ratios(&self) -> Vec<f64> {
        self.residuals
            .windows(2)
            .map(|w| if w[0] == 0.0 { 0.0 } else { w[1] / w[0] })
            .collect()
    }
}

/// Residuals beyond this are treated as divergence.
const DIVERGENCE_LIMIT: f64 = 1e12;

/// A problem instance with its operators tabulated on the time grid.
#[derive(Debug, Clone)]
pub struct MildSolver {
    spec: ProblemSpec,
    grid: TimeGrid,
    cache: SolutionOperatorCache,
    colloc: Collocation,
    /// `β(t_m)`
    beta: Vec<f64>,
    /// `σ_n(t_m)`, the symbol of `S_α(t_m) L M⁻¹`
    sigma: Vec<Vec<f64>>,
    /// `W_n(k)`, `k = 1..=M`, stored at index `k - 1`
    conv: Vec<Vec<f64>>,
    nonlocal_nodes: Vec<(usize, f64)>,
    snapped: bool,
}

impl MildSolver {
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        spec.validate()?;
        let grid = spec.grid()?;
        let cache = SolutionOperatorCache::new(spec.order.alpha, spec.modes, spec.quad_nodes)?.with_grid(grid)?;
        let r_max = spec.nonlinearity.orders().max(crate::spectral::DEFAULT_R_MAX);
        let colloc = Collocation::new(spec.modes, crate::spectral::COLLOCATION_FACTOR * spec.modes, r_max)?;
        let alpha = spec.order.alpha;
        let g2 = gamma(2.0 - alpha)?;
        let beta = grid.nodes().map(|t| t.powf(1.0 - alpha) / g2).collect();
        let lm = |n: usize| OperatorKind::L.symbol(n) * OperatorKind::MInv.symbol(n);
        let sigma = (0..grid.len())
            .map(|m| (1..=spec.modes).map(|n| cache.s_node(m, n) * lm(n)).collect())
            .collect();
        let conv = (1..=grid.steps())
            .map(|k| {
                (1..=spec.modes)
                    .map(|n| (cache.s_node(k - 1, n) - cache.s_node(k, n)) / generator_decay(n))
                    .collect()
            })
            .collect();
        let mut snapped = false;
        let nonlocal_nodes = spec
            .nonlocal
            .iter()
            .map(|term| {
                let (idx, moved) = grid.snap(term.t);
                snapped |= moved;
                (idx, term.c)
            })
            .collect();
        Ok(Self {
            spec,
            grid,
            cache,
            colloc,
            beta,
            sigma,
            conv,
            nonlocal_nodes,
            snapped,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn cache(&self) -> &SolutionOperatorCache {
        &self.cache
    }

    pub fn collocation(&self) -> &Collocation {
        &self.colloc
    }

    /// Whether a nonlocal time was moved to its nearest grid node.
    pub fn snapped_nonlocal(&self) -> bool {
        self.snapped
    }

    /// `σ_n(t_m)`.
    pub fn sigma(&self, m: usize, n: usize) -> f64 {
        self.sigma[m][n - 1]
    }

    /// `f(t, W(t))` projected onto the retained modes.
    pub fn eval_f(&self, t: f64, u: &SpectralField) -> Result<SpectralField> {
        eval_nonlinearity(&self.spec.nonlinearity, &self.colloc, t, u)
    }

    /// `h(u) = Σ c_η u(t_η)` at the snapped nodes.
    pub fn nonlocal_sum(&self, u: &Trajectory) -> SpectralField {
        let mut h = SpectralField::zeros(self.spec.modes);
        for &(idx, c) in &self.nonlocal_nodes {
            h.add_scaled(c, &u.fields[idx]);
        }
        h
    }

    /// `v0 + Γ(1-α)⁻¹ ∫₀^t (t-s)^{-α} [u0 + h(u)] ds` at node `m`, before `L M⁻¹`.
    pub fn nonlocal_bracket(&self, u: &Trajectory, m: usize) -> Result<SpectralField> {
        self.check_traj(u)?;
        let mut inner = self.spec.u0.resized(self.spec.modes);
        inner.add_scaled(1.0, &self.nonlocal_sum(u));
        let mut out = self.spec.v0.resized(self.spec.modes);
        out.add_scaled(self.beta[m], &inner);
        Ok(out)
    }

    fn check_traj(&self, u: &Trajectory) -> Result<()> {
        if u.grid != self.grid || u.modes() != self.spec.modes {
            return Err(Error::domain("trajectory does not match the problem grid or mode count"));
        }
        Ok(())
    }

    /// Integrands `g_j = f(t_j, W(t_j)) + ∫₀^{t_j} Σ B 𝔲`, `j = 0..M-1`.
    fn forcing(&self, u: &Trajectory, controls: Option<&ControlBundle>) -> Result<Vec<SpectralField>> {
        let steps = self.grid.steps();
        let mut g: Vec<SpectralField> = if self.spec.nonlinearity.is_zero() {
            vec![SpectralField::zeros(self.spec.modes); steps]
        } else {
            (0..steps)
                .into_par_iter()
                .map(|j| {
                    self.eval_f(self.grid.node(j), &u.fields[j])
                        .map_err(|e| Error::Evaluation(format!("nonlinearity at node {j}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        if let Some(bundle) = controls {
            let integrated = bundle.integrated(self.spec.modes)?;
            if integrated.len() != self.grid.len() {
                return Err(Error::domain("control grid does not match the problem grid"));
            }
            for (gj, cj) in g.iter_mut().zip(&integrated) {
                gj.add_scaled(1.0, cj);
            }
        }
        Ok(g)
    }

    /// Product-integrated `∫₀^{t_m} (t_m-s)^{α-1} T_α(t_m-s) g(s) ds`.
    fn convolve(&self, g: &[SpectralField]) -> Vec<SpectralField> {
        let modes = self.spec.modes;
        (0..self.grid.len())
            .map(|m| {
                let mut out = vec![0.0; modes];
                for (j, gj) in g.iter().enumerate().take(m) {
                    let w = &self.conv[m - j - 1];
                    for ((o, wn), gn) in out.iter_mut().zip(w).zip(&gj.coeffs) {
                        *o += wn * gn;
                    }
                }
                SpectralField::new(out)
            })
            .collect()
    }

    fn assemble(&self, g: &[SpectralField], h: &SpectralField) -> Result<Trajectory> {
        let conv = self.convolve(g);
        let u0 = self.spec.u0.resized(self.spec.modes);
        let v0 = self.spec.v0.resized(self.spec.modes);
        let fields = conv
            .into_iter()
            .enumerate()
            .map(|(m, c)| {
                let coeffs = (0..self.spec.modes)
                    .map(|i| {
                        let bracket = v0.coeffs[i] + self.beta[m] * (u0.coeffs[i] + h.coeffs[i]);
                        self.sigma[m][i] * bracket + c.coeffs[i]
                    })
                    .collect();
                let f = SpectralField::new(coeffs);
                if f.is_finite() {
                    Ok(f)
                } else {
                    Err(Error::Evaluation(format!("non-finite value at node {m}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(self.grid, fields)
    }

    /// One application of the fixed-point operator.
    pub fn apply_p(&self, u: &Trajectory, controls: Option<&ControlBundle>) -> Result<Trajectory> {
        self.check_traj(u)?;
        let g = self.forcing(u, controls)?;
        self.assemble(&g, &self.nonlocal_sum(u))
    }

    /// `P` with `f` frozen at `u` and `h` solved for consistently: per mode,
    /// `H = Σ c R(t_η) / (1 - Σ c σ(t_η) β(t_η))` where `R` is `P` without `h`.
    fn apply_resolved(&self, u: &Trajectory, controls: Option<&ControlBundle>) -> Result<Trajectory> {
        self.check_traj(u)?;
        let g = self.forcing(u, controls)?;
        let zero = SpectralField::zeros(self.spec.modes);
        let base = self.assemble(&g, &zero)?;
        if self.nonlocal_nodes.is_empty() {
            return Ok(base);
        }
        let mut h = SpectralField::zeros(self.spec.modes);
        for i in 0..self.spec.modes {
            let mut num = 0.0;
            let mut den = 1.0;
            for &(idx, c) in &self.nonlocal_nodes {
                num += c * base.fields[idx].coeffs[i];
                den -= c * self.sigma[idx][i] * self.beta[idx];
            }
            if den == 0.0 {
                return Err(Error::Evaluation(format!("nonlocal system is singular in mode {}", i + 1)));
            }
            h.coeffs[i] = num / den;
        }
        let mut out = base;
        for (m, f) in out.fields.iter_mut().enumerate() {
            for i in 0..self.spec.modes {
                f.coeffs[i] += self.sigma[m][i] * self.beta[m] * h.coeffs[i];
            }
        }
        Ok(out)
    }

    /// Every node set to `S_α(t) L M⁻¹ v0`.
    pub fn initial_guess(&self) -> Trajectory {
        let v0 = self.spec.v0.resized(self.spec.modes);
        let fields = (0..self.grid.len())
            .map(|m| SpectralField::new(v0.coeffs.iter().zip(&self.sigma[m]).map(|(v, s)| v * s).collect()))
            .collect();
        Trajectory {
            grid: self.grid,
            fields,
        }
    }

    pub fn picard_solve(
        &self,
        controls: Option<&ControlBundle>,
        opts: SolveOptions,
    ) -> Result<(Trajectory, SolveReport)> {
        self.picard_solve_from(self.initial_guess(), controls, opts)
    }

    pub fn picard_solve_from(
        &self,
        init: Trajectory,
        controls: Option<&ControlBundle>,
        opts: SolveOptions,
    ) -> Result<(Trajectory, SolveReport)> {
        if !(opts.tol > 0.0) || opts.max_iter == 0 {
            return Err(Error::domain("tolerance must be positive and max_iter at least 1"));
        }
        if controls.is_some() {
            self.spec.order.check_controls()?;
        }
        self.check_traj(&init)?;
        let q = self.spec.order.q;
        let mut u = init;
        let mut residuals = Vec::new();
        for iter in 1..=opts.max_iter {
            let next = match opts.scheme {
                PicardScheme::Direct => self.apply_p(&u, controls)?,
                PicardScheme::NonlocalResolved => self.apply_resolved(&u, controls)?,
            };
            let r = next.sup_diff_q(&u, q);
            residuals.push(r);
            u = next;
            if !r.is_finite() || r > DIVERGENCE_LIMIT {
                return Err(Error::NonConvergence {
                    iterations: iter,
                    residuals,
                });
            }
            if r <= opts.tol {
                let n = residuals.len();
                let contraction_ratio = if n < 2 || r == 0.0 { 0.0 } else { r / residuals[n - 2] };
                let report = SolveReport {
                    iterations: iter,
                    residuals,
                    converged: true,
                    contraction_ratio,
                    scheme: opts.scheme,
                    snapped_nonlocal: self.snapped,
                };
                return Ok((u, report));
            }
        }
        Err(Error::NonConvergence {
            iterations: opts.max_iter,
            residuals,
        })
    }
}

/// Evaluates `f(t, W)` on the collocation grid and projects it back.
pub fn eval_nonlinearity(
    nl: &Nonlinearity,
    colloc: &Collocation,
    t: f64,
    u: &SpectralField,
) -> Result<SpectralField> {
    if !u.is_finite() {
        return Err(Error::domain("field is not finite"));
    }
    let values: Vec<f64> = match nl {
        Nonlinearity::Zero => return Ok(SpectralField::zeros(colloc.modes())),
        Nonlinearity::SinDerivative { gain, order } => {
            colloc.apply_bi(*order, u)?.into_iter().map(|d| gain * d.sin()).collect()
        }
        Nonlinearity::Custom(c) => {
            let derivs = (1..=c.orders).map(|i| colloc.apply_bi(i, u)).collect::<Result<Vec<_>>>()?;
            let mut w = vec![0.0; c.orders];
            colloc
                .points()
                .iter()
                .enumerate()
                .map(|(j, &x)| {
                    for (wi, d) in w.iter_mut().zip(&derivs) {
                        *wi = d[j];
                    }
                    (c.func)(t, x, &w)
                })
                .collect()
        }
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation(format!("nonlinearity is not finite at t={t}")));
    }
    Ok(colloc.project_values(&values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order() -> FracOrder {
        FracOrder::new(0.8, 0.25, 2.0).unwrap()
    }

    fn solver(spec: ProblemSpec) -> MildSolver {
        MildSolver::new(spec).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_trajectory() {
        let s = solver(ProblemSpec::new(order(), 1.0, 4, 16));
        let out = s.apply_p(&Trajectory::zeros(s.grid(), 4), None).unwrap();
        assert!(out.fields.iter().all(|f| f.coeffs.iter().all(|&c| c == 0.0)));
    }

    #[test]
    fn bracket_examples() {
        let mut spec = ProblemSpec::new(order(), 1.0, 4, 64);
        spec.v0 = SpectralField::new(vec![0.3, 0.0, 0.1, 0.0]);
        let s = solver(spec.clone());
        let zero = Trajectory::zeros(s.grid(), 4);
        for m in [0, 10, 64] {
            assert_eq!(s.nonlocal_bracket(&zero, m).unwrap(), spec.v0);
        }

        spec.v0 = SpectralField::zeros(4);
        spec.u0 = SpectralField::basis(4, 1);
        let s = solver(spec.clone());
        let g2 = gamma(1.2).unwrap();
        for m in [0, 1, 17, 64] {
            let t = s.grid().node(m);
            let b = s.nonlocal_bracket(&zero, m).unwrap();
            assert!((b.coeffs[0] - t.powf(0.2) / g2).abs() < 1e-10);
        }

        spec.u0 = SpectralField::zeros(4);
        spec.nonlocal = vec![NonlocalTerm { c: 1.0, t: 0.5 }];
        let s = solver(spec);
        let mut u = zero.clone();
        u.fields[32] = SpectralField::basis(4, 2);
        let b = s.nonlocal_bracket(&u, 40).unwrap();
        assert!((b.coeffs[1] - s.grid().node(40).powf(0.2) / g2).abs() < 1e-10);
        assert!(!s.snapped_nonlocal());
    }

    #[test]
    fn off_grid_nonlocal_time_is_snapped() {
        let mut spec = ProblemSpec::new(order(), 1.0, 4, 10);
        spec.nonlocal = vec![NonlocalTerm { c: 0.3, t: 0.33 }];
        assert!(solver(spec).snapped_nonlocal());
    }

    #[test]
    fn symbol_of_lm_inverse() {
        let mut spec = ProblemSpec::new(order(), 1.0, 4, 16);
        spec.v0 = SpectralField::basis(4, 1);
        let s = solver(spec);
        let direct = OperatorKind::L.symbol(1) * OperatorKind::MInv.symbol(1);
        assert_eq!(direct, -2.0);
        let out = s.apply_p(&s.initial_guess(), None).unwrap();
        for m in 0..=16 {
            let expect = -2.0 * s.cache().s_node(m, 1);
            assert!((out.fields[m].coeffs[0] - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn sin_nonlinearity_of_zero_field() {
        let mut spec = ProblemSpec::new(order(), 1.0, 8, 16);
        spec.nonlinearity = Nonlinearity::SinDerivative { gain: 0.1, order: 1 };
        let s = solver(spec);
        assert_eq!(s.eval_f(0.3, &SpectralField::zeros(8)).unwrap(), SpectralField::zeros(8));
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = ProblemSpec::new(order(), 1.0, 4, 16);
        spec.nonlocal = vec![NonlocalTerm { c: 0.3, t: 0.6 }, NonlocalTerm { c: 0.3, t: 0.4 }];
        assert!(MildSolver::new(spec.clone()).is_err());
        spec.nonlocal = vec![NonlocalTerm { c: -0.3, t: 0.4 }];
        assert!(MildSolver::new(spec.clone()).is_err());
        spec.nonlocal.clear();
        spec.controls = 1;
        spec.order = FracOrder::new(0.9, 0.9, 1.1).unwrap();
        assert!(matches!(MildSolver::new(spec), Err(Error::RejectedInstance(_))));
    }

    #[test]
    fn linear_instance_converges_after_one_sweep() {
        let mut spec = ProblemSpec::new(order(), 1.0, 4, 32);
        spec.v0 = SpectralField::basis(4, 1);
        spec.u0 = SpectralField::new(vec![0.0, 1.0, 0.0, 0.0]);
        let s = solver(spec);
        let (_, rep) = s.picard_solve(None, SolveOptions::default()).unwrap();
        assert_eq!(rep.iterations, 2);
        assert_eq!(rep.residuals[1], 0.0);
    }

    #[test]
    fn resolved_and_direct_agree_when_both_converge() {
        let mut spec = ProblemSpec::new(order(), 1.0, 2, 32);
        spec.v0 = SpectralField::basis(2, 1);
        spec.u0 = SpectralField::basis(2, 1);
        spec.nonlocal = vec![NonlocalTerm { c: 0.3, t: 0.5 }];
        let s = solver(spec);
        let opts = SolveOptions { tol: 1e-12, ..SolveOptions::default() };
        let (a, _) = s.picard_solve(None, opts).unwrap();
        let (b, rep) = s
            .picard_solve(None, SolveOptions { scheme: PicardScheme::Direct, ..opts })
            .unwrap();
        assert!(rep.iterations > 2);
        assert!(a.sup_diff_q(&b, 0.25) < 1e-11);
    }
}
