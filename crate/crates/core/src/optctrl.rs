//! Optimal multi-integral control: admissible set, Lagrange cost,
//! projected-gradient descent and the hypothesis checker.
//!
//! Controls are piecewise constant in time. The value stored at node `i`
//! acts on `[t_i, t_{i+1})`; the final node only mirrors node `M-1`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fracops::TimeGrid;
use crate::mild_solver::{eval_nonlinearity, MildSolver, Nonlinearity, ProblemSpec, SolveOptions, SolveReport, Trajectory};
use crate::spectral::{Collocation, SpectralField};

#[derive(Debug, Clone, PartialEq)]
pub struct ControlBundle {
    pub controls: Vec<Trajectory>,
    pub radius: f64,
}

impl ControlBundle {
    pub fn zeros(grid: TimeGrid, k: usize, modes: usize, radius: f64) -> Self {
        Self {
            controls: vec![Trajectory::zeros(grid, modes); k],
            radius,
        }
    }

    pub fn k(&self) -> usize {
        self.controls.len()
    }

    pub fn grid(&self) -> Option<TimeGrid> {
        self.controls.first().map(|c| c.grid)
    }

    pub fn modes(&self) -> usize {
        self.controls.first().map_or(0, Trajectory::modes)
    }

    /// `Σ_j ∫₀^a ‖𝔲_j(s)‖ ds`; the constraint is monotone in `t`, so this
    /// is its largest value.
    pub fn admissibility(&self) -> f64 {
        self.controls
            .iter()
            .map(|c| {
                let h = c.grid.step();
                c.fields[..c.grid.steps()].iter().map(|f| h * f.norm()).sum::<f64>()
            })
            .sum()
    }

    pub fn is_admissible(&self, slack: f64) -> bool {
        self.admissibility() <= self.radius + slack
    }

    /// `∫₀^{t_m} Σ_j 𝔲_j(s) ds` at every node, padded to `modes`.
    pub fn integrated(&self, modes: usize) -> Result<Vec<SpectralField>> {
        let grid = self.grid().ok_or_else(|| Error::domain("empty control bundle"))?;
        if self.modes() > modes {
            return Err(Error::domain("controls carry more modes than the state"));
        }
        let h = grid.step();
        let mut acc = SpectralField::zeros(modes);
        let mut out = Vec::with_capacity(grid.len());
        out.push(acc.clone());
        for i in 0..grid.steps() {
            for c in &self.controls {
                acc.add_scaled(h, &c.fields[i].resized(modes));
            }
            out.push(acc.clone());
        }
        Ok(out)
    }

    /// Flattened control values `[j][i < M][mode]`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.controls
            .iter()
            .flat_map(|c| c.fields[..c.grid.steps()].iter().flat_map(|f| f.coeffs.iter().copied()))
            .collect()
    }

    /// Inverse of [`ControlBundle::to_vec`], using `self` for the shape.
    ///
    /// Panics if `x` does not have the length of `self.to_vec()`.
    pub fn with_values(&self, x: &[f64]) -> Self {
        let modes = self.modes();
        let expected: usize = self.controls.iter().map(|c| c.grid.steps() * modes).sum();
        assert_eq!(x.len(), expected, "control vector length");
        let mut it = x.chunks(modes);
        let controls = self
            .controls
            .iter()
            .map(|c| {
                let steps = c.grid.steps();
                let mut fields: Vec<SpectralField> =
                    (0..steps).map(|_| SpectralField::new(it.next().expect("length checked").to_vec())).collect();
                fields.push(fields[steps - 1].clone());
                Trajectory {
                    grid: c.grid,
                    fields,
                }
            })
            .collect();
        Self {
            controls,
            radius: self.radius,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            controls: self.controls.iter().map(|c| c.scaled(s)).collect(),
            radius: self.radius,
        }
    }
}

/// Rescales onto the admissible ball when the constraint is violated.
pub fn project_admissible(bundle: &ControlBundle) -> ControlBundle {
    let phi = bundle.admissibility();
    if phi <= bundle.radius {
        bundle.clone()
    } else {
        bundle.scaled(bundle.radius / phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CostSpec {
    pub state_weight: f64,
    pub control_weight: f64,
}

impl Default for CostSpec {
    fn default() -> Self {
        Self {
            state_weight: 1.0,
            control_weight: 1.0,
        }
    }
}

impl CostSpec {
    pub fn new(state_weight: f64, control_weight: f64) -> Result<Self> {
        let ok = |w: f64| w >= 0.0 && w.is_finite();
        if !ok(state_weight) || !ok(control_weight) || state_weight + control_weight == 0.0 {
            return Err(Error::domain("cost weights must be nonnegative and not both zero"));
        }
        Ok(Self {
            state_weight,
            control_weight,
        })
    }
}

/// `∫₀^a [‖u(t)‖² + ∫₀^t Σ_j ‖𝔲_j(s)‖² ds] dt`, trapezoid in `t` over
/// exactly accumulated inner integrals.
pub fn cost_j(traj: &Trajectory, controls: &ControlBundle, cost: CostSpec) -> Result<f64> {
    let grid = traj.grid;
    if controls.controls.iter().any(|c| c.grid != grid) {
        return Err(Error::domain("controls and trajectory live on different grids"));
    }
    let h = grid.step();
    let mut inner = 0.0;
    let mut total = 0.0;
    for m in 0..grid.len() {
        if m > 0 {
            inner += controls
                .controls
                .iter()
                .map(|c| h * c.fields[m - 1].coeffs.iter().map(|v| v * v).sum::<f64>())
                .sum::<f64>();
        }
        let u2 = traj.fields[m].coeffs.iter().map(|v| v * v).sum::<f64>();
        let w = if m == 0 || m == grid.steps() { 0.5 * h } else { h };
        total += w * (cost.state_weight * u2 + cost.control_weight * inner);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OptimBudget {
    pub max_iter: usize,
    /// Stop once the projected gradient norm drops below this.
    pub grad_tol: f64,
    pub fd_step: f64,
    pub armijo_c1: f64,
    pub max_halvings: usize,
    pub solve: SolveOptions,
}

impl Default for OptimBudget {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-6,
            fd_step: 1e-4,
            armijo_c1: 1e-4,
            max_halvings: 40,
            solve: SolveOptions {
                tol: 1e-12,
                ..SolveOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub controls: ControlBundle,
    pub trajectory: Trajectory,
    pub solve_report: SolveReport,
    /// `J` after every accepted step, starting with the projected initial point.
    pub descent: Vec<f64>,
    pub grad_norm: f64,
    /// Set when the iteration budget ran out before the gradient test passed.
    pub exhausted: bool,
}

/// Control-to-cost map with a counter for error reporting.
struct Objective<'a> {
    solver: &'a MildSolver,
    cost: CostSpec,
    shape: &'a ControlBundle,
    opts: SolveOptions,
}

impl Objective<'_> {
    fn eval(&self, x: &[f64], candidate: usize) -> Result<f64> {
        let bundle = self.shape.with_values(x);
        let wrap = |e: Error| Error::Optimization {
            candidate,
            source: Box::new(e),
        };
        let (traj, _) = self.solver.picard_solve(Some(&bundle), self.opts).map_err(wrap)?;
        cost_j(&traj, &bundle, self.cost).map_err(wrap)
    }

    fn gradient(&self, x: &[f64], step: f64, candidate: usize) -> Result<Vec<f64>> {
        (0..x.len())
            .into_par_iter()
            .map(|i| {
                let mut y = x.to_vec();
                y[i] = x[i] + step;
                let plus = self.eval(&y, candidate)?;
                y[i] = x[i] - step;
                let minus = self.eval(&y, candidate)?;
                Ok((plus - minus) / (2.0 * step))
            })
            .collect()
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        project_admissible(&self.shape.with_values(x)).to_vec()
    }

    /// `‖x - P(x - g)‖`.
    fn projected_gradient_norm(&self, x: &[f64], g: &[f64]) -> f64 {
        let trial: Vec<f64> = x.iter().zip(g).map(|(a, b)| a - b).collect();
        let p = self.project(&trial);
        x.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projected-gradient descent with Barzilai-Borwein trial steps and
/// Armijo backtracking by halving.
pub fn optimize_controls(
    solver: &MildSolver,
    cost: CostSpec,
    init: &ControlBundle,
    budget: OptimBudget,
) -> Result<OptimResult> {
    let spec = solver.spec();
    spec.order.check_controls()?;
    if init.k() != spec.controls || init.k() == 0 {
        return Err(Error::domain(format!("expected {} controls, got {}", spec.controls, init.k())));
    }
    if init.grid() != Some(solver.grid()) {
        return Err(Error::domain("initial controls are not on the problem grid"));
    }
    let obj = Objective {
        solver,
        cost,
        shape: init,
        opts: budget.solve,
    };
    let mut candidate = 0;
    let mut x = obj.project(&init.to_vec());
    let mut j = obj.eval(&x, candidate)?;
    let mut g = obj.gradient(&x, budget.fd_step, candidate)?;
    let mut descent = vec![j];
    let mut grad_norm = obj.projected_gradient_norm(&x, &g);
    let mut step = 1.0;
    let mut exhausted = true;
    for _ in 0..budget.max_iter {
        if grad_norm <= budget.grad_tol {
            exhausted = false;
            break;
        }
        let mut s = step;
        let mut accepted = None;
        for _ in 0..=budget.max_halvings {
            candidate += 1;
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - s * b).collect();
            let x_new = obj.project(&trial);
            let d: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
            let j_new = obj.eval(&x_new, candidate)?;
            if j_new <= j + budget.armijo_c1 * dot(&g, &d) {
                accepted = Some((x_new, j_new, d));
                break;
            }
            s *= 0.5;
        }
        let Some((x_new, j_new, d)) = accepted else {
            // no decrease left at working precision
            exhausted = false;
            break;
        };
        let g_new = obj.gradient(&x_new, budget.fd_step, candidate)?;
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&d, &y);
        step = if sy > 0.0 { (dot(&d, &d) / sy).clamp(1e-8, 1e8) } else { 2.0 * s };
        x = x_new;
        j = j_new;
        g = g_new;
        grad_norm = obj.projected_gradient_norm(&x, &g);
        descent.push(j);
    }
    if grad_norm <= budget.grad_tol {
        exhausted = false;
    }
    let controls = init.with_values(&x);
    let (trajectory, solve_report) = solver
        .picard_solve(Some(&controls), budget.solve)
        .map_err(|e| Error::Optimization {
            candidate,
            source: Box::new(e),
        })?;
    Ok(OptimResult {
        controls,
        trajectory,
        solve_report,
        descent,
        grad_norm,
        exhausted,
    })
}

/// `‖x - P(x - ∇J)‖` at `controls`, with a central-difference gradient.
pub fn projected_gradient_norm(
    solver: &MildSolver,
    cost: CostSpec,
    controls: &ControlBundle,
    budget: OptimBudget,
) -> Result<f64> {
    let obj = Objective {
        solver,
        cost,
        shape: controls,
        opts: budget.solve,
    };
    let x = controls.to_vec();
    let g = obj.gradient(&x, budget.fd_step, 0)?;
    Ok(obj.projected_gradient_norm(&x, &g))
}

/// Uniform random direction scaled to a uniform fraction of the radius.
pub fn random_admissible(shape: &ControlBundle, rng: &mut impl Rng) -> ControlBundle {
    let x: Vec<f64> = shape.to_vec().iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b = shape.with_values(&x);
    let phi = b.admissibility();
    let target = shape.radius * rng.gen_range(0.0..1.0);
    if phi == 0.0 {
        b
    } else {
        b.scaled(target / phi)
    }
}

/// Costs of `count` random admissible bundles drawn from `seed`.
pub fn random_baseline(
    solver: &MildSolver,
    cost: CostSpec,
    shape: &ControlBundle,
    count: usize,
    seed: u64,
    opts: SolveOptions,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bundles: Vec<ControlBundle> = (0..count).map(|_| random_admissible(shape, &mut rng)).collect();
    bundles
        .par_iter()
        .enumerate()
        .map(|(i, b)| {
            let wrap = |e: Error| Error::Optimization {
                candidate: i,
                source: Box::new(e),
            };
            let (traj, _) = solver.picard_solve(Some(b), opts).map_err(wrap)?;
            cost_j(&traj, b, cost)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct HypothesisReport {
    pub alpha_q: f64,
    pub alpha_q_pass: bool,
    pub p_alpha_one_minus_q: f64,
    pub p_alpha_one_minus_q_pass: bool,
    /// Whether the control exponent condition is needed (k > 0).
    pub controls_present: bool,
    pub nonlinearity: String,
    /// `max ‖f(t, W)‖ / (1 + r‖u‖_q)` over the probe fields.
    pub measured_growth: f64,
    pub declared_growth: Option<f64>,
    /// `max ‖f(u) - f(v)‖ / Σ_i ‖B_i(u - v)‖` over probe pairs.
    pub measured_lipschitz: f64,
    pub declared_lipschitz: Option<f64>,
    /// Lipschitz constant of `h` measured on constant-in-time probes.
    pub k1: f64,
    /// `sup ‖h(u)‖_q` over the probe set.
    pub k2: f64,
    pub probes: usize,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        let growth_ok = self.declared_growth.is_none_or(|a| self.measured_growth <= a * (1.0 + 1e-12));
        let lip_ok = self.declared_lipschitz.is_none_or(|l| self.measured_lipschitz <= l * (1.0 + 1e-12));
        self.alpha_q_pass && (!self.controls_present || self.p_alpha_one_minus_q_pass) && growth_ok && lip_ok
    }
}

fn declared_constants(nl: &Nonlinearity) -> (Option<f64>, Option<f64>) {
    match nl {
        Nonlinearity::Zero => (Some(0.0), Some(0.0)),
        // |sin| ≤ 1 on [0, π] and sin is 1-Lipschitz
        Nonlinearity::SinDerivative { gain, .. } => {
            (Some(gain.abs() * std::f64::consts::PI.sqrt()), Some(gain.abs()))
        }
        Nonlinearity::Custom(c) => (Some(c.gain), Some(c.lipschitz)),
    }
}

/// Exponent conditions plus sampled growth, Lipschitz and nonlocal constants.
pub fn hypothesis_check(spec: &ProblemSpec, probes: usize, seed: u64) -> Result<HypothesisReport> {
    let order = spec.order;
    let modes = spec.modes.max(1);
    let r = spec.nonlinearity.orders().max(1);
    let colloc = Collocation::new(modes, crate::spectral::COLLOCATION_FACTOR * modes, r.max(2))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = |rng: &mut ChaCha8Rng| {
        let scale = 10f64.powf(rng.gen_range(-2.0..1.0));
        SpectralField::new((0..modes).map(|_| scale * rng.gen_range(-1.0..1.0)).collect())
    };
    let q = order.q;
    let mut growth: f64 = 0.0;
    let mut lip: f64 = 0.0;
    let mut sup_q: f64 = 0.0;
    let mut k1: f64 = 0.0;
    let csum: f64 = spec.nonlocal.iter().map(|t| t.c).sum();
    for i in 0..probes {
        let t = spec.horizon * i as f64 / probes.max(1) as f64;
        let u = field(&mut rng);
        let v = field(&mut rng);
        let fu = eval_nonlinearity(&spec.nonlinearity, &colloc, t, &u)?;
        let fv = eval_nonlinearity(&spec.nonlinearity, &colloc, t, &v)?;
        growth = growth.max(fu.norm() / (1.0 + r as f64 * u.norm_q(q)));
        let diff = u.sub(&v);
        // ‖∂ₓ^k d‖ by Parseval: the derivatives of the sine basis stay orthonormal
        let w: f64 = (1..=r)
            .map(|k| {
                diff.coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| ((i + 1) as f64).powi(k as i32) * c)
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt()
            })
            .sum();
        if w > 0.0 {
            lip = lip.max(fu.sub(&fv).norm() / w);
        }
        // h evaluated on constant-in-time trajectories equal to u and v
        let hu = u.scaled(csum);
        let hv = v.scaled(csum);
        sup_q = sup_q.max(hu.norm_q(q));
        let d = diff.norm_q(q);
        if d > 0.0 {
            k1 = k1.max(hu.sub(&hv).norm_q(q) / d);
        }
    }
    let (declared_growth, declared_lipschitz) = declared_constants(&spec.nonlinearity);
    Ok(HypothesisReport {
        alpha_q: order.alpha_q(),
        alpha_q_pass: order.alpha_q() < 1.0,
        p_alpha_one_minus_q: order.p_alpha_one_minus_q(),
        p_alpha_one_minus_q_pass: order.p_alpha_one_minus_q() > 1.0,
        controls_present: spec.controls > 0,
        nonlinearity: spec.nonlinearity.label(),
        measured_growth: growth,
        declared_growth,
        measured_lipschitz: lip,
        declared_lipschitz,
        k1,
        k2: sup_q,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mild_solver::NonlocalTerm;
    use crate::specfun::FracOrder;

    fn grid() -> TimeGrid {
        TimeGrid::new(1.0, 64).unwrap()
    }

    #[test]
    fn cost_of_zero_and_unit_control() {
        let g = grid();
        let traj = Trajectory::zeros(g, 8);
        let zero = ControlBundle::zeros(g, 1, 4, 1.0);
        assert_eq!(cost_j(&traj, &zero, CostSpec::default()).unwrap(), 0.0);
        let mut one = zero.clone();
        for f in &mut one.controls[0].fields {
            f.coeffs[0] = 1.0;
        }
        let j = cost_j(&traj, &one, CostSpec::default()).unwrap();
        assert!((j - 0.5).abs() < 1e-6, "{j}");
    }

    #[test]
    fn cost_is_quadratic() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let shape = ControlBundle::zeros(g, 2, 4, 1.0);
        let b = random_admissible(&shape, &mut rng);
        let mut traj = Trajectory::zeros(g, 8);
        for f in &mut traj.fields {
            for c in &mut f.coeffs {
                *c = rng.gen_range(-1.0..1.0);
            }
        }
        let j1 = cost_j(&traj, &b, CostSpec::default()).unwrap();
        let j2 = cost_j(&traj.scaled(2.0), &b.scaled(2.0), CostSpec::default()).unwrap();
        assert!((j2 - 4.0 * j1).abs() <= 1e-10 * j2.max(1.0));
        assert!(j1 >= 0.0);
    }

    #[test]
    fn projection_scales_and_is_idempotent() {
        let g = grid();
        let mut b = ControlBundle::zeros(g, 2, 4, 1.0);
        for f in &mut b.controls[0].fields {
            f.coeffs[1] = 2.0;
        }
        assert!((b.admissibility() - 2.0).abs() < 1e-12);
        let p = project_admissible(&b);
        assert!((p.admissibility() - 1.0).abs() < 1e-10);
        assert!((p.controls[0].fields[5].coeffs[1] - 1.0).abs() < 1e-12);
        let pp = project_admissible(&p);
        let diff: f64 = pp.to_vec().iter().zip(p.to_vec()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-12);
        let small = b.scaled(0.1);
        assert_eq!(project_admissible(&small), small);
    }

    #[test]
    fn vector_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = random_admissible(&ControlBundle::zeros(grid(), 2, 3, 1.0), &mut rng);
        assert_eq!(b.with_values(&b.to_vec()), b);
        assert!(b.is_admissible(1e-12));
    }

    fn section_spec() -> ProblemSpec {
        let mut spec = ProblemSpec::new(FracOrder::new(0.8, 0.25, 2.0).unwrap(), 1.0, 8, 16);
        spec.u0 = SpectralField::basis(8, 1);
        spec.v0 = SpectralField::basis(8, 1);
        spec.nonlocal = vec![NonlocalTerm { c: 0.3, t: 0.5 }];
        spec.controls = 1;
        spec.control_modes = 2;
        spec
    }

    #[test]
    fn pure_control_penalty_drives_controls_to_zero() {
        let spec = section_spec();
        let solver = MildSolver::new(spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let init = random_admissible(&ControlBundle::zeros(solver.grid(), 1, 2, 1.0), &mut rng);
        let cost = CostSpec::new(0.0, 1.0).unwrap();
        // the last cells carry curvature of order h², so the gradient test must be tight
        let budget = OptimBudget { grad_tol: 1e-9, ..OptimBudget::default() };
        let out = optimize_controls(&solver, cost, &init, budget).unwrap();
        assert!(!out.exhausted);
        assert!(out.descent.last().unwrap() <= &1e-12);
        assert!(out.controls.to_vec().iter().all(|v| v.abs() <= 1e-6));
        assert!(out.descent.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn section_exponents() {
        let r = hypothesis_check(&section_spec(), 50, 0).unwrap();
        assert!((r.alpha_q - 0.2).abs() < 1e-15);
        assert!((r.p_alpha_one_minus_q - 1.2).abs() < 1e-15);
        assert!(r.passed());
        assert!((r.k1 - 0.3).abs() < 1e-12);

        let mut spec = section_spec();
        spec.order = FracOrder { alpha: 0.9, q: 0.9, p: 1.1 };
        let r = hypothesis_check(&spec, 10, 0).unwrap();
        assert!((r.alpha_q - 0.81).abs() < 1e-12 && r.alpha_q_pass);
        assert!((r.p_alpha_one_minus_q - 0.099).abs() < 1e-12 && !r.p_alpha_one_minus_q_pass);
        assert!(!r.passed());
    }

    #[test]
    fn sin_nonlinearity_within_declared_constants() {
        let mut spec = section_spec();
        spec.nonlinearity = Nonlinearity::SinDerivative { gain: 0.1, order: 1 };
        let r = hypothesis_check(&spec, 100, 5).unwrap();
        assert!(r.measured_growth <= r.declared_growth.unwrap());
        assert!(r.measured_lipschitz <= r.declared_lipschitz.unwrap());
        assert!(r.passed());
    }
}
