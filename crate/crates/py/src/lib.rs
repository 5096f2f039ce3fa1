//! Python bindings: special functions, discrete fractional operators, the
//! solution operators, the mild solver and the control optimizer.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use fracsob::config::parse_config;
use fracsob::fracops::{self, SampledFn, TimeGrid};
use fracsob::mild_solver::{
    MildSolver, NonlocalTerm, Nonlinearity, PicardScheme, ProblemSpec, SolveOptions, Trajectory,
};
use fracsob::optctrl::{self, ControlBundle, CostSpec, OptimBudget};
use fracsob::solution_ops::SolutionOperatorCache;
use fracsob::specfun::{self, FracOrder};
use fracsob::spectral::SpectralField;

create_exception!(fracsob, FracsobError, PyException);

fn err(e: fracsob::Error) -> PyErr {
    FracsobError::new_err(e.to_string())
}

fn to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any().unbind(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any().unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, to_py(py, item)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

fn report<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| FracsobError::new_err(e.to_string()))?;
    to_py(py, &v)
}

/// Mainardi density `ζ_α(θ)`.
#[pyfunction]
#[pyo3(signature = (alpha, theta, tol = 1e-12))]
fn mainardi_density(alpha: f64, theta: f64, tol: f64) -> PyResult<f64> {
    specfun::mainardi_density(alpha, theta, tol).map_err(err)
}

/// `Γ(1+v)/Γ(1+αv)`, the `v`-th moment of the density.
#[pyfunction]
fn mainardi_moment(alpha: f64, v: f64) -> PyResult<f64> {
    specfun::mainardi_moment(alpha, v).map_err(err)
}

#[pyfunction]
fn mittag_leffler(alpha: f64, beta: f64, z: f64) -> PyResult<f64> {
    specfun::mittag_leffler(alpha, beta, z).map_err(err)
}

#[pyfunction]
fn gamma(x: f64) -> PyResult<f64> {
    specfun::gamma(x).map_err(err)
}

/// θ-quadrature rule for integrals against the density.
#[pyclass(frozen)]
struct QuadratureRule(specfun::QuadratureRule);

#[pymethods]
impl QuadratureRule {
    #[new]
    #[pyo3(signature = (alpha, nodes = 200))]
    fn new(alpha: f64, nodes: usize) -> PyResult<Self> {
        specfun::theta_quadrature(alpha, nodes).map(Self).map_err(err)
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.0.nodes.clone()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights.clone()
    }

    #[getter]
    fn density(&self) -> Vec<f64> {
        self.0.density.clone()
    }

    fn normalization_defect(&self) -> f64 {
        self.0.normalization_defect()
    }

    fn moment(&self, v: f64) -> f64 {
        self.0.moment(v)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

fn sampled(values: Vec<f64>, horizon: f64) -> PyResult<SampledFn> {
    let steps = values.len().saturating_sub(1);
    let grid = TimeGrid::new(horizon, steps).map_err(err)?;
    SampledFn::new(grid, values).map_err(err)
}

/// Fractional integral of samples on the uniform grid of `[0, horizon]`.
#[pyfunction]
fn frac_integral(values: Vec<f64>, horizon: f64, alpha: f64) -> PyResult<Vec<f64>> {
    Ok(fracops::frac_integral(&sampled(values, horizon)?, alpha).map_err(err)?.values)
}

#[pyfunction]
fn caputo_deriv(values: Vec<f64>, horizon: f64, alpha: f64) -> PyResult<Vec<f64>> {
    Ok(fracops::caputo_deriv(&sampled(values, horizon)?, alpha).map_err(err)?.values)
}

#[pyfunction]
fn rl_deriv(values: Vec<f64>, horizon: f64, alpha: f64) -> PyResult<Vec<f64>> {
    Ok(fracops::rl_deriv(&sampled(values, horizon)?, alpha).map_err(err)?.values)
}

#[pyfunction]
fn gl_deriv(values: Vec<f64>, horizon: f64, alpha: f64) -> PyResult<Vec<f64>> {
    Ok(fracops::gl_deriv(&sampled(values, horizon)?, alpha).map_err(err)?.values)
}

/// Per-mode multipliers of `S_α(t)` and `T_α(t)`.
#[pyclass(frozen)]
struct SolutionOperators(SolutionOperatorCache);

#[pymethods]
impl SolutionOperators {
    #[new]
    #[pyo3(signature = (alpha, modes, quad_nodes = 200))]
    fn new(alpha: f64, modes: usize, quad_nodes: usize) -> PyResult<Self> {
        SolutionOperatorCache::new(alpha, modes, quad_nodes).map(Self).map_err(err)
    }

    fn s_multiplier(&self, t: f64, n: usize) -> PyResult<f64> {
        self.0.s_multiplier(t, n).map_err(err)
    }

    fn t_multiplier(&self, t: f64, n: usize) -> PyResult<f64> {
        self.0.t_multiplier(t, n).map_err(err)
    }

    fn apply_s(&self, t: f64, coeffs: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.0.apply_s(t, &SpectralField::new(coeffs)).map_err(err)?.coeffs)
    }

    fn apply_t(&self, t: f64, coeffs: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.0.apply_t(t, &SpectralField::new(coeffs)).map_err(err)?.coeffs)
    }
}

/// A solved trajectory: `coefficients[m][n-1]` at time `times[m]`.
#[pyclass(frozen)]
struct Solution {
    #[pyo3(get)]
    times: Vec<f64>,
    #[pyo3(get)]
    coefficients: Vec<Vec<f64>>,
    #[pyo3(get)]
    report: Py<PyAny>,
}

fn solution(traj: &Trajectory, rep: Py<PyAny>) -> Solution {
    Solution {
        times: traj.grid.nodes().collect(),
        coefficients: traj.fields.iter().map(|f| f.coeffs.clone()).collect(),
        report: rep,
    }
}

fn field(coeffs: Option<Vec<f64>>, modes: usize) -> PyResult<SpectralField> {
    let c = coeffs.unwrap_or_default();
    if c.len() > modes {
        return Err(FracsobError::new_err(format!("at most {modes} coefficients expected")));
    }
    Ok(SpectralField::new(c).resized(modes))
}

/// Problem instance with its operators tabulated on the time grid.
#[pyclass(frozen)]
struct Solver(MildSolver);

#[pymethods]
impl Solver {
    #[new]
    #[pyo3(signature = (
        alpha, horizon, modes, steps, *, q = 0.25, p = 2.0, u0 = None, v0 = None,
        nonlocal_terms = Vec::new(), nonlinearity = "zero", f_gain = 0.1, f_order = 1,
        controls = 0, control_modes = 4, quad_nodes = 200
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        alpha: f64,
        horizon: f64,
        modes: usize,
        steps: usize,
        q: f64,
        p: f64,
        u0: Option<Vec<f64>>,
        v0: Option<Vec<f64>>,
        nonlocal_terms: Vec<(f64, f64)>,
        nonlinearity: &str,
        f_gain: f64,
        f_order: usize,
        controls: usize,
        control_modes: usize,
        quad_nodes: usize,
    ) -> PyResult<Self> {
        let order = FracOrder::new(alpha, q, p).map_err(err)?;
        let mut spec = ProblemSpec::new(order, horizon, modes, steps);
        spec.u0 = field(u0, modes)?;
        spec.v0 = field(v0, modes)?;
        spec.nonlocal = nonlocal_terms.into_iter().map(|(c, t)| NonlocalTerm { c, t }).collect();
        spec.nonlinearity = match nonlinearity {
            "zero" => Nonlinearity::Zero,
            "sin_dx" => Nonlinearity::SinDerivative { gain: f_gain, order: f_order },
            other => return Err(FracsobError::new_err(format!("unknown nonlinearity `{other}`"))),
        };
        spec.controls = controls;
        spec.control_modes = control_modes.min(modes);
        spec.quad_nodes = quad_nodes;
        MildSolver::new(spec).map(Self).map_err(err)
    }

    /// Picard iteration; `scheme` is "resolved" or "direct".
    #[pyo3(signature = (tol = 1e-10, max_iter = 200, scheme = "resolved"))]
    fn solve(&self, py: Python<'_>, tol: f64, max_iter: usize, scheme: &str) -> PyResult<Solution> {
        let scheme = match scheme {
            "resolved" => PicardScheme::NonlocalResolved,
            "direct" => PicardScheme::Direct,
            other => return Err(FracsobError::new_err(format!("unknown scheme `{other}`"))),
        };
        let opts = SolveOptions { tol, max_iter, scheme };
        let (traj, rep) = py.detach(|| self.0.picard_solve(None, opts)).map_err(err)?;
        let r = report(py, &rep)?;
        Ok(solution(&traj, r))
    }

    /// Exponent conditions and sampled constants of the instance.
    #[pyo3(signature = (probes = 100, seed = 0))]
    fn hypothesis_check(&self, py: Python<'_>, probes: usize, seed: u64) -> PyResult<Py<PyAny>> {
        let r = optctrl::hypothesis_check(self.0.spec(), probes, seed).map_err(err)?;
        report(py, &r)
    }

    /// Projected-gradient descent from the zero control bundle.
    #[pyo3(signature = (state_weight = 1.0, control_weight = 1.0, radius = 1.0, max_iter = 500, grad_tol = 1e-6))]
    fn optimize(
        &self,
        py: Python<'_>,
        state_weight: f64,
        control_weight: f64,
        radius: f64,
        max_iter: usize,
        grad_tol: f64,
    ) -> PyResult<Py<PyAny>> {
        let spec = self.0.spec();
        let cost = CostSpec::new(state_weight, control_weight).map_err(err)?;
        let budget = OptimBudget {
            max_iter,
            grad_tol,
            ..OptimBudget::default()
        };
        let init = ControlBundle::zeros(self.0.grid(), spec.controls, spec.control_modes, radius);
        let out = py
            .detach(|| optctrl::optimize_controls(&self.0, cost, &init, budget))
            .map_err(err)?;
        let controls: Vec<Vec<Vec<f64>>> = out
            .controls
            .controls
            .iter()
            .map(|c| c.fields.iter().map(|f| f.coeffs.clone()).collect())
            .collect();
        let v = serde_json::json!({
            "descent": out.descent,
            "projected_gradient_norm": out.grad_norm,
            "budget_exhausted": out.exhausted,
            "admissibility": out.controls.admissibility(),
            "controls": controls,
            "final_state": out.trajectory.fields.iter().map(|f| f.coeffs.clone()).collect::<Vec<_>>(),
        });
        to_py(py, &v)
    }
}

/// Parses a config text and runs it, writing artifacts to `out_dir`.
/// Returns the run report.
#[pyfunction]
#[pyo3(signature = (text, mode, out_dir, seed = None))]
fn run_config(py: Python<'_>, text: &str, mode: &str, out_dir: &str, seed: Option<u64>) -> PyResult<Py<PyAny>> {
    let mut cfg = parse_config(text).map_err(err)?;
    cfg.mode = mode.parse().map_err(FracsobError::new_err)?;
    cfg.out_dir = out_dir.into();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let outcome = py.detach(|| fracsob::run::run(&cfg)).map_err(err)?;
    to_py(py, &outcome.report)
}

#[pymodule(name = "fracsob")]
fn fracsob_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FracsobError", m.py().get_type::<FracsobError>())?;
    m.add_function(wrap_pyfunction!(mainardi_density, m)?)?;
    m.add_function(wrap_pyfunction!(mainardi_moment, m)?)?;
    m.add_function(wrap_pyfunction!(mittag_leffler, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(frac_integral, m)?)?;
    m.add_function(wrap_pyfunction!(caputo_deriv, m)?)?;
    m.add_function(wrap_pyfunction!(rl_deriv, m)?)?;
    m.add_function(wrap_pyfunction!(gl_deriv, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_class::<QuadratureRule>()?;
    m.add_class::<SolutionOperators>()?;
    m.add_class::<Solver>()?;
    m.add_class::<Solution>()?;
    Ok(())
}
