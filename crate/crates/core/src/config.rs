//! Sectioned `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! [problem]
//! alpha = 0.8
//! a = 1.0
//! N = 16
//! M = 512
//! u0 = 1:1.0, 2:0.5
//! nonlocal = 0.3@0.5
//! nonlinearity = sin_dx
//!
//! [solver]
//! tol = 1e-8
//!
//! [cost]
//! state_weight = 1
//!
//! [output]
//! dir = out
//! seed = 7
//! ```
//!
//! Fields are written as `mode:coefficient` pairs in the sine basis.
//! Nonlocal terms are `c@t` pairs. Unknown keys and sections are errors.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mild_solver::{NonlocalTerm, Nonlinearity, PicardScheme, ProblemSpec, SolveOptions};
use crate::optctrl::{CostSpec, OptimBudget};
use crate::solution_ops::DEFAULT_QUAD_NODES;
use crate::specfun::FracOrder;
use crate::spectral::SpectralField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Verify,
    Solve,
    Optimize,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "verify" => Ok(Mode::Verify),
            "solve" => Ok(Mode::Solve),
            "optimize" => Ok(Mode::Optimize),
            _ => Err(format!("unknown mode `{s}` (expected verify, solve or optimize)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityKind {
    Zero,
    SinDx,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub alpha: f64,
    pub q: f64,
    pub p: f64,
    pub horizon: f64,
    pub modes: usize,
    pub steps: usize,
    pub u0: Vec<(usize, f64)>,
    pub v0: Vec<(usize, f64)>,
    pub nonlocal: Vec<(f64, f64)>,
    pub nonlinearity: NonlinearityKind,
    pub f_gain: f64,
    pub f_order: usize,
    pub controls: usize,
    pub control_modes: usize,
    pub radius: f64,
    pub quad_nodes: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub scheme: PicardScheme,
    pub state_weight: f64,
    pub control_weight: f64,
    pub opt_max_iter: usize,
    pub grad_tol: f64,
    pub fd_step: f64,
    pub baseline_samples: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl RunConfig {
    pub fn order(&self) -> Result<FracOrder> {
        FracOrder::new(self.alpha, self.q, self.p)
    }

    fn field(&self, pairs: &[(usize, f64)]) -> SpectralField {
        let mut f = SpectralField::zeros(self.modes);
        for &(n, c) in pairs {
            f.coeffs[n - 1] = c;
        }
        f
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let mut spec = ProblemSpec::new(self.order()?, self.horizon, self.modes, self.steps);
        spec.u0 = self.field(&self.u0);
        spec.v0 = self.field(&self.v0);
        spec.nonlocal = self.nonlocal.iter().map(|&(c, t)| NonlocalTerm { c, t }).collect();
        spec.nonlinearity = match self.nonlinearity {
            NonlinearityKind::Zero => Nonlinearity::Zero,
            NonlinearityKind::SinDx => Nonlinearity::SinDerivative {
                gain: self.f_gain,
                order: self.f_order,
            },
        };
        spec.controls = if self.mode == Mode::Optimize { self.controls } else { 0 };
        spec.control_modes = self.control_modes;
        spec.quad_nodes = self.quad_nodes;
        spec.validate()?;
        Ok(spec)
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            scheme: self.scheme,
        }
    }

    pub fn cost(&self) -> Result<CostSpec> {
        CostSpec::new(self.state_weight, self.control_weight)
    }

    pub fn budget(&self) -> OptimBudget {
        OptimBudget {
            max_iter: self.opt_max_iter,
            grad_tol: self.grad_tol,
            fd_step: self.fd_step,
            solve: SolveOptions {
                tol: self.tol.min(1e-12),
                ..self.solve_options()
            },
            ..OptimBudget::default()
        }
    }
}

const KEYS: &[(&str, &[&str])] = &[
    (
        "problem",
        &[
            "alpha",
            "q",
            "p",
            "a",
            "N",
            "M",
            "u0",
            "v0",
            "nonlocal",
            "nonlinearity",
            "f_gain",
            "f_order",
            "k",
            "control_modes",
            "radius",
            "quad_nodes",
        ],
    ),
    ("solver", &["mode", "tol", "max_iter", "scheme"]),
    (
        "cost",
        &["state_weight", "control_weight", "max_iter", "grad_tol", "fd_step", "baseline_samples"],
    ),
    ("output", &["dir", "seed"]),
];

/// Raw `(section, key) -> (line, value)` table.
struct Table {
    entries: BTreeMap<(String, String), (usize, String)>,
    last_line: usize,
}

impl Table {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            last_line = line;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
                let name = name.trim();
                if !KEYS.iter().any(|(s, _)| *s == name) {
                    return Err(parse_err(line, format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(parse_err(line, format!("expected `key = value`, got `{body}`")));
            };
            let Some(sec) = &section else {
                return Err(parse_err(line, "key outside of any section".to_string()));
            };
            let key = key.trim();
            let allowed = KEYS.iter().find(|(s, _)| s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !allowed.contains(&key) {
                return Err(parse_err(line, format!("unknown key `{key}` in [{sec}]")));
            }
            let value = value.trim().trim_matches('"').trim().to_string();
            if entries.insert((sec.clone(), key.to_string()), (line, value)).is_some() {
                return Err(parse_err(line, format!("duplicate key `{key}` in [{sec}]")));
            }
        }
        Ok(Self { entries, last_line })
    }

    fn raw(&self, sec: &str, key: &str) -> Option<&(usize, String)> {
        self.entries.get(&(sec.to_string(), key.to_string()))
    }

    fn get<T: FromStr>(&self, sec: &str, key: &str, default: Option<T>) -> Result<(usize, T)> {
        match self.raw(sec, key) {
            Some((line, v)) => v
                .parse::<T>()
                .map(|x| (*line, x))
                .map_err(|_| parse_err(*line, format!("cannot parse `{key}` from `{v}`"))),
            None => default
                .map(|d| (0, d))
                .ok_or_else(|| parse_err(self.last_line, format!("missing required key `{key}` in [{sec}]"))),
        }
    }
}

fn parse_err(line: usize, message: String) -> Error {
    Error::Parse { line, message }
}

fn parse_pairs<A: FromStr, B: FromStr>(line: usize, text: &str, sep: char) -> Result<Vec<(A, B)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (a, b) = item
                .split_once(sep)
                .ok_or_else(|| parse_err(line, format!("expected `x{sep}y`, got `{item}`")))?;
            let a = a.trim().parse().map_err(|_| parse_err(line, format!("bad number in `{item}`")))?;
            let b = b.trim().parse().map_err(|_| parse_err(line, format!("bad number in `{item}`")))?;
            Ok((a, b))
        })
        .collect()
}

fn check(ok: bool, line: usize, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(parse_err(line, message.to_string()))
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let t = Table::parse(text)?;

    let (l, alpha) = t.get::<f64>("problem", "alpha", None)?;
    check(alpha > 0.0 && alpha <= 1.0, l, "alpha out of (0,1]")?;
    let (l, q) = t.get("problem", "q", Some(0.25))?;
    check(q > 0.0 && q < 1.0, l, "q out of (0,1)")?;
    let (l, p) = t.get("problem", "p", Some(2.0))?;
    check(p > 1.0 && f64::is_finite(p), l, "p out of (1,inf)")?;
    let (l, horizon) = t.get::<f64>("problem", "a", None)?;
    check(horizon > 0.0 && horizon.is_finite(), l, "a must be positive")?;
    let (l, modes) = t.get::<usize>("problem", "N", None)?;
    check(modes >= 1, l, "N must be at least 1")?;
    let (l, steps) = t.get::<usize>("problem", "M", None)?;
    check(steps >= 2, l, "M must be at least 2")?;

    let mode_pairs = |key: &str, required: bool| -> Result<Vec<(usize, f64)>> {
        match t.raw("problem", key) {
            Some((line, v)) => {
                let pairs: Vec<(usize, f64)> = parse_pairs(*line, v, ':')?;
                for &(n, c) in &pairs {
                    check(n >= 1 && n <= modes, *line, &format!("{key}: mode {n} outside 1..={modes}"))?;
                    check(c.is_finite(), *line, &format!("{key}: coefficient must be finite"))?;
                }
                Ok(pairs)
            }
            None if required => Err(parse_err(t.last_line, format!("missing required key `{key}` in [problem]"))),
            None => Ok(Vec::new()),
        }
    };
    let u0 = mode_pairs("u0", true)?;
    let v0 = mode_pairs("v0", false)?;

    let nonlocal: Vec<(f64, f64)> = match t.raw("problem", "nonlocal") {
        Some((line, v)) if v != "none" => {
            let terms: Vec<(f64, f64)> = parse_pairs(*line, v, '@')?;
            let mut last = 0.0;
            for &(c, time) in &terms {
                check(c > 0.0, *line, "nonlocal weights must be positive")?;
                check(time > last && time < horizon, *line, "nonlocal times must increase inside (0, a)")?;
                last = time;
            }
            terms
        }
        _ => Vec::new(),
    };

    let (l, nl_name) = t.get::<String>("problem", "nonlinearity", Some("zero".into()))?;
    let nonlinearity = match nl_name.as_str() {
        "zero" => NonlinearityKind::Zero,
        "sin_dx" => NonlinearityKind::SinDx,
        other => return Err(parse_err(l, format!("unknown nonlinearity `{other}` (zero, sin_dx)"))),
    };
    let (l, f_gain) = t.get("problem", "f_gain", Some(0.1))?;
    check(f64::is_finite(f_gain), l, "f_gain must be finite")?;
    let (l, f_order) = t.get("problem", "f_order", Some(1usize))?;
    check((1..=2).contains(&f_order), l, "f_order out of 1..=2")?;
    let (_, controls) = t.get("problem", "k", Some(0usize))?;
    let (l, control_modes) = t.get("problem", "control_modes", Some(4.min(modes)))?;
    check(control_modes >= 1 && control_modes <= modes, l, "control_modes out of 1..=N")?;
    let (l, radius) = t.get("problem", "radius", Some(1.0))?;
    check(radius > 0.0 && f64::is_finite(radius), l, "radius must be positive")?;
    let (l, quad_nodes) = t.get("problem", "quad_nodes", Some(DEFAULT_QUAD_NODES))?;
    check(quad_nodes >= crate::specfun::MIN_QUAD_NODES, l, "quad_nodes below 16")?;

    let (l, mode_name) = t.get::<String>("solver", "mode", Some("solve".into()))?;
    let mode = mode_name.parse::<Mode>().map_err(|m| parse_err(l, m))?;
    let (l, tol) = t.get("solver", "tol", Some(1e-8))?;
    check(tol > 0.0, l, "tol must be positive")?;
    let (l, max_iter) = t.get("solver", "max_iter", Some(200usize))?;
    check(max_iter >= 1, l, "max_iter must be at least 1")?;
    let (l, scheme_name) = t.get::<String>("solver", "scheme", Some("resolved".into()))?;
    let scheme = match scheme_name.as_str() {
        "resolved" => PicardScheme::NonlocalResolved,
        "direct" => PicardScheme::Direct,
        other => return Err(parse_err(l, format!("unknown scheme `{other}` (resolved, direct)"))),
    };

    let (l, state_weight) = t.get("cost", "state_weight", Some(1.0))?;
    check(state_weight >= 0.0, l, "state_weight must be nonnegative")?;
    let (l, control_weight) = t.get("cost", "control_weight", Some(1.0))?;
    check(control_weight >= 0.0, l, "control_weight must be nonnegative")?;
    check(state_weight + control_weight > 0.0, l, "cost weights must not both be zero")?;
    let (_, opt_max_iter) = t.get("cost", "max_iter", Some(500usize))?;
    let (l, grad_tol) = t.get("cost", "grad_tol", Some(1e-6))?;
    check(grad_tol > 0.0, l, "grad_tol must be positive")?;
    let (l, fd_step) = t.get("cost", "fd_step", Some(1e-4))?;
    check(fd_step > 0.0, l, "fd_step must be positive")?;
    let (_, baseline_samples) = t.get("cost", "baseline_samples", Some(100usize))?;

    let (_, dir) = t.get::<String>("output", "dir", Some("out".into()))?;
    let (_, seed) = t.get("output", "seed", Some(0u64))?;

    let cfg = RunConfig {
        mode,
        alpha,
        q,
        p,
        horizon,
        modes,
        steps,
        u0,
        v0,
        nonlocal,
        nonlinearity,
        f_gain,
        f_order,
        controls,
        control_modes,
        radius,
        quad_nodes,
        tol,
        max_iter,
        scheme,
        state_weight,
        control_weight,
        opt_max_iter,
        grad_tol,
        fd_step,
        baseline_samples,
        out_dir: PathBuf::from(dir),
        seed,
    };
    if cfg.mode == Mode::Optimize {
        check(cfg.controls >= 1, t.last_line, "optimize mode needs k >= 1")?;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[problem]\nalpha = 0.8\na = 1\nN = 8\nM = 64\nu0 = 1:1.0\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.mode, Mode::Solve);
        assert_eq!(c.q, 0.25);
        assert_eq!(c.p, 2.0);
        assert_eq!(c.tol, 1e-8);
        assert_eq!(c.nonlinearity, NonlinearityKind::Zero);
        assert_eq!(c.scheme, PicardScheme::NonlocalResolved);
        assert_eq!(c.control_modes, 4);
        assert_eq!(c.u0, vec![(1, 1.0)]);
        assert!(c.problem_spec().is_ok());
    }

    #[test]
    fn alpha_out_of_range() {
        let err = parse_config(&MINIMAL.replace("alpha = 0.8", "alpha = 1.5")).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("alpha out of (0,1]"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_and_missing_keys() {
        let e = parse_config(&format!("{MINIMAL}beta = 2\n")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 7, .. }), "{e:?}");
        let e = parse_config("[problem]\nalpha = 0.5\n").unwrap_err();
        assert!(e.to_string().contains("missing required key `a`"));
        let e = parse_config(&format!("{MINIMAL}[extras]\n")).unwrap_err();
        assert!(e.to_string().contains("unknown section"));
        let e = parse_config(&MINIMAL.replace("1:1.0", "9:1.0")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 6, .. }));
    }

    #[test]
    fn reference_parameters() {
        let text = format!(
            "{MINIMAL}q = 0.25\np = 2\nk = 2\nnonlocal = \"0.3@0.5\"\nnonlinearity = sin_dx\n[solver]\nmode = optimize\n"
        );
        let c = parse_config(&text).unwrap();
        assert_eq!(c.nonlocal, vec![(0.3, 0.5)]);
        let spec = c.problem_spec().unwrap();
        let report = crate::optctrl::hypothesis_check(&spec, 20, 0).unwrap();
        assert!(report.passed());
    }
}
