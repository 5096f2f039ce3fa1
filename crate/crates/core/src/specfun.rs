//! Special functions behind the subordination formulas.
//!
//! The Mainardi density `ζ_α` is the probability density on `(0, ∞)` whose
//! Laplace transform is the Mittag-Leffler function `E_α(-x)`. It is
//! evaluated from two independent representations:
//!
//! * the Wright-type series for `ϖ_α(σ)`, mapped through
//!   `ζ_α(θ) = α⁻¹ θ^{-1-1/α} ϖ_α(θ^{-1/α})`. It is exact but suffers
//!   catastrophic cancellation once `θ` is moderately large (especially for
//!   `α` close to one);
//! * the Kanter integral
//!   `ζ_α(θ) = θ^{α/(1-α)} / ((1-α)π) ∫₀^π A(φ) exp(-A(φ) θ^{1/(1-α)}) dφ`
//!   with `A(φ) = sin(αφ)^{α/(1-α)} sin((1-α)φ) / sin(φ)^{1/(1-α)}`, whose
//!   integrand is nonnegative and therefore cancellation-free.
//!
//! [`mainardi_density`] uses the series while its rounding estimate stays
//! below the requested tolerance and switches to the integral otherwise.

use std::f64::consts::PI;

use statrs::function::gamma as sgamma;

use crate::error::{Error, Result};
use crate::quad::{self, AdaptiveTol};

/// Maximum number of series terms before giving up.
pub const SERIES_TERM_CAP: usize = 500;

/// Fractional order `α`, fractional-power exponent `q` and integrability
/// exponent `p` of a problem instance.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FracOrder {
    pub alpha: f64,
    pub q: f64,
    pub p: f64,
}

impl FracOrder {
    pub fn new(alpha: f64, q: f64, p: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::domain(format!("alpha out of (0,1]: {alpha}")));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!("q out of (0,1): {q}")));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::domain(format!("p out of (1,inf): {p}")));
        }
        Ok(Self { alpha, q, p })
    }

    /// `αq`, which must stay below one for the uncontrolled existence result.
    pub fn alpha_q(&self) -> f64 {
        self.alpha * self.q
    }

    /// `pα(1-q)`, which must exceed one once controls are present.
    pub fn p_alpha_one_minus_q(&self) -> f64 {
        self.p * self.alpha * (1.0 - self.q)
    }

    pub fn check_solver(&self) -> Result<()> {
        if self.alpha_q() < 1.0 {
            Ok(())
        } else {
            Err(Error::RejectedInstance(format!("alpha*q = {} is not < 1", self.alpha_q())))
        }
    }

    pub fn check_controls(&self) -> Result<()> {
        if self.p_alpha_one_minus_q() > 1.0 {
            Ok(())
        } else {
            Err(Error::RejectedInstance(format!(
                "p*alpha*(1-q) = {} is not > 1",
                self.p_alpha_one_minus_q()
            )))
        }
    }
}

/// `Γ(x)` for positive `x`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("gamma requires x > 0, got {x}")));
    }
    Ok(sgamma::gamma(x))
}

pub(crate) fn ln_gamma(x: f64) -> f64 {
    sgamma::ln_gamma(x)
}

pub(crate) fn check_density_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "Mainardi density needs 0 < alpha < 1 (alpha = 1 is a point mass), got {alpha}"
        )))
    }
}

/// Result of a truncated series with its rounding diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct SeriesSum {
    pub value: f64,
    pub terms: usize,
    /// Sum of absolute values of the terms; `ε · abs_sum` bounds rounding.
    pub abs_sum: f64,
}

impl SeriesSum {
    pub fn rounding_estimate(&self) -> f64 {
        4.0 * f64::EPSILON * self.abs_sum
    }
}

/// Sums `term(n)` for `n = first, first+1, ...` until three consecutive
/// terms fall below `threshold`, capped at [`SERIES_TERM_CAP`] terms.
fn sum_series(first: usize, threshold: f64, term: impl Fn(usize) -> f64) -> Result<SeriesSum> {
    let mut value = 0.0;
    let mut abs_sum = 0.0;
    let mut quiet = 0;
    let mut last = f64::NAN;
    for (count, n) in (first..first + SERIES_TERM_CAP).enumerate() {
        let t = term(n);
        if !t.is_finite() {
            return Err(Error::SeriesNonConvergence {
                terms: count + 1,
                partial_sum: value,
                last_term: t,
            });
        }
        value += t;
        abs_sum += t.abs();
        last = t;
        if t.abs() < threshold {
            quiet += 1;
            if quiet == 3 {
                return Ok(SeriesSum { value, terms: count + 1, abs_sum });
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::SeriesNonConvergence {
        terms: SERIES_TERM_CAP,
        partial_sum: value,
        last_term: last,
    })
}

/// The Wright-type function
/// `ϖ_α(σ) = π⁻¹ Σ_{n≥1} (-1)^{n-1} σ^{-αn-1} Γ(nα+1)/n! sin(nπα)`,
/// summed until three consecutive terms drop below `tol / 10`.
pub fn wright_omega(alpha: f64, sigma: f64, tol: f64) -> Result<SeriesSum> {
    check_density_order(alpha)?;
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!("wright_omega requires sigma > 0, got {sigma}")));
    }
    let ln_sigma = sigma.ln();
    sum_series(1, tol / 10.0, |n| omega_term(alpha, n, ln_sigma, 0.0))
}

// n-th term of ϖ_α(σ), optionally multiplied by exp(ln_scale).
fn omega_term(alpha: f64, n: usize, ln_sigma: f64, ln_scale: f64) -> f64 {
    let nf = n as f64;
    let s = (nf * PI * alpha).sin();
    if s == 0.0 {
        return 0.0;
    }
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 } * s.signum();
    let ln_mag = (-alpha * nf - 1.0) * ln_sigma + ln_gamma(nf * alpha + 1.0) - ln_gamma(nf + 1.0)
        + s.abs().ln()
        - PI.ln()
        + ln_scale;
    sign * ln_mag.exp()
}

/// `ζ_α(θ)` from the `ϖ_α` series. Fails with an evaluation error when the
/// rounding estimate of the alternating sum exceeds `tol`.
pub fn mainardi_density_series(alpha: f64, theta: f64, tol: f64) -> Result<f64> {
    check_density_order(alpha)?;
    check_theta(theta)?;
    let sigma_ln = -theta.ln() / alpha;
    // prefactor α⁻¹ θ^{-1-1/α}, folded into each term in log space
    let ln_pref = -alpha.ln() + (-1.0 - 1.0 / alpha) * theta.ln();
    let sum = sum_series(1, tol / 10.0, |n| omega_term(alpha, n, sigma_ln, ln_pref))?;
    if sum.rounding_estimate() > tol {
        return Err(Error::Evaluation(format!(
            "series cancellation at alpha={alpha}, theta={theta}: rounding {:e} > tol {tol:e}",
            sum.rounding_estimate()
        )));
    }
    Ok(sum.value)
}

fn kanter_ln_a(alpha: f64, phi: f64) -> f64 {
    let beta = 1.0 - alpha;
    (alpha / beta) * (alpha * phi).sin().ln() + (beta * phi).sin().ln() - (1.0 / beta) * phi.sin().ln()
}

/// `ζ_α(θ)` from the Kanter integral representation, accurate to `tol`
/// absolutely.
pub fn mainardi_density_integral(alpha: f64, theta: f64, tol: f64) -> Result<f64> {
    check_density_order(alpha)?;
    check_theta(theta)?;
    let beta = 1.0 - alpha;
    let scale = theta.powf(1.0 / beta);
    let pref = theta.powf(alpha / beta) / (beta * PI);
    if pref == 0.0 {
        return Ok(0.0);
    }
    let integrand = |phi: f64| {
        let a = kanter_ln_a(alpha, phi).exp();
        let e = a * scale;
        if !e.is_finite() || e > 745.0 {
            0.0
        } else {
            a * (-e).exp()
        }
    };
    // The integrand peaks where A(φ) = 1/scale; A increases on (0, π).
    let mut breaks = vec![0.0, PI];
    let target = -scale.ln();
    if kanter_ln_a(alpha, 1e-9) < target {
        let (mut lo, mut hi) = (1e-9, PI - 1e-12);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if kanter_ln_a(alpha, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let peak = 0.5 * (lo + hi);
        if peak > 1e-6 && peak < PI - 1e-6 {
            breaks.insert(1, peak);
        }
    }
    let integral = quad::integrate_adaptive(
        integrand,
        &breaks,
        AdaptiveTol {
            abs: 0.25 * tol / pref,
            rel: 1e-14,
            max_segments: 4000,
        },
    )?;
    Ok(pref * integral)
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("theta must be positive and finite, got {theta}")))
    }
}

/// The Mainardi probability density `ζ_α(θ)`, `0 < α < 1`, with absolute
/// error at most `tol`.
pub fn mainardi_density(alpha: f64, theta: f64, tol: f64) -> Result<f64> {
    check_density_order(alpha)?;
    check_theta(theta)?;
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let value = match mainardi_density_series(alpha, theta, tol) {
        Ok(v) => v,
        Err(Error::Domain(m)) => return Err(Error::Domain(m)),
        Err(_) => mainardi_density_integral(alpha, theta, tol)?,
    };
    Ok(value.max(0.0))
}

/// Largest `θ` (searched in `[1e-2, 50]`) at which the series representation
/// is still within `tol`. The two representations overlap on `(0, θ*]`.
pub fn series_switch_point(alpha: f64, tol: f64) -> Result<f64> {
    check_density_order(alpha)?;
    let ok = |theta: f64| mainardi_density_series(alpha, theta, tol).is_ok();
    let (mut lo, mut hi) = (1e-2, 50.0);
    if !ok(lo) {
        return Err(Error::Evaluation(format!("series unusable even at theta={lo} for alpha={alpha}")));
    }
    if ok(hi) {
        return Ok(hi);
    }
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Closed-form moment `∫₀^∞ θ^v ζ_α(θ) dθ = Γ(1+v)/Γ(1+αv)` for `v ∈ [0,1]`.
pub fn mainardi_moment(alpha: f64, v: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("alpha out of (0,1]: {alpha}")));
    }
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::domain(format!("moment order v must lie in [0,1], got {v}")));
    }
    Ok(gamma(1.0 + v)? / gamma(1.0 + alpha * v)?)
}

/// Two-parameter Mittag-Leffler function `E_{α,β}(z)` for `z ≤ 0`.
///
/// The power series is used while its cancellation estimate stays below
/// `1e-11` relative; otherwise the Gorenflo-Loutchko-Luchko integral
/// `E_{α,β}(z) = ∫₀^∞ K(α,β,χ,z) dχ` (valid for `z < 0`, `β < 1 + α`,
/// `α < 1`) is integrated adaptively.
pub fn mittag_leffler(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("alpha out of (0,1]: {alpha}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!("beta must be positive, got {beta}")));
    }
    if !(z <= 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("only z <= 0 is supported, got {z}")));
    }
    if z == 0.0 {
        return Ok(1.0 / gamma(beta)?);
    }
    if alpha == 1.0 && beta == 1.0 {
        return Ok(z.exp());
    }
    let series = ml_series(alpha, beta, z);
    match series {
        Ok(s) if s.rounding_estimate() <= 1e-11 * s.value.abs() => return Ok(s.value),
        _ => {}
    }
    if alpha < 1.0 && beta < 1.0 + alpha {
        return ml_integral(alpha, beta, z);
    }
    match series {
        Ok(s) => Err(Error::SeriesNonConvergence {
            terms: s.terms,
            partial_sum: s.value,
            last_term: f64::NAN,
        }),
        Err(e) => Err(e),
    }
}

fn ml_series(alpha: f64, beta: f64, z: f64) -> Result<SeriesSum> {
    let ln_abs_z = z.abs().ln();
    let lead = 1.0 / sgamma::gamma(beta);
    // terms relative to the leading term; stop once well below 1e-17 of it
    let threshold = 1e-17 * lead.abs().max(1e-300);
    sum_series(0, threshold, |k| {
        let kf = k as f64;
        let arg = alpha * kf + beta;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * (kf * ln_abs_z - ln_gamma(arg)).exp()
    })
}

fn ml_integral(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    let exponent = (1.0 - beta) / alpha;
    let s1 = (PI * (1.0 - beta)).sin();
    let s2 = (PI * (1.0 - beta + alpha)).sin();
    let c = (PI * alpha).cos();
    let kernel = |chi: f64| -> f64 {
        if chi <= 0.0 {
            return 0.0;
        }
        let decay = (-chi.powf(1.0 / alpha)).exp();
        if decay == 0.0 {
            return 0.0;
        }
        let num = chi * s1 - z * s2;
        let den = chi * chi - 2.0 * chi * z * c + z * z;
        chi.powf(exponent) * decay * num / den / (alpha * PI)
    };
    // χ = u^m removes the integrable singularity χ^{exponent} when exponent < 0
    let m = if exponent < 0.0 { 1.0 / (1.0 + exponent) } else { 1.0 };
    let chi_max = 700f64.powf(alpha);
    let mut chi_breaks = vec![0.0, chi_max];
    for b in [z.abs(), 1.0, 0.5 * chi_max] {
        if b > 0.0 && b < chi_max {
            chi_breaks.push(b);
        }
    }
    chi_breaks.sort_by(f64::total_cmp);
    chi_breaks.dedup();
    let breaks: Vec<f64> = chi_breaks.iter().map(|&b| b.powf(1.0 / m)).collect();
    let integrand = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let chi = u.powf(m);
        kernel(chi) * m * u.powf(m - 1.0)
    };
    quad::integrate_adaptive(
        integrand,
        &breaks,
        AdaptiveTol {
            abs: 1e-300,
            rel: 1e-14,
            max_segments: 4000,
        },
    )
}

/// Nodes and weights for integrals `∫₀^∞ g(θ) ζ_α(θ) dθ ≈ Σ w_m ζ_α(θ_m) g(θ_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `ζ_α` at each node, evaluated once at construction.
    pub density: Vec<f64>,
}

/// Required normalization accuracy of a quadrature rule.
pub const NORMALIZATION_TOL: f64 = 1e-8;
/// Required first-moment accuracy of a quadrature rule.
pub const FIRST_MOMENT_TOL: f64 = 1e-6;
/// Smallest accepted node budget.
pub const MIN_QUAD_NODES: usize = 16;

const DENSITY_TOL: f64 = 1e-14;
const PANEL_POINTS: usize = 20;

impl QuadratureRule {
    /// `Σ w_m ζ_α(θ_m) g(θ_m)`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.density)
            .map(|((&t, &w), &d)| w * d * g(t))
            .sum()
    }

    pub fn normalization_defect(&self) -> f64 {
        (self.integrate(|_| 1.0) - 1.0).abs()
    }

    /// Quadrature value of `∫ θ^v ζ_α`.
    pub fn moment(&self, v: f64) -> f64 {
        self.integrate(|t| t.powf(v))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Point beyond which `ζ_α` is below `1e-20`; the tail is dropped there.
fn truncation_point(alpha: f64) -> Result<f64> {
    let small = |t: f64| -> Result<bool> { Ok(mainardi_density(alpha, t, 1e-22)? < 1e-20) };
    let mut hi = 2.0;
    while !small(hi)? {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::Evaluation(format!("density tail of alpha={alpha} does not decay")));
        }
    }
    let mut lo = hi / 2.0;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if small(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Exponent of the substitution `θ = θ_max s^k` used by [`theta_quadrature`].
/// With `k = 4`, `θ^v dθ` becomes a polynomial in `s` for every quarter
/// integer `v`, so fractional moments stay smooth at the origin.
const GRADING_POWER: i32 = 4;

/// Panel edges in `s` that equidistribute an even mix of arc length and
/// probability mass, so the density peak gets its own panels as it sharpens
/// toward `θ = 1` for `α → 1`.
fn panel_edges(alpha: f64, theta_max: f64, panels: usize) -> Result<Vec<f64>> {
    const SAMPLES: usize = 400;
    let k = GRADING_POWER as f64;
    let mut mass = Vec::with_capacity(SAMPLES);
    for i in 0..SAMPLES {
        let s = (i as f64 + 0.5) / SAMPLES as f64;
        let theta = theta_max * s.powi(GRADING_POWER);
        let jac = theta_max * k * s.powi(GRADING_POWER - 1);
        mass.push(mainardi_density(alpha, theta, 1e-10)? * jac / SAMPLES as f64);
    }
    let total: f64 = mass.iter().sum();
    // cumulative mixed measure at the sample boundaries i/SAMPLES
    let mut cdf = vec![0.0; SAMPLES + 1];
    for i in 0..SAMPLES {
        cdf[i + 1] = cdf[i] + 0.5 / SAMPLES as f64 + 0.5 * mass[i] / total;
    }
    let mut edges = vec![0.0; panels + 1];
    let mut j = 0;
    for (p, edge) in edges.iter_mut().enumerate().take(panels).skip(1) {
        let target = p as f64 / panels as f64;
        while cdf[j + 1] < target {
            j += 1;
        }
        let frac = (target - cdf[j]) / (cdf[j + 1] - cdf[j]);
        *edge = (j as f64 + frac) / SAMPLES as f64;
    }
    edges[panels] = 1.0;
    Ok(edges)
}

/// Builds a rule for `∫₀^∞ g ζ_α dθ`: the tail past `θ_max` (where the
/// density drops below `1e-20`) is discarded, `[0, θ_max]` is mapped to
/// `s ∈ [0, 1]` by `θ = θ_max s⁴`, and `s` is covered by composite
/// Gauss-Legendre panels of about 20 points each, placed by
/// [`panel_edges`].
pub fn theta_quadrature(alpha: f64, node_count: usize) -> Result<QuadratureRule> {
    check_density_order(alpha)?;
    if node_count == 0 {
        return Err(Error::domain("node_count must be positive"));
    }
    let theta_max = truncation_point(alpha)?;
    let panels = node_count.div_ceil(PANEL_POINTS);
    let base = node_count / panels;
    let extra = node_count % panels;
    let edges = panel_edges(alpha, theta_max, panels)?;
    let k = GRADING_POWER as f64;
    let mut nodes = Vec::with_capacity(node_count);
    let mut weights = Vec::with_capacity(node_count);
    let small_rule = quad::gauss_legendre(base)?;
    let large_rule = if extra > 0 { Some(quad::gauss_legendre(base + 1)?) } else { None };
    for panel in 0..panels {
        let rule = if panel < extra {
            large_rule.as_ref().expect("present when extra > 0")
        } else {
            &small_rule
        };
        let left = edges[panel];
        let width = edges[panel + 1] - left;
        for &(x, w) in rule {
            let s = left + 0.5 * width * (x + 1.0);
            nodes.push(theta_max * s.powi(GRADING_POWER));
            weights.push(0.5 * width * w * theta_max * k * s.powi(GRADING_POWER - 1));
        }
    }
    let density = nodes
        .iter()
        .map(|&t| mainardi_density(alpha, t, DENSITY_TOL))
        .collect::<Result<Vec<_>>>()?;
    let rule = QuadratureRule { alpha, nodes, weights, density };

    let defect = rule.normalization_defect();
    let moment_defect = (rule.moment(1.0) - mainardi_moment(alpha, 1.0)?).abs();
    if node_count < MIN_QUAD_NODES || defect > NORMALIZATION_TOL {
        return Err(Error::QuadratureConstruction {
            node_count,
            achieved_defect: defect,
            required: NORMALIZATION_TOL,
        });
    }
    if moment_defect > FIRST_MOMENT_TOL {
        return Err(Error::QuadratureConstruction {
            node_count,
            achieved_defect: moment_defect,
            required: FIRST_MOMENT_TOL,
        });
    }
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_trivial_values() {
        assert_relative_eq!(gamma(1.0).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(gamma(5.0).unwrap(), 24.0, max_relative = 1e-12);
        assert!(matches!(gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma(-1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_half_matches_integral() {
        // ∫₀^∞ t^{-1/2} e^{-t} dt with t = s², i.e. 2∫₀^∞ e^{-s²} ds, by a
        // fine midpoint sum on [0, 10].
        let n = 200_000;
        let h = 10.0 / n as f64;
        let oracle: f64 = (0..n)
            .map(|i| {
                let s = (i as f64 + 0.5) * h;
                2.0 * (-s * s).exp() * h
            })
            .sum();
        assert!((gamma(0.5).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn frac_order_checks() {
        assert!(FracOrder::new(1.5, 0.25, 2.0).is_err());
        assert!(FracOrder::new(0.8, 1.0, 2.0).is_err());
        assert!(FracOrder::new(0.8, 0.25, 1.0).is_err());
        let o = FracOrder::new(0.9, 0.9, 1.1).unwrap();
        assert!(o.check_solver().is_ok());
        assert!(o.check_controls().is_err());
    }

    #[test]
    fn density_half_is_gaussian() {
        let v = mainardi_density(0.5, 1.0, 1e-12).unwrap();
        let exact = (-0.25f64).exp() / PI.sqrt();
        assert!((v - exact).abs() < 1e-8);
        // same value from the literal ϖ series summed to convergence
        let sigma = 1.0f64; // θ^{-1/α} at θ = 1
        let omega = wright_omega(0.5, sigma, 1e-14).unwrap().value;
        assert!((omega / 0.5 - exact).abs() < 1e-10);
    }

    #[test]
    fn density_matches_high_precision_values() {
        // 200-digit series sums (mpmath), including points where the
        // double-precision series is useless.
        let cases = [
            (0.3, 0.05, 0.747_976_871_930_648_6),
            (0.3, 6.0, 0.001_785_891_928_444_776_7),
            (0.6, 4.0, 0.002_054_362_698_080_631_8),
            (0.6, 6.0, 6.606_315_819_723_388e-8),
            (0.8, 1.5, 0.655_428_354_175_105_3),
            (0.8, 2.5, 0.000_850_177_420_495_310_7),
            (0.9, 1.0, 1.008_146_745_621_271_2),
            (0.9, 1.5, 0.455_752_510_570_637_76),
        ];
        for (alpha, theta, expected) in cases {
            let v = mainardi_density(alpha, theta, 1e-13).unwrap();
            assert!((v - expected).abs() < 1e-11, "alpha={alpha} theta={theta}: {v} vs {expected}");
        }
    }

    #[test]
    fn density_rejects_bad_input() {
        assert!(matches!(mainardi_density(0.5, 0.0, 1e-10), Err(Error::Domain(_))));
        assert!(matches!(mainardi_density(1.0, 1.0, 1e-10), Err(Error::Domain(_))));
    }

    #[test]
    fn series_reports_cancellation() {
        // α = 0.9, θ = 4: terms peak far above the answer
        let e = mainardi_density_series(0.9, 4.0, 1e-10).unwrap_err();
        assert!(matches!(e, Error::Evaluation(_) | Error::SeriesNonConvergence { .. }));
    }

    #[test]
    fn series_nonconvergence_carries_partial_sum() {
        match wright_omega(0.9, 1e-3, 1e-12) {
            Err(Error::SeriesNonConvergence { terms, partial_sum, .. }) => {
                assert!(terms <= SERIES_TERM_CAP);
                assert!(partial_sum.is_finite());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn moments_closed_form() {
        assert_eq!(mainardi_moment(0.7, 0.0).unwrap(), 1.0);
        assert_relative_eq!(
            mainardi_moment(0.8, 1.0).unwrap(),
            1.0 / gamma(1.8).unwrap(),
            max_relative = 1e-14
        );
        assert!(mainardi_moment(0.8, 1.5).is_err());
    }

    #[test]
    fn moment_half_against_gaussian_integral() {
        // ∫ θ^{1/2} e^{-θ²/4}/√π dθ by a fine midpoint sum
        let n = 400_000;
        let h = 20.0 / n as f64;
        let oracle: f64 = (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                t.sqrt() * (-t * t / 4.0).exp() / PI.sqrt() * h
            })
            .sum();
        let closed = mainardi_moment(0.5, 0.5).unwrap();
        assert!((closed - gamma(1.5).unwrap() / gamma(1.25).unwrap()).abs() < 1e-14);
        assert!((closed - oracle).abs() < 1e-6);
    }

    #[test]
    fn mittag_leffler_trivial() {
        assert!((mittag_leffler(1.0, 1.0, -1.0).unwrap() - (-1f64).exp()).abs() < 1e-10);
        assert!((mittag_leffler(0.8, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(mittag_leffler(0.8, 1.0, 0.5).is_err());
    }

    #[test]
    fn mittag_leffler_reference_values() {
        // mpmath, 300-digit series
        let cases = [
            (0.8, 1.0, -0.5, 0.603_023_715_862_803_7),
            (0.8, 0.8, -0.5, 0.457_931_498_101_114_4),
            (0.5, 1.0, -1.0, 0.427_583_576_155_807),
            (0.5, 1.0, -5.0, 0.110_704_637_733_068_63),
            (0.3, 1.0, -5.0, 0.137_080_869_020_270_64),
            (0.9, 0.9, -3.0, 0.044_151_271_783_037_73),
            (0.3, 0.3, -5.0, 0.007_275_100_803_154_912),
            (0.6, 1.2, -2.0, 0.303_355_214_375_178_9),
            (0.95, 1.0, -10.0, 0.006_507_135_312_256_063),
        ];
        for (a, b, z, expected) in cases {
            let v = mittag_leffler(a, b, z).unwrap();
            assert!(((v - expected) / expected).abs() < 1e-10, "E_{{{a},{b}}}({z}) = {v}, want {expected}");
        }
    }

    #[test]
    fn mittag_leffler_half_is_erfc() {
        for x in [0.1, 0.7, 2.0, 4.0] {
            let v = mittag_leffler(0.5, 1.0, -x).unwrap();
            let e = (x * x).exp() * statrs::function::erf::erfc(x);
            assert!(((v - e) / e).abs() < 1e-10, "x={x}: {v} vs {e}");
        }
    }

    #[test]
    fn quadrature_rule_budget() {
        let rule = theta_quadrature(0.8, 200).unwrap();
        assert_eq!(rule.len(), 200);
        assert!(rule.normalization_defect() <= NORMALIZATION_TOL);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(rule.nodes[0] > 0.0);
        match theta_quadrature(0.8, 8) {
            Err(Error::QuadratureConstruction { node_count, .. }) => assert_eq!(node_count, 8),
            other => panic!("expected construction error, got {other:?}"),
        }
    }

    #[test]
    fn quadrature_first_moment_half() {
        let rule = theta_quadrature(0.5, 200).unwrap();
        assert!((rule.moment(1.0) - 1.0 / gamma(1.5).unwrap()).abs() < 1e-6);
    }
}
