//! Extinction probabilities and survival conditions.
//!
//! Two independent routes are provided for every model:
//!
//! * closed-form expressions (`psi_no_dispersion`, `psi_optimal`,
//!   `psi_independent`, `psi_uniform`) together with the inequality that
//!   characterizes survival for each of them;
//! * the smallest fixed point of the offspring PGF ([`smallest_fixed_point`]),
//!   applied to an offspring law assembled without the closed forms.
//!
//! The fixed-point route is the reference: tests compare the closed forms
//! against it.

use serde::{Deserialize, Serialize};

use crate::distributions::{offspring_pmf, offspring_pmf_series_oracle};
use crate::error::{Error, Result};
use crate::model::{
    clamp_psi, Degree, DispersionScheme, ExtinctionResult, Method, ModelParams, OffspringPmf, Provenance, CLAMP_BAND,
    PMF_SUM_TOL,
};

/// Successive fixed-point iterates closer than this end the iteration.
pub const FIXED_POINT_STEP_TOL: f64 = 1e-13;
pub const FIXED_POINT_MAX_ITER: usize = 100_000;
/// Mean offspring within this distance of 1 goes straight to bisection.
pub const NEAR_CRITICAL_BAND: f64 = 1e-6;
/// Truncation tolerance used when the numeric route builds its own PMF.
pub const SERIES_TOL: f64 = 1e-13;

/// `sum_y y P(Y = y)`.
pub fn pgf_mean(pmf: &OffspringPmf) -> f64 {
    pmf.mean()
}

fn residual(pmf: &OffspringPmf, psi: f64) -> f64 {
    (pmf.pgf(psi) - psi).abs()
}

fn is_degenerate(pmf: &OffspringPmf) -> bool {
    pmf.probs().get(1).is_some_and(|&p1| (p1 - 1.0).abs() <= f64::EPSILON)
}

/// Extinction probability of a Galton-Watson process with offspring law
/// `pmf`, started from one individual.
///
/// Laws with at most three offspring are solved exactly: `g(s) - s`
/// factors as `(s - 1)(p3 s^2 + (p2 + p3) s - p0)` and the smallest
/// nonnegative root of the quadratic is taken. Larger laws go through
/// [`smallest_fixed_point`].
pub fn extinction_from_pmf(pmf: &OffspringPmf) -> ExtinctionResult {
    if is_degenerate(pmf) {
        return ExtinctionResult::degenerate(Method::NumericRoot);
    }
    let probs = pmf.probs();
    let support = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    if support > 3 {
        return smallest_fixed_point(pmf);
    }
    let coef = |k: usize| probs.get(k).copied().unwrap_or(0.0);
    let (p0, p2, p3) = (coef(0), coef(2), coef(3));
    let psi = if pmf.mean() <= 1.0 {
        1.0
    } else {
        // Root of p3 s^2 + (p2 + p3) s - p0 in the cancellation-free form;
        // reduces to p0 / p2 when p3 = 0.
        let b = p2 + p3;
        2.0 * p0 / (b + (b * b + 4.0 * p0 * p3).sqrt())
    };
    let psi = clamp_psi(psi);
    ExtinctionResult::new(psi, Method::NumericRoot, residual(pmf, psi))
}

/// `(g(s) - s) / (s - 1)` for a PGF with `g(1) = 1`.
///
/// Its coefficients are tail sums of the PMF, so it is increasing on
/// `[0, 1]` from `-p0` to `mean - 1` and has no double root at 1.
fn deflated_excess(probs: &[f64], s: f64) -> f64 {
    let mut tail = 0.0;
    let mut acc = 0.0;
    // Horner over b_k = sum_{j > k} p_j for k >= 1, then b_0 = -p0.
    for k in (1..probs.len()).rev() {
        acc = acc * s + tail;
        tail += probs[k];
    }
    acc * s - probs[0]
}

fn bisect_deflated(probs: &[f64]) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0 - 1e-15);
    if deflated_excess(probs, hi) <= 0.0 {
        return 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if deflated_excess(probs, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest root of `g(s) = s` on `[0, 1]` by monotone iteration
/// `s <- g(s)` from 0, for any number of offspring.
///
/// Near-critical laws (mean within [`NEAR_CRITICAL_BAND`] of 1) and
/// iterations that do not settle within [`FIXED_POINT_MAX_ITER`] steps
/// switch to bisection.
pub fn smallest_fixed_point(pmf: &OffspringPmf) -> ExtinctionResult {
    if is_degenerate(pmf) {
        return ExtinctionResult::degenerate(Method::NumericRoot);
    }
    let mean = pmf.mean();
    if mean <= 1.0 {
        return ExtinctionResult::new(1.0, Method::NumericRoot, residual(pmf, 1.0));
    }
    let psi = if mean - 1.0 < NEAR_CRITICAL_BAND {
        bisect_deflated(pmf.probs())
    } else {
        let mut s = 0.0;
        let mut settled = false;
        for _ in 0..FIXED_POINT_MAX_ITER {
            let next = pmf.pgf(s);
            let step = next - s;
            s = next;
            if step.abs() < FIXED_POINT_STEP_TOL {
                settled = true;
                break;
            }
        }
        if settled { s } else { bisect_deflated(pmf.probs()) }
    };
    let psi = clamp_psi(psi);
    ExtinctionResult::new(psi, Method::NumericRoot, residual(pmf, psi))
}

/// Offspring law `p_0 = beta`, `p_y = k_y + m_y ln(nu)` for `y = 1, 2, 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFormCoefficients {
    pub beta: f64,
    pub k: [f64; 3],
    pub m: [f64; 3],
    pub nu: f64,
}

impl LogFormCoefficients {
    pub fn new(beta: f64, k: [f64; 3], m: [f64; 3], nu: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::Domain(format!("log argument must be positive, got {nu}")));
        }
        let coeffs = LogFormCoefficients { beta, k, m, nu };
        let probs = coeffs.probs();
        if probs.iter().any(|p| !(-PMF_SUM_TOL..=1.0 + PMF_SUM_TOL).contains(p)) {
            return Err(Error::Domain(format!("coefficients give entries outside [0, 1]: {probs:?}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::Domain(format!("coefficients give a law of total mass {total}")));
        }
        Ok(coeffs)
    }

    /// Uniform-dispersion coefficients for `d` in {2, 3}, with
    /// `nu = 1 / (lambda + 1)`.
    pub fn uniform(d: Degree, params: &ModelParams) -> Result<Self> {
        let (l, p) = (params.lambda(), params.p());
        let beta = params.survivor_law().beta;
        let nu = 1.0 / (l + 1.0);
        let lp1 = l + 1.0;
        let den = l * (l * p + 1.0);
        let (k, m) = match d.get() {
            2 => (
                [-2.0 * p * lp1 / den, p * lp1 * (l + 2.0) / den, 0.0],
                [-2.0 * p * lp1 * lp1 / (l * den), 2.0 * p * lp1 * lp1 / (l * den), 0.0],
            ),
            3 => {
                let den2 = l * den;
                let den3 = l * den2;
                (
                    [
                        3.0 * p * lp1 * (l + 2.0) / den2,
                        -3.0 * p * lp1 * (5.0 * l + 6.0) / den2,
                        p * lp1 * (l * l + 12.0 * l + 12.0) / den2,
                    ],
                    [
                        6.0 * p * lp1 * lp1 / den3,
                        -6.0 * p * lp1 * lp1 * (l + 3.0) / den3,
                        6.0 * p * lp1 * lp1 * (l + 2.0) / den3,
                    ],
                )
            }
            _ => {
                return Err(Error::UnsupportedClosedForm {
                    scheme: DispersionScheme::Uniform(d).to_string(),
                })
            }
        };
        Ok(LogFormCoefficients { beta, k, m, nu })
    }

    /// `ln(nu)`; for `nu = 1/(lambda+1)` this is `-ln_1p(lambda)`.
    fn ln_nu(&self) -> f64 {
        if self.nu < 1.0 {
            -(1.0 / self.nu - 1.0).ln_1p()
        } else {
            self.nu.ln()
        }
    }

    /// `[beta, p_1, p_2, p_3]`, dropping `p_3` when `k_3 = m_3 = 0`.
    pub fn probs(&self) -> Vec<f64> {
        let ln_nu = self.ln_nu();
        let mut probs = vec![self.beta];
        let top = if self.k[2] == 0.0 && self.m[2] == 0.0 { 2 } else { 3 };
        probs.extend((0..top).map(|y| self.k[y] + self.m[y] * ln_nu));
        probs
    }
}

/// Extinction probability from log-form coefficients.
///
/// Survival holds iff the mean exceeds one, that is
/// `(m1 + 2 m2 + 3 m3) ln nu > 1 - k1 - 2 k2 - 3 k3`.
/// The extinction probability is `(-1 + (sqrt(D) - k2 - m2 ln nu) /
/// (k3 + m3 ln nu)) / 2` with
/// `D = (m2+m3)^2 ln^2 nu + 2[(k2+k3)(m2+m3) + 2 beta m3] ln nu
///      + (k2+k3)^2 + 4 beta k3`,
/// or `beta / (k2 + m2 ln nu)` when `p_3 = 0`.
pub fn lemma_log_form(coeffs: &LogFormCoefficients) -> Result<ExtinctionResult> {
    let LogFormCoefficients { beta, k, m, .. } = *coeffs;
    let checked = LogFormCoefficients::new(beta, k, m, coeffs.nu)?;
    let pmf = OffspringPmf::new(
        checked.probs().into_iter().map(|p| p.clamp(0.0, 1.0)).collect(),
        None,
        Provenance::AnalyticClosedForm,
    )?;
    let ln_nu = checked.ln_nu();
    let lhs = (m[0] + 2.0 * m[1] + 3.0 * m[2]) * ln_nu;
    let rhs = 1.0 - k[0] - 2.0 * k[1] - 3.0 * k[2];
    if !(lhs > rhs) {
        return Ok(ExtinctionResult::new(1.0, Method::ClosedForm, residual(&pmf, 1.0)));
    }
    let p3 = k[2] + m[2] * ln_nu;
    let psi = if p3 != 0.0 {
        let (ks, ms) = (k[1] + k[2], m[1] + m[2]);
        let delta = ms * ms * ln_nu * ln_nu + 2.0 * (ks * ms + 2.0 * beta * m[2]) * ln_nu + ks * ks + 4.0 * beta * k[2];
        0.5 * (-1.0 + (delta.sqrt() - k[1] - m[1] * ln_nu) / p3)
    } else {
        beta / (k[1] + m[1] * ln_nu)
    };
    let psi = clamp_psi(psi);
    Ok(ExtinctionResult::new(psi, Method::ClosedForm, residual(&pmf, psi)))
}

/// PGF of the number of unit descents in the single-colony model.
///
/// Starting from a normal (non-catastrophe) state at level `k`, the colony
/// reaches level `k - 1` with probability `u`, the smallest root of
/// `u = (1-c) q + (c q + (1-c) p) u + c p u^2` with `c = lambda/(lambda+1)`:
/// a birth (prob. `c`) forces two descents, the first ending mid-catastrophe;
/// a strike (prob. `1-c`) removes one individual with probability `q`.
/// Starting from one individual, `u` is the extinction probability.
pub fn descent_pgf(params: &ModelParams) -> OffspringPmf {
    let c = params.survivor_law().c;
    let (p, q) = (params.p(), params.q());
    let p0 = (1.0 - c) * q;
    let p2 = c * p;
    let probs = vec![p0, 1.0 - p0 - p2, p2];
    OffspringPmf::new(probs, Some(DispersionScheme::NoDispersion), Provenance::AnalyticClosedForm)
        .expect("descent law is a probability vector")
}

/// Survival margin of the closed-form survival inequality for `scheme`: positive iff
/// the process survives.
///
/// | scheme | margin |
/// |---|---|
/// | none, optimal d=2 | `lambda - (1-p)/p` |
/// | optimal d=3 | `p - (l+1)/(2l^2+2l+1)` |
/// | independent d=2 | `p - (l+2)/(l^2+2l+2)` |
/// | independent d=3 | `p - (l+3)/(2l^2+3l+3)` |
/// | uniform d=2 | `l[l^2 p + (4p-1)l + 2p] / (2(l+1)^2 p) - ln(l+1)` |
/// | uniform d=3 | `3p(l+1)^2/(l^2(lp+1)) [l + 2 - 2(l+1)ln(l+1)/l] - 1` |
pub fn survival_margin(scheme: DispersionScheme, params: &ModelParams) -> Result<f64> {
    let (l, p) = (params.lambda(), params.p());
    let d = match scheme.degree() {
        None => return Ok(l - (1.0 - p) / p),
        Some(d) if d.has_closed_form() => d.get(),
        Some(_) => return Err(Error::UnsupportedClosedForm { scheme: scheme.to_string() }),
    };
    Ok(match (scheme, d) {
        (DispersionScheme::Optimal(_), 2) => l - (1.0 - p) / p,
        (DispersionScheme::Optimal(_), _) => p - (l + 1.0) / (2.0 * l * l + 2.0 * l + 1.0),
        (DispersionScheme::Independent(_), 2) => p - (l + 2.0) / (l * l + 2.0 * l + 2.0),
        (DispersionScheme::Independent(_), _) => p - (l + 3.0) / (2.0 * l * l + 3.0 * l + 3.0),
        (DispersionScheme::Uniform(_), 2) => {
            l * (l * l * p + (4.0 * p - 1.0) * l + 2.0 * p) / (2.0 * (l + 1.0).powi(2) * p) - l.ln_1p()
        }
        (DispersionScheme::Uniform(_), _) => {
            3.0 * p * (l + 1.0).powi(2) / (l * l * (l * p + 1.0)) * uniform3_bracket(l) - 1.0
        }
        (DispersionScheme::NoDispersion, _) => unreachable!(),
    })
}

/// `lambda + 2 - 2 (lambda + 1) ln(lambda + 1) / lambda`, which behaves like
/// `lambda^2 / 3` near 0 and is summed as a series there.
pub(crate) fn uniform3_bracket(l: f64) -> f64 {
    if l < 0.1 {
        // 2 sum_{k>=2} (-l)^k / (k (k+1))
        let mut sum = 0.0;
        let mut pow = l * l;
        for k in 2..60u32 {
            let term = pow / f64::from(k * (k + 1));
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            pow *= -l;
        }
        2.0 * sum
    } else {
        l + 2.0 - 2.0 * (l + 1.0) * l.ln_1p() / l
    }
}

/// Closed-form survival predicate for `scheme`, with the criticality
/// band: margins within [`CLAMP_BAND`] of zero count as extinction.
pub fn survival_condition(scheme: DispersionScheme, params: &ModelParams) -> Result<bool> {
    Ok(survival_margin(scheme, params)? > CLAMP_BAND)
}

fn closed_result(psi: f64, pmf: &OffspringPmf) -> ExtinctionResult {
    let psi = clamp_psi(psi);
    ExtinctionResult::new(psi, Method::ClosedForm, residual(pmf, psi))
}

/// `min{(1-p)/(lambda p), 1}`.
pub fn psi_no_dispersion(params: &ModelParams) -> ExtinctionResult {
    let (l, p) = (params.lambda(), params.p());
    let survives = survival_condition(DispersionScheme::NoDispersion, params).expect("defined for every params");
    let psi = if survives { ((1.0 - p) / (l * p)).min(1.0) } else { 1.0 };
    closed_result(psi, &descent_pgf(params))
}

fn require_closed(scheme: DispersionScheme) -> Result<Degree> {
    match scheme.degree() {
        Some(d) if d.has_closed_form() => Ok(d),
        _ => Err(Error::UnsupportedClosedForm { scheme: scheme.to_string() }),
    }
}

/// Closed-form extinction probability under optimal dispersion, `d` in {2, 3}.
pub fn psi_optimal(d: Degree, params: &ModelParams) -> Result<ExtinctionResult> {
    let scheme = DispersionScheme::Optimal(d);
    require_closed(scheme)?;
    let pmf = offspring_pmf(scheme, params)?;
    if !survival_condition(scheme, params)? {
        return Ok(closed_result(1.0, &pmf));
    }
    let (l, p) = (params.lambda(), params.p());
    let psi = if d.get() == 2 {
        (1.0 - p) / (l * p)
    } else {
        (l + 1.0) / (2.0 * l) * (-1.0 + ((l * p + 4.0 - 3.0 * p) / ((l + 1.0) * p)).sqrt())
    };
    Ok(closed_result(psi.min(1.0), &pmf))
}

/// Closed-form extinction probability under independent dispersion.
pub fn psi_independent(d: Degree, params: &ModelParams) -> Result<ExtinctionResult> {
    let scheme = DispersionScheme::Independent(d);
    require_closed(scheme)?;
    let pmf = offspring_pmf(scheme, params)?;
    if !survival_condition(scheme, params)? {
        return Ok(closed_result(1.0, &pmf));
    }
    let (l, p) = (params.lambda(), params.p());
    let psi = if d.get() == 2 {
        (1.0 - p) * (l + 2.0) / (l * p * (l + 1.0))
    } else {
        let radicand = (l + 3.0) * (p * l * l + 4.0 * l + 6.0 - 3.0 * p) / (p * (l + 1.0));
        (-(l + 3.0) + radicand.sqrt()) / (2.0 * l)
    };
    Ok(closed_result(psi.min(1.0), &pmf))
}

/// Closed-form extinction probability under uniform dispersion.
///
/// For `d = 3` the expression is written with `ln(lambda + 1)`:
/// `psi = [sqrt(D) - (k2+k3) + (m2+m3) L] / (2 (k3 - m3 L))`,
/// `D = (m2+m3)^2 L^2 - 2[(k2+k3)(m2+m3) + 2 beta m3] L + (k2+k3)^2 + 4 beta k3`.
pub fn psi_uniform(d: Degree, params: &ModelParams) -> Result<ExtinctionResult> {
    let scheme = DispersionScheme::Uniform(d);
    require_closed(scheme)?;
    let pmf = offspring_pmf(scheme, params)?;
    if !survival_condition(scheme, params)? {
        return Ok(closed_result(1.0, &pmf));
    }
    let (l, p) = (params.lambda(), params.p());
    let ln_l1 = l.ln_1p();
    let psi = if d.get() == 2 {
        l * l * (1.0 - p) / ((l + 2.0) * (l + 1.0) * l * p - 2.0 * p * (l + 1.0).powi(2) * ln_l1)
    } else {
        let c = LogFormCoefficients::uniform(d, params)?;
        let (ks, ms) = (c.k[1] + c.k[2], c.m[1] + c.m[2]);
        let delta = ms * ms * ln_l1 * ln_l1 - 2.0 * (ks * ms + 2.0 * c.beta * c.m[2]) * ln_l1 + ks * ks + 4.0 * c.beta * c.k[2];
        0.5 * (delta.sqrt() - ks + ms * ln_l1) / (c.k[2] - c.m[2] * ln_l1)
    };
    Ok(closed_result(psi.min(1.0), &pmf))
}

/// Dispatches to the closed form for `scheme`.
pub fn psi_closed_form(scheme: DispersionScheme, params: &ModelParams) -> Result<ExtinctionResult> {
    match scheme {
        DispersionScheme::NoDispersion => Ok(psi_no_dispersion(params)),
        DispersionScheme::Optimal(d) => psi_optimal(d, params),
        DispersionScheme::Independent(d) => psi_independent(d, params),
        DispersionScheme::Uniform(d) => psi_uniform(d, params),
    }
}

/// Smallest fixed point of the offspring PGF assembled by the series
/// oracle (or of the descent PGF without dispersion). Accepts any `d`.
pub fn psi_numeric(scheme: DispersionScheme, params: &ModelParams) -> Result<ExtinctionResult> {
    let pmf = match scheme {
        DispersionScheme::NoDispersion => descent_pgf(params),
        _ => offspring_pmf_series_oracle(scheme, params, SERIES_TOL)?,
    };
    Ok(smallest_fixed_point(&pmf))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(l: f64, p: f64) -> ModelParams {
        ModelParams::new(l, p).unwrap()
    }

    #[test]
    fn pgf_mean_examples() {
        assert!((pgf_mean(&OffspringPmf::from_probs(vec![1.0 / 3.0; 3]).unwrap()) - 1.0).abs() < 1e-15);
        assert_eq!(pgf_mean(&OffspringPmf::from_probs(vec![0.0, 0.0, 0.0, 1.0]).unwrap()), 3.0);
        assert_eq!(pgf_mean(&OffspringPmf::from_probs(vec![0.25; 4]).unwrap()), 1.5);
    }

    #[test]
    fn cubic_law_extinction() {
        let pmf = OffspringPmf::from_probs(vec![0.25; 4]).unwrap();
        let r = extinction_from_pmf(&pmf);
        assert!((r.psi - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!(r.survives);
        assert!(r.diagnostic <= 1e-15);
        let iterated = smallest_fixed_point(&pmf);
        assert!((iterated.psi - r.psi).abs() < 1e-12);
    }

    #[test]
    fn subcritical_and_critical_laws_die() {
        for probs in [vec![1.0 / 3.0; 3], vec![0.5, 0.2, 0.3], vec![0.7, 0.3]] {
            let pmf = OffspringPmf::from_probs(probs).unwrap();
            assert_eq!(extinction_from_pmf(&pmf).psi, 1.0);
            assert_eq!(smallest_fixed_point(&pmf).psi, 1.0);
        }
    }

    #[test]
    fn degenerate_law_is_flagged() {
        let pmf = OffspringPmf::from_probs(vec![0.0, 1.0, 0.0]).unwrap();
        let r = extinction_from_pmf(&pmf);
        assert!(r.degenerate);
        assert_eq!(r.psi, 1.0);
        assert!(smallest_fixed_point(&pmf).degenerate);
    }

    #[test]
    fn quadratic_case_is_p0_over_p2() {
        let pr = params(2.0, 0.5);
        let pmf = offspring_pmf(DispersionScheme::Optimal(Degree::TWO), &pr).unwrap();
        let r = extinction_from_pmf(&pmf);
        let want = pmf.probs()[0] / pmf.probs()[2];
        assert!((r.psi - want).abs() < 1e-15);
        assert!((r.psi - psi_optimal(Degree::TWO, &pr).unwrap().psi).abs() < 1e-12);
    }

    #[test]
    fn minimality_on_a_coarse_grid() {
        let pmf = OffspringPmf::from_probs(vec![0.1, 0.2, 0.1, 0.3, 0.3]).unwrap();
        let r = extinction_from_pmf(&pmf);
        assert!(r.diagnostic <= 1e-10);
        let mut s = 0.0;
        while s < r.psi - 1e-3 {
            assert!(pmf.pgf(s) - s > 0.0, "sign change below psi at {s}");
            s += 1e-3;
        }
    }

    #[test]
    fn near_critical_uses_bisection() {
        // mean = 1 + 1e-8
        let eps = 1e-8;
        let pmf = OffspringPmf::from_probs(vec![0.5 - eps / 2.0, 0.0, 0.5 + eps / 2.0]).unwrap();
        let r = smallest_fixed_point(&pmf);
        let want = (0.5 - eps / 2.0) / (0.5 + eps / 2.0);
        assert!((r.psi - want).abs() < 1e-12, "{} vs {want}", r.psi);
        assert!(r.survives);
    }

    #[test]
    fn no_dispersion_examples() {
        assert_eq!(psi_no_dispersion(&params(1.0, 0.5)).psi, 1.0);
        assert!((psi_no_dispersion(&params(2.0, 0.5)).psi - 0.5).abs() < 1e-15);
        assert_eq!(psi_no_dispersion(&params(4.0, 0.2)).psi, 1.0);
        assert!(survival_condition(DispersionScheme::NoDispersion, &params(2.0, 0.5)).unwrap());
        let numeric = psi_numeric(DispersionScheme::NoDispersion, &params(2.0, 0.5)).unwrap();
        assert!((numeric.psi - 0.5).abs() < 1e-12);
    }

    #[test]
    fn optimal_examples() {
        let r = psi_optimal(Degree::THREE, &params(2.0, 0.5)).unwrap();
        let want = 0.75 * (-1.0 + (7.0f64 / 3.0).sqrt());
        assert!((r.psi - want).abs() < 1e-15);
        assert!((want - 0.395643).abs() < 1e-6);
        for l in [0.5, 1.0, 3.0] {
            let p = (l + 1.0) / (2.0 * l * l + 2.0 * l + 1.0);
            assert_eq!(psi_optimal(Degree::THREE, &params(l, p)).unwrap().psi, 1.0);
        }
    }

    #[test]
    fn independent_examples() {
        let r = psi_independent(Degree::TWO, &params(2.0, 0.5)).unwrap();
        assert!((r.psi - 2.0 / 3.0).abs() < 1e-15);
        for l in [0.5, 2.0, 5.0] {
            let p = (l + 2.0) / (l * l + 2.0 * l + 2.0);
            assert_eq!(psi_independent(Degree::TWO, &params(l, p)).unwrap().psi, 1.0);
        }
        let pr = params(1.0, 0.9);
        let closed = psi_independent(Degree::THREE, &pr).unwrap();
        let pmf = offspring_pmf(DispersionScheme::Independent(Degree::THREE), &pr).unwrap();
        assert!((closed.psi - extinction_from_pmf(&pmf).psi).abs() <= 1e-10);
        assert!(!survival_condition(DispersionScheme::Independent(Degree::THREE), &params(1.0, 0.5)).unwrap());
    }

    #[test]
    fn uniform_examples() {
        let pr = params(2.0, 0.6);
        let closed = psi_uniform(Degree::TWO, &pr).unwrap();
        let numeric = psi_numeric(DispersionScheme::Uniform(Degree::TWO), &pr).unwrap();
        assert!((closed.psi - numeric.psi).abs() <= 1e-9);

        let threshold = 32.0 / (772.0 - 375.0 * 5f64.ln());
        assert!((threshold - 0.18996).abs() < 1e-5);
        assert!(survival_condition(DispersionScheme::Uniform(Degree::THREE), &params(4.0, 0.22)).unwrap());
        assert!(!survival_condition(DispersionScheme::Uniform(Degree::THREE), &params(4.0, 0.18)).unwrap());
        let at_threshold = psi_uniform(Degree::THREE, &params(4.0, threshold)).unwrap();
        assert_eq!(at_threshold.psi, 1.0);
    }

    #[test]
    fn log_form_matches_pmf_solver() {
        let pr = params(2.0, 0.6);
        let coeffs = LogFormCoefficients::uniform(Degree::TWO, &pr).unwrap();
        let via_log_form = lemma_log_form(&coeffs).unwrap();
        let pmf = offspring_pmf(DispersionScheme::Uniform(Degree::TWO), &pr).unwrap();
        assert!((via_log_form.psi - extinction_from_pmf(&pmf).psi).abs() <= 1e-10);
        // k3 = m3 = 0 reduces to beta / (k2 + m2 ln nu)
        let reduced = coeffs.beta / (coeffs.k[1] + coeffs.m[1] * coeffs.nu.ln());
        assert!((via_log_form.psi - reduced).abs() < 1e-12);

        let pr = params(4.0, 0.3);
        let coeffs = LogFormCoefficients::uniform(Degree::THREE, &pr).unwrap();
        let via_log_form = lemma_log_form(&coeffs).unwrap();
        assert!((via_log_form.psi - psi_uniform(Degree::THREE, &pr).unwrap().psi).abs() <= 1e-10);
    }

    #[test]
    fn log_form_rejects_non_pmf() {
        assert!(LogFormCoefficients::new(0.5, [0.5, 0.5, 0.0], [0.0; 3], 0.5).is_err());
        assert!(LogFormCoefficients::new(0.5, [0.5, 0.0, 0.0], [0.0; 3], -1.0).is_err());
        assert!(LogFormCoefficients::new(0.5, [0.25, 0.25, 0.0], [0.0; 3], 0.5).is_ok());
    }

    #[test]
    fn uniform3_bracket_series_matches_direct_form() {
        for l in [0.02f64, 0.05, 0.0999] {
            let direct = l + 2.0 - 2.0 * (l + 1.0) * l.ln_1p() / l;
            assert!((uniform3_bracket(l) - direct).abs() < 1e-12);
        }
        let tiny = uniform3_bracket(1e-6);
        assert!((tiny / 1e-12 - 1.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn unsupported_degrees() {
        let d5 = Degree::new(5).unwrap();
        let pr = params(1.0, 0.5);
        assert!(matches!(psi_uniform(d5, &pr), Err(Error::UnsupportedClosedForm { .. })));
        assert!(survival_condition(DispersionScheme::Optimal(d5), &pr).is_err());
        assert!(psi_numeric(DispersionScheme::Optimal(d5), &pr).is_ok());
    }
}
