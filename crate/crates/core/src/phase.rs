//! Critical curves, crossing points, dominance regions and grid sweeps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{psi_closed_form, survival_condition, survival_margin, LogFormCoefficients};
use crate::error::{Error, Result};
use crate::model::{Degree, DispersionScheme, ModelParams, CLAMP_BAND};

/// Initial bracket for bisection in `lambda`; widened geometrically when
/// it does not contain a sign change.
pub const LAMBDA_BRACKET: (f64, f64) = (1e-6, 1e3);
const BRACKET_SCAN_POINTS: usize = 400;

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Points `lo * (hi/lo)^(i/(n-1))` or evenly spaced, and the number of sign
/// changes of `f` across them.
fn count_sign_changes<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, log_spaced: bool) -> (usize, Option<(f64, f64)>) {
    let at = |i: usize| {
        let t = i as f64 / (BRACKET_SCAN_POINTS - 1) as f64;
        if log_spaced { lo * (hi / lo).powf(t) } else { lo + (hi - lo) * t }
    };
    let mut changes = 0;
    let mut bracket = None;
    let mut prev_x = at(0);
    let mut prev = f(prev_x) > 0.0;
    for i in 1..BRACKET_SCAN_POINTS {
        let x = at(i);
        let cur = f(x) > 0.0;
        if cur != prev {
            changes += 1;
            bracket.get_or_insert((prev_x, x));
        }
        prev = cur;
        prev_x = x;
    }
    (changes, bracket)
}

/// Root of `f` on `[lo, hi]`, requiring exactly one sign change across a
/// scan of the interval.
fn single_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, log_spaced: bool, what: &str) -> Result<f64> {
    match count_sign_changes(&f, lo, hi, log_spaced) {
        (1, Some((a, b))) => Ok(bisect(&f, a, b)),
        (n, _) => Err(Error::RootFinding(format!("{what}: expected one sign change on [{lo}, {hi}], found {n}"))),
    }
}

/// Positive root of `a x^2 + b x + c = 0` with `a > 0`, `c < 0`.
fn positive_quadratic_root(a: f64, b: f64, c: f64) -> f64 {
    let disc = (b * b - 4.0 * a * c).sqrt();
    if b > 0.0 { -2.0 * c / (b + disc) } else { (disc - b) / (2.0 * a) }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("p must lie in (0, 1), got {p}")))
    }
}

/// Smallest growth rate at which `scheme` survives for this `p`.
///
/// Polynomial conditions are solved exactly; uniform dispersion is
/// bisected on its transcendental condition after checking that the
/// condition changes sign exactly once in `lambda`.
pub fn critical_lambda(scheme: DispersionScheme, p: f64) -> Result<f64> {
    check_p(p)?;
    let d = match scheme.degree() {
        None => return Ok((1.0 - p) / p),
        Some(d) if d.has_closed_form() => d.get(),
        Some(_) => return Err(Error::UnsupportedClosedForm { scheme: scheme.to_string() }),
    };
    Ok(match (scheme, d) {
        (DispersionScheme::Optimal(_), 2) => (1.0 - p) / p,
        (DispersionScheme::Optimal(_), _) => positive_quadratic_root(2.0 * p, 2.0 * p - 1.0, p - 1.0),
        (DispersionScheme::Independent(_), 2) => positive_quadratic_root(p, 2.0 * p - 1.0, 2.0 * p - 2.0),
        (DispersionScheme::Independent(_), _) => positive_quadratic_root(2.0 * p, 3.0 * p - 1.0, 3.0 * p - 3.0),
        (DispersionScheme::Uniform(_), _) => {
            let margin = |l: f64| survival_margin(scheme, &ModelParams::new(l, p).expect("positive lambda")).unwrap_or(f64::NAN);
            let (lo, mut hi) = LAMBDA_BRACKET;
            while margin(hi) <= 0.0 {
                hi *= 10.0;
                if hi > 1e12 {
                    return Err(Error::RootFinding(format!("no critical growth rate below {hi} for {scheme}, p = {p}")));
                }
            }
            single_root(margin, lo, hi, true, "uniform critical growth rate")?
        }
        (DispersionScheme::NoDispersion, _) => unreachable!(),
    })
}

/// The `p` at which the critical curve of `scheme` (d = 3) meets the
/// no-dispersion curve `lambda_c(p) = (1 - p)/p`.
pub fn crossing_p(scheme: DispersionScheme) -> Result<f64> {
    match scheme {
        DispersionScheme::Independent(d) | DispersionScheme::Uniform(d) if d.get() == 3 => {}
        _ => {
            return Err(Error::InvalidParams(format!(
                "crossing points are defined for independent or uniform dispersion with d = 3, not {scheme}"
            )))
        }
    }
    let on_curve = |p: f64| {
        let l = (1.0 - p) / p;
        survival_margin(scheme, &ModelParams::new(l, p).expect("valid on (0,1)")).unwrap_or(f64::NAN)
    };
    single_root(on_curve, 1e-3, 1.0 - 1e-3, false, "crossing point")
}

/// Growth rate at which the uniform (d = 3) region structure switches from
/// three cases to five: the no-dispersion threshold `p = 1/(lambda+1)` meets
/// the uniform survival threshold.
pub fn uniform_split_lambda() -> Result<f64> {
    let scheme = DispersionScheme::Uniform(Degree::THREE);
    let f = |l: f64| survival_margin(scheme, &ModelParams::new(l, 1.0 / (l + 1.0)).expect("valid")).unwrap_or(f64::NAN);
    single_root(f, 0.5, 20.0, false, "uniform split")
}

/// Which strategy has the smaller extinction probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dominance {
    BothDie,
    DispersionBetter,
    NonDispersionBetter,
    Tie,
}

impl Dominance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Dominance::BothDie => "both-die",
            Dominance::DispersionBetter => "dispersion-better",
            Dominance::NonDispersionBetter => "non-dispersion-better",
            Dominance::Tie => "tie",
        }
    }
}

impl fmt::Display for Dominance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Relation between a dispersal scheme's extinction probability `psi_s`
/// and the no-dispersion one `psi_A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionCase {
    /// `psi_A = psi_s = 1`
    BothDie,
    /// `psi_s < psi_A = 1`
    OnlyDispersalSurvives,
    /// `psi_s < psi_A < 1`
    DispersalBetter,
    /// `psi_s = psi_A < 1`
    Tie,
    /// `psi_A < psi_s < 1`
    NonDispersalBetter,
    /// `psi_A < psi_s = 1`
    OnlyNonDispersalSurvives,
}

impl RegionCase {
    pub fn dominance(&self) -> Dominance {
        match self {
            RegionCase::BothDie => Dominance::BothDie,
            RegionCase::OnlyDispersalSurvives | RegionCase::DispersalBetter => Dominance::DispersionBetter,
            RegionCase::Tie => Dominance::Tie,
            RegionCase::NonDispersalBetter | RegionCase::OnlyNonDispersalSurvives => Dominance::NonDispersionBetter,
        }
    }

    /// Relation written out with the scheme's symbol, e.g. `psi_3^u<psi_A<1`.
    pub fn label(&self, scheme: DispersionScheme) -> String {
        let sym = match scheme {
            DispersionScheme::Optimal(d) => format!("psi_{d}^o"),
            DispersionScheme::Independent(d) => format!("psi_{d}^i"),
            DispersionScheme::Uniform(d) => format!("psi_{d}^u"),
            DispersionScheme::NoDispersion => "psi_A".to_string(),
        };
        match self {
            RegionCase::BothDie => format!("psi_A={sym}=1"),
            RegionCase::OnlyDispersalSurvives => format!("{sym}<psi_A=1"),
            RegionCase::DispersalBetter => format!("{sym}<psi_A<1"),
            RegionCase::Tie => format!("{sym}=psi_A<1"),
            RegionCase::NonDispersalBetter => format!("psi_A<{sym}<1"),
            RegionCase::OnlyNonDispersalSurvives => format!("psi_A<{sym}=1"),
        }
    }
}

/// Positive when the dispersal scheme has the strictly smaller extinction
/// probability, given that both processes survive.
///
/// For d = 3 the sign comes from threshold inequalities: independent
/// dispersal wins iff `p < 2(l+1)/(3l+5)`; uniform dispersal wins iff
/// `[r m3 + m2] ln(l+1) < r k3 + k2 - l p/(l p + 1)` with
/// `r = (1 + p(l-1))/(l p)`. For d = 2 the closed forms are compared.
pub fn tie_margin(scheme: DispersionScheme, params: &ModelParams) -> Result<f64> {
    let (l, p) = (params.lambda(), params.p());
    match scheme {
        DispersionScheme::Independent(d) if d.get() == 3 => Ok(2.0 * (l + 1.0) / (3.0 * l + 5.0) - p),
        DispersionScheme::Uniform(d) if d.get() == 3 => {
            let c = LogFormCoefficients::uniform(d, params)?;
            let r = (1.0 + p * (l - 1.0)) / (l * p);
            let lhs = (r * c.m[2] + c.m[1]) * l.ln_1p();
            let rhs = r * c.k[2] + c.k[1] - l * p / (l * p + 1.0);
            Ok(rhs - lhs)
        }
        DispersionScheme::NoDispersion => Err(Error::InvalidParams("compare a dispersal scheme against no dispersion".into())),
        _ => {
            let psi_a = psi_closed_form(DispersionScheme::NoDispersion, params)?.psi;
            Ok(psi_a - psi_closed_form(scheme, params)?.psi)
        }
    }
}

/// Classifies `(lambda, p)` into one of the six relations between the
/// dispersal scheme and no dispersion. Boundaries within [`CLAMP_BAND`]
/// belong to the interval on their left, and tie loci are detected within
/// the same band.
pub fn classify_region(scheme: DispersionScheme, params: &ModelParams) -> Result<RegionCase> {
    if scheme == DispersionScheme::NoDispersion {
        return Err(Error::InvalidParams("classification needs a dispersal scheme".into()));
    }
    let dispersal = survival_condition(scheme, params)?;
    let single = survival_condition(DispersionScheme::NoDispersion, params)?;
    Ok(match (dispersal, single) {
        (false, false) => RegionCase::BothDie,
        (true, false) => RegionCase::OnlyDispersalSurvives,
        (false, true) => RegionCase::OnlyNonDispersalSurvives,
        (true, true) => {
            let m = tie_margin(scheme, params)?;
            if m.abs() <= CLAMP_BAND {
                RegionCase::Tie
            } else if m > 0.0 {
                RegionCase::DispersalBetter
            } else {
                RegionCase::NonDispersalBetter
            }
        }
    })
}

/// Independent dispersal (d = 3) against no dispersion.
pub fn dominance_independent(params: &ModelParams) -> Dominance {
    classify_region(DispersionScheme::Independent(Degree::THREE), params)
        .expect("d = 3 has closed forms")
        .dominance()
}

/// Uniform dispersal (d = 3) against no dispersion.
pub fn dominance_uniform(params: &ModelParams) -> Dominance {
    classify_region(DispersionScheme::Uniform(Degree::THREE), params)
        .expect("d = 3 has closed forms")
        .dominance()
}

/// The `p` boundaries of the region structure at a fixed growth rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionThresholds {
    pub lambda: f64,
    /// Dispersal scheme survives iff `p` exceeds this (1 if never).
    pub dispersal_survival: f64,
    /// No dispersion survives iff `p > 1/(lambda + 1)`.
    pub no_dispersal_survival: f64,
    /// Equal extinction probabilities inside the region where both survive.
    pub tie: Option<f64>,
}

/// Interval endpoints in `p` for `scheme` (independent or uniform, d = 3)
/// at growth rate `lambda`.
pub fn region_thresholds(scheme: DispersionScheme, lambda: f64) -> Result<RegionThresholds> {
    let d3 = matches!(scheme, DispersionScheme::Independent(d) | DispersionScheme::Uniform(d) if d.get() == 3);
    if !d3 {
        return Err(Error::InvalidParams(format!("region thresholds are defined for d = 3 dispersal, not {scheme}")));
    }
    ModelParams::new(lambda, 0.5)?;
    let at = |p: f64| ModelParams::new(lambda, p).expect("valid");
    let lo = 1e-12;
    let hi = 1.0 - 1e-12;
    let no_dispersal_survival = 1.0 / (lambda + 1.0);
    let dispersal_survival = match scheme {
        DispersionScheme::Independent(_) => (lambda + 3.0) / (2.0 * lambda * lambda + 3.0 * lambda + 3.0),
        _ => {
            let margin = |p: f64| survival_margin(scheme, &at(p)).unwrap_or(f64::NAN);
            if margin(hi) <= 0.0 {
                1.0
            } else if margin(lo) > 0.0 {
                0.0
            } else {
                bisect(margin, lo, hi)
            }
        }
    };
    let both = dispersal_survival.max(no_dispersal_survival);
    let tie = match scheme {
        DispersionScheme::Independent(_) => {
            let t = 2.0 * (lambda + 1.0) / (3.0 * lambda + 5.0);
            (t > both + CLAMP_BAND && t < 1.0).then_some(t)
        }
        _ => {
            let margin = |p: f64| tie_margin(scheme, &at(p)).unwrap_or(f64::NAN);
            let start = (both + 1e-9).min(hi);
            (margin(start) > 0.0 && margin(hi) < 0.0).then(|| bisect(margin, start, hi))
        }
    };
    Ok(RegionThresholds { lambda, dispersal_survival, no_dispersal_survival, tie })
}

/// Inclusive arithmetic range `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridRange {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite()) {
            return Err(Error::InvalidParams(format!("range {start}:{stop}:{step} needs finite bounds and a positive step")));
        }
        Ok(Self { start, stop, step })
    }

    /// `start + i * step` for every `i` that stays within `stop` (with a
    /// relative slack of 1e-9 steps). Empty when `start > stop`.
    pub fn points(&self) -> Vec<f64> {
        if self.start > self.stop {
            return Vec::new();
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for GridRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts.as_slice() else {
            return Err(Error::InvalidParams(format!("range {s:?} must look like start:stop:step")));
        };
        let num = |t: &str| {
            t.trim().parse::<f64>().map_err(|_| Error::InvalidParams(format!("range {s:?}: {t:?} is not a number")))
        };
        GridRange::new(num(a)?, num(b)?, num(step)?)
    }
}

/// One grid cell of a phase diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub lambda: f64,
    pub p: f64,
    pub d: Degree,
    pub psi_a: f64,
    pub psi_o: f64,
    pub psi_i: f64,
    pub psi_u: f64,
    pub dom_indep: Dominance,
    pub dom_unif: Dominance,
    pub region_indep: RegionCase,
    pub region_unif: RegionCase,
}

impl PhaseRow {
    pub fn compute(d: Degree, params: &ModelParams) -> Result<Self> {
        let indep = DispersionScheme::Independent(d);
        let unif = DispersionScheme::Uniform(d);
        let region_indep = classify_region(indep, params)?;
        let region_unif = classify_region(unif, params)?;
        Ok(PhaseRow {
            lambda: params.lambda(),
            p: params.p(),
            d,
            psi_a: psi_closed_form(DispersionScheme::NoDispersion, params)?.psi,
            psi_o: psi_closed_form(DispersionScheme::Optimal(d), params)?.psi,
            psi_i: psi_closed_form(indep, params)?.psi,
            psi_u: psi_closed_form(unif, params)?.psi,
            dom_indep: region_indep.dominance(),
            dom_unif: region_unif.dominance(),
            region_indep,
            region_unif,
        })
    }
}

/// Every cell of the `lambda x p` grid, row-major with `lambda` outer.
/// Cells are evaluated in parallel; the output order does not depend on it.
pub fn phase_grid(lambdas: &GridRange, ps: &GridRange, d: Degree) -> Result<Vec<PhaseRow>> {
    if !d.has_closed_form() {
        return Err(Error::UnsupportedClosedForm { scheme: format!("phase grid with d={d}") });
    }
    let cells: Vec<ModelParams> = lambdas
        .points()
        .into_iter()
        .flat_map(|l| ps.points().into_iter().map(move |p| (l, p)))
        .map(|(l, p)| ModelParams::new(l, p))
        .collect::<Result<_>>()?;
    cells.par_iter().map(|params| PhaseRow::compute(d, params)).collect()
}
