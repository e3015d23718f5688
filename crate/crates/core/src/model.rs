//! Shared domain types: model parameters, dispersion schemes, the survivor
//! law and the result types every other module returns.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width of the band around 1 inside which an extinction probability is
/// treated as exactly 1.
pub const CLAMP_BAND: f64 = 1e-12;

/// Tolerance on the total mass of an offspring PMF.
pub const PMF_SUM_TOL: f64 = 1e-10;

/// Growth rate and per-individual catastrophe survival probability.
///
/// The catastrophe rate is fixed at 1; models with another rate are not
/// representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    lambda: f64,
    p: f64,
}

impl ModelParams {
    pub fn new(lambda: f64, p: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParams(format!("lambda must be a positive finite real, got {lambda}")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParams(format!("p must lie in the open interval (0, 1), got {p}")));
        }
        Ok(Self { lambda, p })
    }

    /// Rejects any catastrophe rate other than 1 instead of rescaling `lambda`.
    pub fn with_catastrophe_rate(lambda: f64, p: f64, rate: f64) -> Result<Self> {
        if rate != 1.0 {
            return Err(Error::InvalidParams(format!("catastrophe rate is fixed at 1, got {rate}")));
        }
        Self::new(lambda, p)
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Probability that a single removal attempt kills, `1 - p`.
    #[inline]
    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    pub fn survivor_law(&self) -> SurvivorLaw {
        SurvivorLaw::new(self)
    }
}

/// Number of child vertices available to the survivors of a catastrophe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Degree(u32);

impl Degree {
    pub const TWO: Degree = Degree(2);
    pub const THREE: Degree = Degree(3);

    pub fn new(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParams(format!("dispersion degree must be at least 2, got {d}")));
        }
        Ok(Self(d))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    /// Closed forms are only derived for two and three children.
    #[inline]
    pub fn has_closed_form(self) -> bool {
        self.0 == 2 || self.0 == 3
    }
}

impl TryFrom<u32> for Degree {
    type Error = Error;

    fn try_from(d: u32) -> Result<Self> {
        Degree::new(d)
    }
}

impl From<Degree> for u32 {
    fn from(d: Degree) -> u32 {
        d.0
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How the survivors of a catastrophe are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "scheme", content = "d", rename_all = "kebab-case")]
pub enum DispersionScheme {
    /// Survivors stay together in the struck colony.
    NoDispersion,
    /// Survivors fill children left to right: `min(r, d)` new colonies.
    Optimal(Degree),
    /// Each survivor picks a child uniformly and independently.
    Independent(Degree),
    /// Every composition of the survivors over the children is equally likely.
    Uniform(Degree),
}

impl DispersionScheme {
    pub fn degree(&self) -> Option<Degree> {
        match *self {
            DispersionScheme::NoDispersion => None,
            DispersionScheme::Optimal(d) | DispersionScheme::Independent(d) | DispersionScheme::Uniform(d) => Some(d),
        }
    }

    /// True for dispersal schemes with `d > 3`: the simulator and numeric
    /// solver accept them, but no closed form backs the result.
    pub fn is_beyond_closed_forms(&self) -> bool {
        self.degree().is_some_and(|d| !d.has_closed_form())
    }

    pub fn name(&self) -> &'static str {
        match self {
            DispersionScheme::NoDispersion => "none",
            DispersionScheme::Optimal(_) => "optimal",
            DispersionScheme::Independent(_) => "independent",
            DispersionScheme::Uniform(_) => "uniform",
        }
    }

    /// Builds a scheme from its short name; `d` is ignored for `none`.
    pub fn from_name(name: &str, d: u32) -> Result<Self> {
        match name {
            "none" => Ok(DispersionScheme::NoDispersion),
            "optimal" => Ok(DispersionScheme::Optimal(Degree::new(d)?)),
            "independent" => Ok(DispersionScheme::Independent(Degree::new(d)?)),
            "uniform" => Ok(DispersionScheme::Uniform(Degree::new(d)?)),
            other => Err(Error::InvalidParams(format!(
                "unknown scheme {other:?}; expected none, optimal, independent or uniform"
            ))),
        }
    }
}

impl fmt::Display for DispersionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.degree() {
            None => f.write_str(self.name()),
            Some(d) => write!(f, "{}(d={})", self.name(), d),
        }
    }
}

/// Law of the number `N` of individuals left just after a catastrophe
/// strikes a colony founded by one individual:
/// `P(N = 0) = beta`, `P(N = n) = alpha * c^n` for `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivorLaw {
    pub beta: f64,
    pub alpha: f64,
    pub c: f64,
}

impl SurvivorLaw {
    pub fn new(params: &ModelParams) -> Self {
        let (l, p) = (params.lambda(), params.p());
        let denom = l * p + 1.0;
        SurvivorLaw {
            beta: (1.0 - p) / denom,
            alpha: (l + 1.0) * p / (l * denom),
            c: l / (l + 1.0),
        }
    }

    /// `beta` recomputed from `alpha` and `c`; equals [`SurvivorLaw::beta`]
    /// up to rounding.
    pub fn beta_from_alpha_c(&self) -> f64 {
        (1.0 - (1.0 + self.alpha) * self.c) / (1.0 - self.c)
    }

    /// `P(N >= 1)` summed as a geometric series.
    pub fn positive_mass(&self) -> f64 {
        self.alpha * self.c / (1.0 - self.c)
    }
}

/// Derived constants of the survivor law for `params`.
pub fn survivor_law(params: &ModelParams) -> SurvivorLaw {
    SurvivorLaw::new(params)
}

/// Where a PMF came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    AnalyticClosedForm,
    TruncatedSeries,
    /// Supplied directly by a caller.
    Given,
}

/// Law of the number of new colonies that replace a struck colony.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffspringPmf {
    probs: Vec<f64>,
    scheme: Option<DispersionScheme>,
    provenance: Provenance,
}

impl OffspringPmf {
    pub fn new(probs: Vec<f64>, scheme: Option<DispersionScheme>, provenance: Provenance) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain("offspring PMF needs at least one entry".into()));
        }
        if let Some((y, &v)) = probs.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("P(Y={y}) = {v} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::Domain(format!("offspring PMF sums to {total}, not 1")));
        }
        Ok(Self { probs, scheme, provenance })
    }

    /// A caller-supplied PMF with no scheme attached.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs, None, Provenance::Given)
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn scheme(&self) -> Option<DispersionScheme> {
        self.scheme
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Largest offspring count carried by the vector.
    pub fn max_offspring(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(y, &p)| y as f64 * p).sum()
    }

    /// Probability generating function, evaluated by Horner's rule.
    pub fn pgf(&self, s: f64) -> f64 {
        self.probs.iter().rev().fold(0.0, |acc, &p| acc * s + p)
    }
}

/// How an extinction probability was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    NumericRoot,
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed-form",
            Method::NumericRoot => "numeric-root",
            Method::MonteCarlo => "monte-carlo",
        })
    }
}

/// An extinction probability together with how it was computed.
///
/// `diagnostic` is the fixed-point residual `|g(psi) - psi|` for analytic
/// and numeric methods, or the standard error for Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionResult {
    pub psi: f64,
    pub survives: bool,
    pub method: Method,
    pub diagnostic: f64,
    /// Set for the offspring law `P(Y=1) = 1`, where every `s` is a fixed
    /// point and `psi` is reported as 1 by convention.
    #[serde(default)]
    pub degenerate: bool,
}

impl ExtinctionResult {
    /// Clamps `psi` into `[0, 1]`, snapping values within [`CLAMP_BAND`] of 1
    /// to exactly 1, and derives the survival flag from the clamped value.
    pub fn new(psi: f64, method: Method, diagnostic: f64) -> Self {
        let psi = clamp_psi(psi);
        ExtinctionResult { psi, survives: psi < 1.0, method, diagnostic, degenerate: false }
    }

    pub(crate) fn degenerate(method: Method) -> Self {
        ExtinctionResult { psi: 1.0, survives: false, method, diagnostic: 0.0, degenerate: true }
    }
}

/// `min(psi, 1)` clamped to `[0, 1]` with the criticality band applied.
pub fn clamp_psi(psi: f64) -> f64 {
    if psi.is_nan() || psi >= 1.0 - CLAMP_BAND {
        1.0
    } else if psi < 0.0 {
        0.0
    } else {
        psi
    }
}
