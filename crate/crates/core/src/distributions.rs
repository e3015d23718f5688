//! Exact probability laws shared by the analytic and simulation layers:
//! the geometric catastrophe kernel, the survivor law and its PGF, the
//! occupancy laws of the three dispersal rules, and the offspring PMFs
//! (closed forms plus a truncated-series oracle that works for any `d`).

use crate::analytic::LogFormCoefficients;
use crate::error::{Error, Result};
use crate::model::{Degree, DispersionScheme, ModelParams, OffspringPmf, Provenance};

/// `P(colony of size i drops to size j)` under a geometric catastrophe:
/// `q^i` for `j = 0`, `p q^(i-j)` for `1 <= j <= i`.
pub fn geometric_catastrophe_pmf(i: u64, j: u64, p: f64) -> Result<f64> {
    if i == 0 || j > i {
        return Err(Error::Domain(format!("catastrophe transition {i} -> {j} is not defined")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParams(format!("p must lie in (0, 1), got {p}")));
    }
    let q = 1.0 - p;
    Ok(if j == 0 { q.powf(i as f64) } else { p * q.powf((i - j) as f64) })
}

/// `P(N = n)` for the number of survivors of the first catastrophe.
pub fn survivor_pmf(params: &ModelParams, n: u64) -> f64 {
    let law = params.survivor_law();
    if n == 0 {
        law.beta
    } else {
        // alpha * c^n in log space so huge n underflow to 0 rather than NaN.
        (law.alpha.ln() + n as f64 * law.c.ln()).exp()
    }
}

/// `E[s^N] = (s c (alpha - beta) + beta) / (1 - s c)`.
pub fn survivor_pgf(params: &ModelParams, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("PGF argument must lie in [0, 1], got {s}")));
    }
    let law = params.survivor_law();
    Ok((s * law.c * (law.alpha - law.beta) + law.beta) / (1.0 - s * law.c))
}

/// Number of surjections from an `r`-set onto a `y`-set,
/// `sum_i (-1)^i C(y, i) (y - i)^r`.
///
/// Fails with a domain error if the alternating sum overflows 128 bits.
pub fn surjection_count(r: u32, y: u32) -> Result<u128> {
    if y > r {
        return Ok(0);
    }
    let overflow = || Error::Domain(format!("surjection count T({r}, {y}) overflows u128"));
    let mut total: i128 = 0;
    let mut binom: i128 = 1;
    for i in 0..=y {
        let power = i128::from(y - i).checked_pow(r).ok_or_else(overflow)?;
        let term = binom.checked_mul(power).ok_or_else(overflow)?;
        total = if i % 2 == 0 { total.checked_add(term) } else { total.checked_sub(term) }.ok_or_else(overflow)?;
        if i < y {
            binom = binom * i128::from(y - i) / i128::from(i + 1);
        }
    }
    u128::try_from(total).map_err(|_| overflow())
}

/// `C(n, k)` as a float, by a product of `min(k, n - k)` ratios.
pub(crate) fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_occupancy_args(d: u32, r: u64, y: u32) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParams(format!("dispersion degree must be at least 2, got {d}")));
    }
    if r == 0 || y == 0 || u64::from(y) > r.min(u64::from(d)) {
        return Err(Error::Domain(format!("occupancy y = {y} outside 1..=min(d = {d}, r = {r})")));
    }
    Ok(())
}

/// `P(Y = y | N = r)` under independent dispersion: `T(r, y) C(d, y) / d^r`.
///
/// Evaluated as `C(d, y) sum_i (-1)^i C(y, i) ((y - i)/d)^r` so that large
/// `r` never overflows.
pub fn occupancy_pmf_independent(d: u32, r: u64, y: u32) -> Result<f64> {
    check_occupancy_args(d, r, y)?;
    let df = f64::from(d);
    let sum: f64 = (0..=y)
        .map(|i| {
            let term = binomial(u64::from(y), u64::from(i)) * (f64::from(y - i) / df).powf(r as f64);
            if i % 2 == 0 { term } else { -term }
        })
        .sum();
    Ok((binomial(u64::from(d), u64::from(y)) * sum).max(0.0))
}

/// `P(Y = y | N = r)` under uniform dispersion:
/// `C(r - 1, y - 1) C(d, y) / C(d + r - 1, r)`.
pub fn occupancy_pmf_uniform(d: u32, r: u64, y: u32) -> Result<f64> {
    check_occupancy_args(d, r, y)?;
    let d64 = u64::from(d);
    Ok(binomial(r - 1, u64::from(y) - 1) * binomial(d64, u64::from(y)) / binomial(d64 + r - 1, d64 - 1))
}

/// Colonies founded under optimal dispersion: `min(r, d)`.
pub fn occupancy_optimal(d: u32, r: u64) -> u64 {
    r.min(u64::from(d))
}

/// Conditional occupancy law `P(Y = y | N = r)` for one dispersal scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OccupancyLaw {
    scheme: DispersionScheme,
    d: Degree,
}

impl OccupancyLaw {
    pub fn new(scheme: DispersionScheme) -> Result<Self> {
        let d = scheme
            .degree()
            .ok_or_else(|| Error::Domain("no occupancy law without dispersion".into()))?;
        Ok(Self { scheme, d })
    }

    pub fn scheme(&self) -> DispersionScheme {
        self.scheme
    }

    /// Total over its arguments: 0 outside the support.
    pub fn pmf(&self, y: u32, r: u64) -> f64 {
        if r == 0 {
            return if y == 0 { 1.0 } else { 0.0 };
        }
        let d = self.d.get();
        if y == 0 || u64::from(y) > r.min(u64::from(d)) {
            return 0.0;
        }
        match self.scheme {
            DispersionScheme::Optimal(_) => {
                if u64::from(y) == occupancy_optimal(d, r) { 1.0 } else { 0.0 }
            }
            DispersionScheme::Independent(_) => occupancy_pmf_independent(d, r, y).unwrap_or(0.0),
            DispersionScheme::Uniform(_) => occupancy_pmf_uniform(d, r, y).unwrap_or(0.0),
            DispersionScheme::NoDispersion => unreachable!("rejected in OccupancyLaw::new"),
        }
    }

    /// `[P(Y = 0 | N = r), ..., P(Y = d | N = r)]`.
    pub fn row(&self, r: u64) -> Vec<f64> {
        (0..=self.d.get()).map(|y| self.pmf(y, r)).collect()
    }
}

fn dispersal_degree(scheme: DispersionScheme) -> Result<Degree> {
    scheme.degree().ok_or_else(|| {
        Error::Domain("the single-colony model has no colony offspring law; use the descent PGF in `analytic`".into())
    })
}

/// Closed-form offspring PMF `P(Y = y)`, `y = 0..=d`, for `d` in {2, 3}.
pub fn offspring_pmf(scheme: DispersionScheme, params: &ModelParams) -> Result<OffspringPmf> {
    let d = dispersal_degree(scheme)?;
    if !d.has_closed_form() {
        return Err(Error::UnsupportedClosedForm { scheme: scheme.to_string() });
    }
    let law = params.survivor_law();
    let (beta, alpha, c) = (law.beta, law.alpha, law.c);
    let probs = match (scheme, d.get()) {
        (DispersionScheme::Optimal(_), 2) => {
            let p1 = alpha * c;
            vec![beta, p1, 1.0 - beta - p1]
        }
        (DispersionScheme::Optimal(_), 3) => {
            let p1 = alpha * c;
            let p2 = alpha * c * c;
            vec![beta, p1, p2, 1.0 - beta - p1 - p2]
        }
        (DispersionScheme::Independent(_), 2) => {
            let p1 = 2.0 * alpha * c / (2.0 - c);
            let p2 = alpha * c * c / ((1.0 - c) * (2.0 - c));
            vec![beta, p1, p2]
        }
        (DispersionScheme::Independent(_), 3) => {
            let p1 = 3.0 * alpha * c / (3.0 - c);
            let p2 = alpha * c * c * (4.0 / (3.0 - 2.0 * c) - 2.0 / (3.0 - c));
            let p3 = alpha * c.powi(3) * (1.0 / (1.0 - c) - 8.0 / (3.0 * (3.0 - 2.0 * c)) + 1.0 / (3.0 * (3.0 - c)));
            vec![beta, p1, p2, p3]
        }
        (DispersionScheme::Uniform(_), _) => LogFormCoefficients::uniform(d, params)?.probs(),
        _ => unreachable!("degree checked above"),
    };
    OffspringPmf::new(probs, Some(scheme), Provenance::AnalyticClosedForm)
}

/// Offspring PMF by direct summation of `sum_n P(N = n) P(Y = y | N = n)`,
/// for any `d >= 2`.
///
/// The sum stops at the first `n*` whose geometric tail
/// `alpha c^(n*+1) / (1 - c)` is below `tol / 10`; that tail is credited to
/// `y = d`. Independent-dispersion rows are propagated one survivor at a
/// time rather than through the inclusion-exclusion formula.
pub fn offspring_pmf_series_oracle(scheme: DispersionScheme, params: &ModelParams, tol: f64) -> Result<OffspringPmf> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tolerance must be positive, got {tol}")));
    }
    let d = dispersal_degree(scheme)?;
    let du = d.as_usize();
    let law = params.survivor_law();
    let tail_after = |n: u64| law.alpha * law.c.powf((n + 1) as f64) / (1.0 - law.c);

    let mut probs = vec![0.0; du + 1];
    probs[0] = law.beta;
    // Distribution of distinct children hit by the first n survivors.
    let mut indep_row = vec![0.0; du + 1];
    indep_row[0] = 1.0;
    let occupancy = OccupancyLaw::new(scheme)?;
    let df = d.get() as f64;

    let mut n: u64 = 0;
    let mut weight = law.alpha;
    while tail_after(n) >= tol / 10.0 {
        n += 1;
        weight *= law.c;
        match scheme {
            DispersionScheme::Independent(_) => {
                for y in (1..=du).rev() {
                    indep_row[y] = indep_row[y] * y as f64 / df + indep_row[y - 1] * (df - (y - 1) as f64) / df;
                }
                indep_row[0] = 0.0;
                for (acc, &w) in probs.iter_mut().zip(&indep_row).skip(1) {
                    *acc += weight * w;
                }
            }
            _ => {
                let top = (n.min(d.get() as u64)) as u32;
                for y in 1..=top {
                    probs[y as usize] += weight * occupancy.pmf(y, n);
                }
            }
        }
    }
    probs[du] += tail_after(n);
    OffspringPmf::new(probs, Some(scheme), Provenance::TruncatedSeries)
}
