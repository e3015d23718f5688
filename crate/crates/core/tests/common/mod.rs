//! Grid checks shared by the property tests and the acceptance runner.
//! Each check returns a one-line summary on success.

#![allow(dead_code)]

use catlab::analytic::{pgf_mean, psi_closed_form, psi_numeric, survival_condition};
use catlab::distributions::{
    occupancy_optimal, occupancy_pmf_independent, occupancy_pmf_uniform, offspring_pmf, offspring_pmf_series_oracle,
};
use catlab::model::{Degree, DispersionScheme, ModelParams, CLAMP_BAND};
use catlab::phase::{classify_region, critical_lambda, dominance_independent, dominance_uniform, Dominance, RegionCase};
use catlab::simulator::{estimate_psi, SimConfig};

pub type Check = Result<String, String>;

pub const LAMBDAS: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

pub fn grid_ps() -> Vec<f64> {
    (1..=19).map(|k| k as f64 / 20.0).collect()
}

pub fn grid() -> Vec<ModelParams> {
    LAMBDAS.iter().flat_map(|&l| grid_ps().into_iter().map(move |p| ModelParams::new(l, p).unwrap())).collect()
}

pub const D2: Degree = Degree::TWO;
pub const D3: Degree = Degree::THREE;

/// The seven schemes with a closed form.
pub fn closed_form_schemes() -> Vec<DispersionScheme> {
    vec![
        DispersionScheme::NoDispersion,
        DispersionScheme::Optimal(D2),
        DispersionScheme::Optimal(D3),
        DispersionScheme::Independent(D2),
        DispersionScheme::Independent(D3),
        DispersionScheme::Uniform(D2),
        DispersionScheme::Uniform(D3),
    ]
}

pub fn dispersal_schemes() -> Vec<DispersionScheme> {
    closed_form_schemes().into_iter().skip(1).collect()
}

fn at(params: &ModelParams) -> String {
    format!("lambda={} p={}", params.lambda(), params.p())
}

pub fn closed_vs_fixed_point() -> Check {
    let mut worst = 0.0f64;
    for params in grid() {
        for scheme in closed_form_schemes() {
            let closed = psi_closed_form(scheme, &params).map_err(|e| e.to_string())?;
            let numeric = psi_numeric(scheme, &params).map_err(|e| e.to_string())?;
            let diff = (closed.psi - numeric.psi).abs();
            if diff > 1e-9 {
                return Err(format!("{scheme} at {}: closed {} vs numeric {}", at(&params), closed.psi, numeric.psi));
            }
            worst = worst.max(diff);
        }
    }
    Ok(format!("max |closed - fixed point| = {worst:.2e}"))
}

pub fn residuals() -> Check {
    let mut worst = 0.0f64;
    for params in grid() {
        for scheme in dispersal_schemes() {
            let psi = psi_closed_form(scheme, &params).map_err(|e| e.to_string())?.psi;
            let pmf = offspring_pmf(scheme, &params).map_err(|e| e.to_string())?;
            let r = (pmf.pgf(psi) - psi).abs();
            if r > 1e-10 {
                return Err(format!("{scheme} at {}: residual {r:e}", at(&params)));
            }
            worst = worst.max(r);
        }
    }
    Ok(format!("max |g(psi) - psi| = {worst:.2e}"))
}

pub fn pmf_vs_oracle() -> Check {
    let mut worst = 0.0f64;
    for params in grid() {
        for scheme in dispersal_schemes() {
            let closed = offspring_pmf(scheme, &params).map_err(|e| e.to_string())?;
            let oracle = offspring_pmf_series_oracle(scheme, &params, 1e-12).map_err(|e| e.to_string())?;
            let sum: f64 = closed.probs().iter().sum();
            if (sum - 1.0).abs() > 1e-10 || closed.probs().iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(format!("{scheme} at {}: not a pmf {:?}", at(&params), closed.probs()));
            }
            for (y, (a, b)) in closed.probs().iter().zip(oracle.probs()).enumerate() {
                let diff = (a - b).abs();
                if diff > 1e-9 {
                    return Err(format!("{scheme} at {}: P(Y={y}) {a} vs oracle {b}", at(&params)));
                }
                worst = worst.max(diff);
            }
        }
    }
    Ok(format!("max |closed - oracle| = {worst:.2e}"))
}

pub fn occupancy_laws() -> Check {
    for d in [2u32, 3] {
        for r in 1..=50u64 {
            let top = d.min(r as u32);
            let indep: Vec<f64> = (1..=top).map(|y| occupancy_pmf_independent(d, r, y).unwrap()).collect();
            let unif: Vec<f64> = (1..=top).map(|y| occupancy_pmf_uniform(d, r, y).unwrap()).collect();
            for (name, row) in [("independent", &indep), ("uniform", &unif)] {
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > 1e-12 {
                    return Err(format!("{name} d={d} r={r} sums to {s}"));
                }
            }
            let (mut ci, mut cu) = (0.0, 0.0);
            for (a, b) in indep.iter().zip(&unif) {
                ci += a;
                cu += b;
                if ci > cu + 1e-12 {
                    return Err(format!("independent does not dominate uniform at d={d} r={r}"));
                }
            }
            if occupancy_optimal(d, r) != u64::from(top) {
                return Err(format!("optimal occupancy wrong at d={d} r={r}"));
            }
        }
    }
    Ok("rows normalized and ordered for r <= 50".into())
}

pub fn optimal_two_identity() -> Check {
    let mut worst = 0.0f64;
    for params in grid() {
        let a = psi_closed_form(DispersionScheme::NoDispersion, &params).unwrap().psi;
        let o = psi_closed_form(DispersionScheme::Optimal(D2), &params).unwrap().psi;
        worst = worst.max((a - o).abs());
    }
    if worst <= 1e-12 {
        Ok(format!("max |psi_2^o - psi_A| = {worst:.2e}"))
    } else {
        Err(format!("max |psi_2^o - psi_A| = {worst:e}"))
    }
}

pub fn psi_ordering() -> Check {
    for params in grid() {
        for d in [D2, D3] {
            let o = psi_closed_form(DispersionScheme::Optimal(d), &params).unwrap().psi;
            let i = psi_closed_form(DispersionScheme::Independent(d), &params).unwrap().psi;
            let u = psi_closed_form(DispersionScheme::Uniform(d), &params).unwrap().psi;
            if !(o <= i + 1e-12 && i <= u + 1e-12) {
                return Err(format!("d={d} at {}: {o} {i} {u}", at(&params)));
            }
        }
    }
    Ok("psi^o <= psi^i <= psi^u on the grid".into())
}

pub fn critical_ordering() -> Check {
    for p in grid_ps() {
        for d in [D2, D3] {
            let lc = |s| critical_lambda(s, p).map_err(|e| e.to_string());
            let o = lc(DispersionScheme::Optimal(d))?;
            let i = lc(DispersionScheme::Independent(d))?;
            let u = lc(DispersionScheme::Uniform(d))?;
            if !(o <= i * (1.0 + 1e-12) && i <= u * (1.0 + 1e-12)) {
                return Err(format!("d={d} p={p}: lambda_c {o} {i} {u}"));
            }
        }
        let none = critical_lambda(DispersionScheme::NoDispersion, p).unwrap();
        let o3 = critical_lambda(DispersionScheme::Optimal(D3), p).unwrap();
        if !(o3 < none) {
            return Err(format!("optimal d=3 not below no dispersion at p={p}"));
        }
    }
    Ok("lambda_c^o <= lambda_c^i <= lambda_c^u for all grid p".into())
}

pub fn monotonicity() -> Check {
    let ps = grid_ps();
    for scheme in closed_form_schemes() {
        let psi = |l: f64, p: f64| psi_closed_form(scheme, &ModelParams::new(l, p).unwrap()).unwrap().psi;
        for &l in &LAMBDAS {
            for w in ps.windows(2) {
                if psi(l, w[1]) > psi(l, w[0]) + 1e-12 {
                    return Err(format!("{scheme} increases in p at lambda={l}, p={}", w[1]));
                }
            }
        }
        for &p in &ps {
            for w in LAMBDAS.windows(2) {
                if psi(w[1], p) > psi(w[0], p) + 1e-12 {
                    return Err(format!("{scheme} increases in lambda at p={p}, lambda={}", w[1]));
                }
            }
        }
    }
    for params in grid() {
        for (s2, s3) in [
            (DispersionScheme::Optimal(D2), DispersionScheme::Optimal(D3)),
            (DispersionScheme::Independent(D2), DispersionScheme::Independent(D3)),
            (DispersionScheme::Uniform(D2), DispersionScheme::Uniform(D3)),
        ] {
            let a = psi_closed_form(s2, &params).unwrap().psi;
            let b = psi_closed_form(s3, &params).unwrap().psi;
            if b > a + 1e-12 {
                return Err(format!("{s3} above {s2} at {}", at(&params)));
            }
        }
    }
    Ok("non-increasing in lambda, p and d".into())
}

pub fn criticality_consistency() -> Check {
    for params in grid() {
        for scheme in dispersal_schemes() {
            let cond = survival_condition(scheme, &params).unwrap();
            let mean = pgf_mean(&offspring_pmf(scheme, &params).unwrap());
            let psi = psi_closed_form(scheme, &params).unwrap();
            let near = (mean - 1.0).abs() < 1e-9;
            if !near && (cond != (mean > 1.0) || cond != psi.survives) {
                return Err(format!("{scheme} at {}: condition {cond}, mean {mean}, psi {}", at(&params), psi.psi));
            }
        }
        let cond = survival_condition(DispersionScheme::NoDispersion, &params).unwrap();
        let psi = psi_closed_form(DispersionScheme::NoDispersion, &params).unwrap();
        let excess = params.lambda() * params.p() - (1.0 - params.p());
        if excess.abs() > 1e-12 && (cond != psi.survives || cond != (excess > 0.0)) {
            return Err(format!("none at {}", at(&params)));
        }
    }
    Ok("survival condition, mean > 1 and psi < 1 agree".into())
}

/// Region labels against a direct comparison of the two extinction
/// probabilities, away from the tie locus.
pub fn dominance_consistency() -> Check {
    for params in grid() {
        let a = psi_closed_form(DispersionScheme::NoDispersion, &params).unwrap().psi;
        for (scheme, dom) in [
            (DispersionScheme::Independent(D3), dominance_independent(&params)),
            (DispersionScheme::Uniform(D3), dominance_uniform(&params)),
            (DispersionScheme::Independent(D2), classify_region(DispersionScheme::Independent(D2), &params).unwrap().dominance()),
            (DispersionScheme::Uniform(D2), classify_region(DispersionScheme::Uniform(D2), &params).unwrap().dominance()),
        ] {
            let s = psi_closed_form(scheme, &params).unwrap().psi;
            let direct = if a == 1.0 && s == 1.0 {
                Dominance::BothDie
            } else if (s - a).abs() < 1e-9 {
                continue;
            } else if s < a {
                Dominance::DispersionBetter
            } else {
                Dominance::NonDispersionBetter
            };
            if direct != dom {
                return Err(format!("{scheme} at {}: label {dom}, direct {direct} ({s} vs {a})", at(&params)));
            }
        }
    }
    Ok("dominance labels match direct psi comparison".into())
}

pub fn region_case_direct(scheme: DispersionScheme, params: &ModelParams) -> RegionCase {
    let a = psi_closed_form(DispersionScheme::NoDispersion, params).unwrap().psi;
    let s = psi_closed_form(scheme, params).unwrap().psi;
    match (a == 1.0, s == 1.0) {
        (true, true) => RegionCase::BothDie,
        (true, false) => RegionCase::OnlyDispersalSurvives,
        (false, true) => RegionCase::OnlyNonDispersalSurvives,
        _ if (s - a).abs() <= CLAMP_BAND => RegionCase::Tie,
        _ if s < a => RegionCase::DispersalBetter,
        _ => RegionCase::NonDispersalBetter,
    }
}

pub fn parallel_determinism() -> Check {
    let params = ModelParams::new(2.0, 0.6).unwrap();
    let config = SimConfig::new(4_000, 128, 10_000, 2024).unwrap();
    let mut runs = Vec::new();
    for threads in [1, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        for scheme in [DispersionScheme::NoDispersion, DispersionScheme::Independent(D3), DispersionScheme::Uniform(D2)] {
            runs.push((threads, scheme, pool.install(|| estimate_psi(scheme, &params, &config).unwrap())));
        }
    }
    let (one, four) = runs.split_at(3);
    for (a, b) in one.iter().zip(four) {
        if a.2 != b.2 {
            return Err(format!("{}: 1 thread {:?} vs 4 threads {:?}", a.1, a.2, b.2));
        }
    }
    Ok("identical estimates on 1 and 4 threads".into())
}
