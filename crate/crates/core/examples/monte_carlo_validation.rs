//! Monte Carlo estimates against the analytic values.
//!
//! Arguments: replications (default 20000) and seed (default 1).

use std::time::Instant;

use catlab::analytic::psi_closed_form;
use catlab::simulator::{estimate_psi, SimConfig};
use catlab::{Degree, DispersionScheme, ModelParams};

fn main() -> catlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let reps: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(20_000);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);
    let config = SimConfig::new(reps, 256, 10_000, seed)?;
    println!("{:<18} {:>6} {:>5} {:>10} {:>10} {:>7}", "scheme", "lambda", "p", "psi", "psi_hat", "z");
    let start = Instant::now();
    for (lambda, p) in [(2.0, 0.6), (8.0, 0.3)] {
        let params = ModelParams::new(lambda, p)?;
        for d in [Degree::TWO, Degree::THREE] {
            for scheme in [DispersionScheme::Optimal(d), DispersionScheme::Independent(d), DispersionScheme::Uniform(d)] {
                let psi = psi_closed_form(scheme, &params)?.psi;
                let est = estimate_psi(scheme, &params, &config)?;
                let z = (est.psi_hat - psi) / (psi * (1.0 - psi) / reps as f64).sqrt();
                println!("{:<18} {lambda:>6} {p:>5} {psi:>10.6} {:>10.6} {z:>7.2}", scheme.to_string(), est.psi_hat);
            }
        }
    }
    println!("{reps} replications per row in {:.2?}", start.elapsed());
    Ok(())
}
