//! Which strategy gives the lower extinction probability, interval by
//! interval in p, for a fixed growth rate.
//!
//! `cargo run --example dominance_regions -- 4` prints the regions at lambda = 4.

use catlab::phase::{classify_region, region_thresholds};
use catlab::{Degree, DispersionScheme, ModelParams};

fn main() -> catlab::Result<()> {
    let lambdas: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let lambdas = if lambdas.is_empty() { vec![0.5, 1.0, 2.0, 4.0] } else { lambdas };
    for scheme in [DispersionScheme::Independent(Degree::THREE), DispersionScheme::Uniform(Degree::THREE)] {
        for &lambda in &lambdas {
            let t = region_thresholds(scheme, lambda)?;
            let mut cuts = vec![0.0, t.dispersal_survival.min(1.0), t.no_dispersal_survival];
            cuts.extend(t.tie);
            cuts.push(1.0);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            println!("{scheme} lambda={lambda}");
            for w in cuts.windows(2) {
                if w[1] - w[0] < 1e-12 {
                    continue;
                }
                let mid = 0.5 * (w[0] + w[1]);
                let case = classify_region(scheme, &ModelParams::new(lambda, mid)?)?;
                println!("  p in ({:.9}, {:.9}): {}", w[0], w[1], case.label(scheme));
                if Some(w[1]) == t.tie {
                    let at = classify_region(scheme, &ModelParams::new(lambda, w[1])?)?;
                    println!("  p = {:.9}: {}", w[1], at.label(scheme));
                }
            }
        }
    }
    Ok(())
}
