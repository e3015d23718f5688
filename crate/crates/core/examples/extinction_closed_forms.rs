//! Extinction probability for every scheme with a closed form, next to the
//! smallest fixed point of the offspring generating function.

use catlab::analytic::{psi_closed_form, psi_numeric};
use catlab::{Degree, DispersionScheme, ModelParams};

fn main() -> catlab::Result<()> {
    let schemes = [
        DispersionScheme::NoDispersion,
        DispersionScheme::Optimal(Degree::TWO),
        DispersionScheme::Optimal(Degree::THREE),
        DispersionScheme::Independent(Degree::TWO),
        DispersionScheme::Independent(Degree::THREE),
        DispersionScheme::Uniform(Degree::TWO),
        DispersionScheme::Uniform(Degree::THREE),
    ];
    for (lambda, p) in [(2.0, 0.5), (4.0, 0.3), (0.5, 0.9)] {
        let params = ModelParams::new(lambda, p)?;
        println!("lambda={lambda} p={p}");
        for scheme in schemes {
            let closed = psi_closed_form(scheme, &params)?;
            let numeric = psi_numeric(scheme, &params)?;
            println!(
                "  {:<18} psi={:.10}  fixed point={:.10}  survives={}",
                scheme.to_string(),
                closed.psi,
                numeric.psi,
                closed.survives
            );
        }
    }
    Ok(())
}
