//! Degrees above 3 have no closed form. The numeric root of the series
//! offspring law and the simulator still apply.

use catlab::analytic::{psi_closed_form, psi_numeric};
use catlab::simulator::{estimate_psi, SimConfig};
use catlab::{Degree, DispersionScheme, Error, ModelParams};

fn main() -> catlab::Result<()> {
    let params = ModelParams::new(2.0, 0.5)?;
    let config = SimConfig::new(20_000, 256, 10_000, 3)?;
    for d in 2..=8 {
        let d = Degree::new(d)?;
        let scheme = DispersionScheme::Uniform(d);
        let closed = match psi_closed_form(scheme, &params) {
            Ok(r) => format!("{:.6}", r.psi),
            Err(Error::UnsupportedClosedForm { .. }) => "-".to_string(),
            Err(e) => return Err(e),
        };
        let numeric = psi_numeric(scheme, &params)?;
        let mc = estimate_psi(scheme, &params, &config)?;
        println!(
            "{:<14} closed {closed:>9}  numeric {:.6}  simulated {:.4} +/- {:.4}",
            scheme.to_string(),
            numeric.psi,
            mc.psi_hat,
            mc.stderr
        );
    }
    Ok(())
}
