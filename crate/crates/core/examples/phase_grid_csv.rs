//! Writes a phase-diagram grid to CSV, the same format as `catlab grid`.
//!
//!     cargo run --example phase_grid_csv -- phase.csv

use std::fs::File;
use std::io::BufWriter;

use catlab::output::write_phase_csv;
use catlab::phase::{phase_grid, GridRange};
use catlab::Degree;

fn main() -> catlab::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "phase_d3.csv".to_string());
    let lambdas: GridRange = "0.1:6:0.1".parse()?;
    let ps: GridRange = "0.02:0.98:0.02".parse()?;
    let rows = phase_grid(&lambdas, &ps, Degree::THREE)?;
    write_phase_csv(&rows, BufWriter::new(File::create(&path)?))?;

    let count = |label: &str| rows.iter().filter(|r| r.dom_unif.as_str() == label).count();
    println!("{} cells written to {path}", rows.len());
    for label in ["both-die", "dispersion-better", "non-dispersion-better", "tie"] {
        println!("  uniform {label:<22} {}", count(label));
    }
    Ok(())
}
