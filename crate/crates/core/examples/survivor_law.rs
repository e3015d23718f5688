//! Who is left after a catastrophe: the survivor law and the occupancy of
//! child vertices when those survivors disperse.
//!
//! Run with `cargo run --example survivor_law -- 2 0.5`.

use catlab::distributions::{occupancy_pmf_independent, occupancy_pmf_uniform, survivor_pmf, surjection_count};
use catlab::ModelParams;

fn main() -> catlab::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (lambda, p) = match args[..] {
        [l, p] => (l, p),
        _ => (1.0, 0.5),
    };
    let params = ModelParams::new(lambda, p)?;
    let law = params.survivor_law();
    println!("lambda={lambda} p={p}: beta={:.6} alpha={:.6} c={:.6}", law.beta, law.alpha, law.c);
    println!("{:>3} {:>10}", "n", "P(N=n)");
    for n in 0..8 {
        println!("{n:>3} {:>10.6}", survivor_pmf(&params, n));
    }

    println!("\nsurvivors r spread over d=3 children");
    println!("{:>3} {:>28} {:>28}", "r", "independent P(Y=1,2,3)", "uniform P(Y=1,2,3)");
    for r in 1..=6u64 {
        let row = |f: fn(u32, u64, u32) -> catlab::Result<f64>| -> String {
            (1..=3).map(|y| if u64::from(y) <= r { format!("{:8.4}", f(3, r, y).unwrap()) } else { format!("{:>8}", "-") }).collect()
        };
        println!("{r:>3} {:>28} {:>28}", row(occupancy_pmf_independent), row(occupancy_pmf_uniform));
    }
    println!("\nsurjections of 6 survivors onto 3 children: {}", surjection_count(6, 3)?);
    Ok(())
}
