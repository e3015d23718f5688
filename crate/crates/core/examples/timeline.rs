//! One colony in continuous time, without dispersion, and the chance that it
//! has died out by a given horizon.

use catlab::analytic::psi_no_dispersion;
use catlab::simulator::{replication_rng, simulate_timeline, TimelineEvent};
use catlab::ModelParams;

fn main() -> catlab::Result<()> {
    let params = ModelParams::new(2.0, 0.5)?;
    let mut rng = replication_rng(7, 0);
    let trace = simulate_timeline(&params, 5.0, &mut rng)?;
    for event in trace.events.iter().take(20) {
        match *event {
            TimelineEvent::Birth { time, size } => println!("{time:8.4}  birth        size {size}"),
            TimelineEvent::Catastrophe { time, before, after } => {
                println!("{time:8.4}  catastrophe  {before} -> {after}")
            }
        }
    }
    match trace.extinction_time {
        Some(t) => println!("extinct at t = {t:.4}"),
        None => println!("alive at t = {} with {} events", trace.horizon, trace.events.len()),
    }

    let runs = 20_000;
    println!("\nP(extinct by H), {runs} runs; limit {}", psi_no_dispersion(&params).psi);
    for h in [0.5, 1.0, 2.0, 5.0, 20.0, 100.0] {
        let dead = (0..runs)
            .filter(|&i| {
                let mut rng = replication_rng(11, i);
                simulate_timeline(&params, h, &mut rng).map(|t| t.extinction_time.is_some()).unwrap_or(false)
            })
            .count();
        println!("H={h:>6}  {:.4}", dead as f64 / runs as f64);
    }
    Ok(())
}
