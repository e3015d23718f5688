//! Critical growth rates as functions of p, and where the d = 3 curves cross
//! the no-dispersion curve.

use catlab::phase::{critical_lambda, crossing_p, uniform_split_lambda};
use catlab::{Degree, DispersionScheme};

fn main() -> catlab::Result<()> {
    let d3 = Degree::THREE;
    let curves = [
        ("none", DispersionScheme::NoDispersion),
        ("opt3", DispersionScheme::Optimal(d3)),
        ("ind3", DispersionScheme::Independent(d3)),
        ("uni3", DispersionScheme::Uniform(d3)),
    ];
    print!("{:>5}", "p");
    for (name, _) in &curves {
        print!("{name:>11}");
    }
    println!();
    for k in 1..20 {
        let p = k as f64 / 20.0;
        print!("{p:>5.2}");
        for (_, scheme) in &curves {
            print!("{:>11.5}", critical_lambda(*scheme, p)?);
        }
        println!();
    }
    println!("independent d=3 crosses no dispersion at p = {:.10}", crossing_p(DispersionScheme::Independent(d3))?);
    println!("uniform d=3 crosses no dispersion at p = {:.10}", crossing_p(DispersionScheme::Uniform(d3))?);
    println!("uniform tie structure changes at lambda = {:.8}", uniform_split_lambda()?);
    Ok(())
}
