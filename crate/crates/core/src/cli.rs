//! Command implementations behind the `catlab` binary.
//!
//! Exit codes: 0 success, 2 bad input, 3 closed form unavailable for the
//! requested degree, 4 I/O failure, 1 anything else. Set `CATLAB_THREADS`
//! to bound the worker threads used by `grid`, `simulate` and `psi --method mc`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::analytic::{psi_closed_form, psi_numeric};
use crate::error::{Error, Result};
use crate::model::{Degree, DispersionScheme, ExtinctionResult, Method, ModelParams};
use crate::output::{fmt_num, gnuplot_script, write_phase_csv, ComparisonReport, OutputRecord};
use crate::phase::{critical_lambda, crossing_p, phase_grid, GridRange, PhaseRow};
use crate::simulator::{estimate_psi, SimConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub const THREADS_ENV: &str = "CATLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "catlab", version, about = "Extinction probabilities for colonies under geometric catastrophes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    None,
    Optimal,
    Independent,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Closed,
    Numeric,
    Mc,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extinction probability at one parameter point.
    Psi {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        /// Number of child vertices (dispersal schemes only).
        #[arg(long)]
        d: Option<u32>,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        #[arg(long, value_enum, default_value = "closed")]
        method: MethodArg,
        #[arg(long)]
        json: bool,
        /// Replications for `--method mc`.
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Critical growth rate at a given p, or the crossing point with the
    /// no-dispersion curve.
    Critical {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long, allow_negative_numbers = true, required_unless_present = "crossing", conflicts_with = "crossing")]
        p: Option<f64>,
        #[arg(long)]
        crossing: bool,
    },
    /// Phase-diagram grid as CSV.
    Grid {
        /// start:stop:step, inclusive.
        #[arg(long)]
        lambda_range: String,
        #[arg(long)]
        p_range: String,
        #[arg(long, default_value_t = 3)]
        d: u32,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a gnuplot script next to the CSV.
        #[arg(long, requires = "out")]
        gnuplot: bool,
    },
    /// Monte Carlo estimate of the extinction probability.
    Simulate {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Population cap and generation cap, as `C,G`.
        #[arg(long, default_value = "1000,10000")]
        caps: String,
        #[arg(long)]
        json: bool,
    },
    /// All four strategies at one point, with dominance verdicts.
    Compare {
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        #[arg(long, default_value_t = 3)]
        d: u32,
        #[arg(long)]
        json: bool,
    },
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParams(_) | Error::Domain(_) => EXIT_BAD_INPUT,
        Error::UnsupportedClosedForm { .. } => EXIT_UNSUPPORTED,
        Error::Io(_) => EXIT_IO,
        Error::RootFinding(_) => EXIT_FAILURE,
    }
}

fn scheme(arg: SchemeArg, d: Option<u32>) -> Result<DispersionScheme> {
    let name = match arg {
        SchemeArg::None => return Ok(DispersionScheme::NoDispersion),
        SchemeArg::Optimal => "optimal",
        SchemeArg::Independent => "independent",
        SchemeArg::Uniform => "uniform",
    };
    let d = d.ok_or_else(|| Error::InvalidParams(format!("--d is required for the {name} scheme")))?;
    DispersionScheme::from_name(name, d)
}

fn parse_caps(s: &str) -> Result<(u64, u64)> {
    let bad = || Error::InvalidParams(format!("--caps {s:?} must look like COLONIES,GENERATIONS"));
    let (c, g) = s.split_once(',').ok_or_else(bad)?;
    Ok((c.trim().parse().map_err(|_| bad())?, g.trim().parse().map_err(|_| bad())?))
}

fn extinction_text(scheme: DispersionScheme, params: &ModelParams, r: &ExtinctionResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scheme      {scheme}");
    let _ = writeln!(s, "lambda      {}", fmt_num(params.lambda()));
    let _ = writeln!(s, "p           {}", fmt_num(params.p()));
    let _ = writeln!(s, "psi         {}", fmt_num(r.psi));
    let _ = writeln!(s, "survives    {}", r.survives);
    let _ = writeln!(s, "method      {}", r.method);
    let _ = writeln!(s, "diagnostic  {}", fmt_num(r.diagnostic));
    if r.degenerate {
        let _ = writeln!(s, "note        degenerate offspring law P(Y=1)=1");
    }
    s
}

fn cmd_psi(
    scheme: DispersionScheme,
    params: &ModelParams,
    method: MethodArg,
    reps: u64,
    seed: u64,
    json: bool,
) -> Result<String> {
    let result = match method {
        MethodArg::Closed => psi_closed_form(scheme, params).map_err(|e| match e {
            Error::UnsupportedClosedForm { scheme } => Error::UnsupportedClosedForm {
                scheme: format!("{scheme} (try --method numeric)"),
            },
            other => other,
        })?,
        MethodArg::Numeric => psi_numeric(scheme, params)?,
        MethodArg::Mc => {
            let config = SimConfig::new(reps, 1_000, 10_000, seed)?;
            let est = estimate_psi(scheme, params, &config)?;
            ExtinctionResult { diagnostic: est.stderr, ..ExtinctionResult::new(est.psi_hat, Method::MonteCarlo, 0.0) }
        }
    };
    Ok(if json {
        OutputRecord::Extinction { scheme, lambda: params.lambda(), p: params.p(), result }.to_json() + "\n"
    } else {
        extinction_text(scheme, params, &result)
    })
}

fn cmd_critical(scheme: DispersionScheme, p: Option<f64>, crossing: bool) -> Result<String> {
    if crossing {
        let x = crossing_p(scheme)?;
        return Ok(format!("{}\n", fmt_num(x)));
    }
    let p = p.ok_or_else(|| Error::InvalidParams("either --p or --crossing is required".into()))?;
    ModelParams::new(1.0, p)?;
    Ok(format!("{}\n", fmt_num(critical_lambda(scheme, p)?)))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn cmd_grid(lambda_range: &str, p_range: &str, d: u32, out: Option<&Path>, gnuplot: bool) -> Result<String> {
    let lambdas: GridRange = lambda_range.parse()?;
    let ps: GridRange = p_range.parse()?;
    let d = Degree::new(d)?;
    let rows = phase_grid(&lambdas, &ps, d)?;
    match out {
        None => {
            let mut buf = Vec::new();
            write_phase_csv(&rows, &mut buf)?;
            Ok(String::from_utf8(buf).expect("csv is utf-8"))
        }
        Some(path) => {
            let mut w = create(path)?;
            write_phase_csv(&rows, &mut w)?;
            w.flush()?;
            let mut msg = format!("wrote {} rows to {}\n", rows.len(), path.display());
            if gnuplot {
                let script = path.with_extension("gp");
                let mut g = create(&script)?;
                g.write_all(gnuplot_script(&path.display().to_string()).as_bytes())?;
                g.flush()?;
                let _ = writeln!(msg, "wrote {}", script.display());
            }
            Ok(msg)
        }
    }
}

fn cmd_simulate(
    scheme: DispersionScheme,
    params: &ModelParams,
    reps: u64,
    seed: u64,
    caps: &str,
    json: bool,
) -> Result<String> {
    let (colony_cap, generation_cap) = parse_caps(caps)?;
    let config = SimConfig::new(reps, colony_cap, generation_cap, seed)?;
    let est = estimate_psi(scheme, params, &config)?;
    let reference = match psi_closed_form(scheme, params) {
        Ok(r) => Some(r),
        Err(Error::UnsupportedClosedForm { .. }) => psi_numeric(scheme, params).ok(),
        Err(e) => return Err(e),
    };
    if json {
        let rec = OutputRecord::SimEstimate { scheme, lambda: params.lambda(), p: params.p(), seed, estimate: est, reference };
        return Ok(rec.to_json() + "\n");
    }
    let mut s = String::new();
    let _ = writeln!(s, "scheme      {scheme}");
    let _ = writeln!(s, "lambda      {}", fmt_num(params.lambda()));
    let _ = writeln!(s, "p           {}", fmt_num(params.p()));
    let _ = writeln!(s, "psi_hat     {} +/- {}", fmt_num(est.psi_hat), fmt_num(est.stderr));
    let _ = writeln!(s, "extinct     {} of {}", est.replications_extinct, est.replications);
    let _ = writeln!(s, "capped      {} ({} by generation cap)", est.replications_cap, est.generation_cap_hits);
    if let Some(r) = reference {
        let _ = writeln!(s, "{:<11} {}", r.method.to_string(), fmt_num(r.psi));
        let sigma = (r.psi * (1.0 - r.psi) / est.replications as f64).sqrt();
        let dev = est.psi_hat - r.psi;
        if sigma > 0.0 {
            let _ = writeln!(s, "deviation   {} ({} sigma)", fmt_num(dev), fmt_num(dev / sigma));
        } else {
            let _ = writeln!(s, "deviation   {}", fmt_num(dev));
        }
    }
    if est.cap_bias_note {
        let _ = writeln!(s, "note        capped replications were counted as surviving");
    }
    Ok(s)
}

fn cmd_compare(params: &ModelParams, d: u32, json: bool) -> Result<String> {
    let d = Degree::new(d)?;
    if !d.has_closed_form() {
        return Err(Error::UnsupportedClosedForm { scheme: format!("comparison with d={d}") });
    }
    let report = ComparisonReport::from(&PhaseRow::compute(d, params)?);
    if json {
        return Ok(OutputRecord::Comparison(report).to_json() + "\n");
    }
    let mut s = String::new();
    let _ = writeln!(s, "lambda={} p={} d={}", fmt_num(report.lambda), fmt_num(report.p), report.d);
    let _ = writeln!(s, "psi_A       {}", fmt_num(report.psi_a));
    let _ = writeln!(s, "psi_{}^o     {}", report.d, fmt_num(report.psi_o));
    let _ = writeln!(s, "psi_{}^i     {}", report.d, fmt_num(report.psi_i));
    let _ = writeln!(s, "psi_{}^u     {}", report.d, fmt_num(report.psi_u));
    let _ = writeln!(s, "independent {}  {}", report.dom_indep, report.case_indep);
    let _ = writeln!(s, "uniform     {}  {}", report.dom_unif, report.case_unif);
    Ok(s)
}

/// Runs one parsed command and returns its standard output.
pub fn execute(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Psi { scheme: s, d, lambda, p, method, json, reps, seed } => {
            let params = ModelParams::new(*lambda, *p)?;
            cmd_psi(scheme(*s, *d)?, &params, *method, *reps, *seed, *json)
        }
        Command::Critical { scheme: s, d, p, crossing } => cmd_critical(scheme(*s, *d)?, *p, *crossing),
        Command::Grid { lambda_range, p_range, d, out, gnuplot } => {
            cmd_grid(lambda_range, p_range, *d, out.as_deref(), *gnuplot)
        }
        Command::Simulate { scheme: s, d, lambda, p, reps, seed, caps, json } => {
            let params = ModelParams::new(*lambda, *p)?;
            cmd_simulate(scheme(*s, *d)?, &params, *reps, *seed, caps, *json)
        }
        Command::Compare { lambda, p, d, json } => cmd_compare(&ModelParams::new(*lambda, *p)?, *d, *json),
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(None) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidParams(format!("{THREADS_ENV}={v:?} must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| Error::InvalidParams(format!("{THREADS_ENV}: {e}")))
}

/// Parses `args` (program name first), runs the command, writes to `out`
/// and `err`, and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = thread_pool().and_then(|pool| match pool {
        Some(pool) => pool.install(|| execute(&cli)),
        None => execute(&cli),
    });
    match result {
        Ok(text) => match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "catlab: {e}");
                EXIT_IO
            }
        },
        Err(e) => {
            let _ = writeln!(err, "catlab: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("catlab").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn psi_examples() {
        let (code, out, _) = run_str(&["psi", "--scheme", "none", "--lambda", "2", "--p", "0.5"]);
        assert_eq!(code, 0);
        assert!(out.contains("psi         0.5\n"), "{out}");
        let (code, out, _) = run_str(&["psi", "--scheme", "optimal", "--d", "2", "--lambda", "2", "--p", "0.5"]);
        assert_eq!(code, 0);
        assert!(out.contains("psi         0.5\n"), "{out}");
        let (code, _, err) =
            run_str(&["psi", "--scheme", "uniform", "--d", "5", "--lambda", "1", "--p", "0.5", "--method", "closed"]);
        assert_eq!(code, EXIT_UNSUPPORTED);
        assert!(err.contains("--method numeric"));
    }

    #[test]
    fn critical_examples() {
        assert_eq!(run_str(&["critical", "--scheme", "none", "--p", "0.5"]).1, "1\n");
        assert_eq!(run_str(&["critical", "--scheme", "independent", "--d", "3", "--crossing"]).1, "0.5\n");
        let out = run_str(&["critical", "--scheme", "uniform", "--d", "3", "--crossing"]).1;
        let x: f64 = out.trim().parse().unwrap();
        assert!((x - 0.239139).abs() < 1e-5);
    }

    #[test]
    fn bad_input_exit_two() {
        assert_eq!(run_str(&["psi", "--scheme", "none", "--lambda", "-1", "--p", "0.5"]).0, EXIT_BAD_INPUT);
        assert_eq!(run_str(&["psi", "--scheme", "uniform", "--lambda", "1", "--p", "0.5"]).0, EXIT_BAD_INPUT);
        assert_eq!(run_str(&["simulate", "--scheme", "none", "--lambda", "1", "--p", "0.5", "--reps", "0"]).0, EXIT_BAD_INPUT);
        assert_eq!(run_str(&["simulate", "--scheme", "none", "--lambda", "1", "--p", "0.5", "--caps", "x"]).0, EXIT_BAD_INPUT);
        assert_eq!(run_str(&["frobnicate"]).0, EXIT_BAD_INPUT);
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn compare_examples() {
        let (_, out, _) = run_str(&["compare", "--lambda", "4", "--p", "0.21"]);
        assert!(out.contains("uniform     dispersion-better  psi_3^u<psi_A<1"), "{out}");
        let (_, out, _) = run_str(&["compare", "--lambda", "1", "--p", "0.4"]);
        assert!(out.contains("independent both-die"), "{out}");
        let p = (6.0f64 / 11.0).to_string();
        let (_, out, _) = run_str(&["compare", "--lambda", "2", "--p", &p]);
        assert!(out.contains("independent tie"), "{out}");
    }

    #[test]
    fn grid_to_stdout() {
        let (code, out, _) = run_str(&["grid", "--lambda-range", "2:1:1", "--p-range", "0.1:0.9:0.1", "--d", "2"]);
        assert_eq!(code, 0);
        assert_eq!(out, "lambda,p,psi_A,psi_o,psi_i,psi_u,dom_indep,dom_unif,region_indep,region_unif\n");
    }
}
