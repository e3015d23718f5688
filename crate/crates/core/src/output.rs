//! Serialized records, number formatting and the phase-grid CSV.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DispersionScheme, ExtinctionResult};
use crate::phase::{Dominance, PhaseRow, RegionCase};
use crate::simulator::SimEstimate;

/// Frozen column order of the phase-grid CSV.
pub const CSV_HEADER: [&str; 10] =
    ["lambda", "p", "psi_A", "psi_o", "psi_i", "psi_u", "dom_indep", "dom_unif", "region_indep", "region_unif"];

/// Significant digits for human-readable and CSV numbers.
pub const SIG_DIGITS: usize = 12;

/// Formats `x` with [`SIG_DIGITS`] significant digits in the style of C's
/// `%.12g`: fixed notation for moderate exponents, scientific otherwise,
/// trailing zeros removed. Independent of locale.
pub fn fmt_num(x: f64) -> String {
    fmt_sig(x, SIG_DIGITS)
}

pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// All four extinction probabilities at one point with the d = 2 or 3
/// region verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub lambda: f64,
    pub p: f64,
    pub d: u32,
    pub psi_a: f64,
    pub psi_o: f64,
    pub psi_i: f64,
    pub psi_u: f64,
    pub dom_indep: Dominance,
    pub dom_unif: Dominance,
    pub region_indep: RegionCase,
    pub region_unif: RegionCase,
    pub case_indep: String,
    pub case_unif: String,
}

impl From<&PhaseRow> for ComparisonReport {
    fn from(row: &PhaseRow) -> Self {
        ComparisonReport {
            lambda: row.lambda,
            p: row.p,
            d: row.d.get(),
            psi_a: row.psi_a,
            psi_o: row.psi_o,
            psi_i: row.psi_i,
            psi_u: row.psi_u,
            dom_indep: row.dom_indep,
            dom_unif: row.dom_unif,
            region_indep: row.region_indep,
            region_unif: row.region_unif,
            case_indep: row.region_indep.label(DispersionScheme::Independent(row.d)),
            case_unif: row.region_unif.label(DispersionScheme::Uniform(row.d)),
        }
    }
}

/// Anything the command line prints with `--json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
pub enum OutputRecord {
    Extinction {
        #[serde(flatten)]
        scheme: DispersionScheme,
        lambda: f64,
        p: f64,
        result: ExtinctionResult,
    },
    PhaseRow(PhaseRow),
    SimEstimate {
        #[serde(flatten)]
        scheme: DispersionScheme,
        lambda: f64,
        p: f64,
        seed: u64,
        estimate: SimEstimate,
        /// Analytic value the estimate is compared with, if any.
        reference: Option<ExtinctionResult>,
    },
    Comparison(ComparisonReport),
}

impl OutputRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidParams(format!("bad record: {e}")))
    }
}

fn csv_fields(row: &PhaseRow) -> [String; 10] {
    [
        fmt_num(row.lambda),
        fmt_num(row.p),
        fmt_num(row.psi_a),
        fmt_num(row.psi_o),
        fmt_num(row.psi_i),
        fmt_num(row.psi_u),
        row.dom_indep.as_str().to_string(),
        row.dom_unif.as_str().to_string(),
        row.region_indep.label(DispersionScheme::Independent(row.d)),
        row.region_unif.label(DispersionScheme::Uniform(row.d)),
    ]
}

/// Writes the header and one line per row, in the given order.
pub fn write_phase_csv<W: Write>(rows: &[PhaseRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(CSV_HEADER).map_err(io)?;
    for row in rows {
        w.write_record(csv_fields(row)).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// A gnuplot script drawing the extinction-probability curves of a grid
/// CSV against `p`, one panel block per `lambda`.
pub fn gnuplot_script(csv_path: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'p'\n\
         set ylabel 'extinction probability'\n\
         set yrange [0:1.05]\n\
         stats '{csv_path}' using 1 nooutput\n\
         plot for [col=3:6] '{csv_path}' using 2:col with linespoints\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Degree, ModelParams};

    #[test]
    fn formatting_matches_printf_g() {
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(-2.25), "-2.25");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_num(123456.0), "123456");
        assert_eq!(fmt_num(1e-7), "1e-07");
        assert_eq!(fmt_num(1.5e20), "1.5e+20");
        assert_eq!(fmt_num(0.0001), "0.0001");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(f64::NAN), "nan");
        assert_eq!(fmt_sig(0.2391390549, 6), "0.239139");
    }

    #[test]
    fn formatting_keeps_twelve_digits() {
        for x in [0.189955190113, 3.18166744021, 0.000123456789012, 98765.4321098] {
            let back: f64 = fmt_num(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-11, "{x}");
        }
    }

    #[test]
    fn empty_grid_is_header_only() {
        let mut buf = Vec::new();
        write_phase_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), CSV_HEADER.join(",") + "\n");
    }

    #[test]
    fn records_round_trip() {
        let params = ModelParams::new(4.0, 0.21).unwrap();
        let row = PhaseRow::compute(Degree::THREE, &params).unwrap();
        let records = [
            OutputRecord::PhaseRow(row.clone()),
            OutputRecord::Comparison(ComparisonReport::from(&row)),
            OutputRecord::Extinction {
                scheme: DispersionScheme::Uniform(Degree::THREE),
                lambda: 4.0,
                p: 0.21,
                result: ExtinctionResult::new(row.psi_u, crate::model::Method::ClosedForm, 1e-17),
            },
            OutputRecord::Extinction {
                scheme: DispersionScheme::NoDispersion,
                lambda: 4.0,
                p: 0.21,
                result: ExtinctionResult::new(row.psi_a, crate::model::Method::ClosedForm, 0.0),
            },
        ];
        for r in records {
            assert_eq!(OutputRecord::from_json(&r.to_json()).unwrap(), r);
        }
    }
}
