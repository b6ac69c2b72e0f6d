//! Single-step error of the split propagators against the dense oracle.

use std::fmt;

use lindblad_jc::zassenhaus::propagate_with_bound;
use lindblad_jc::{oracle_propagate, trace_distance, OracleConfig, PropagatorOrder};

use crate::config::{OutputFormat, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{self, fmt_float, SCHEMA_VERSION};

/// Errors below this are treated as exact and get no slope fit.
pub const EXACT_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Slope {
    Exact,
    Fitted(f64),
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::Exact => f.write_str("exact"),
            Slope::Fitted(s) => f.write_str(&fmt_float(*s)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub h: f64,
    pub err_split2: f64,
    pub err_split3: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyTable {
    pub rows: Vec<StudyRow>,
    pub slope_split2: Slope,
    pub slope_split3: Slope,
}

/// Parses `0.02,0.04,…`.
pub fn parse_h_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Config(format!("field `h_list`: cannot parse \"{x}\": {e}")))
        })
        .collect()
}

fn check_h_list(h_list: &[f64]) -> CliResult<()> {
    let bad = |msg: String| Err(CliError::Config(format!("field `h_list`: {msg}")));
    if h_list.len() < 3 {
        return bad(format!("need at least 3 step sizes, got {}", h_list.len()));
    }
    if h_list.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return bad("step sizes must be positive".into());
    }
    let ratio = h_list[1] / h_list[0];
    if (ratio - 1.0).abs() < 1e-12 || h_list.windows(2).any(|w| ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-9) {
        return bad("step sizes must form a geometric sequence".into());
    }
    Ok(())
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn fit(hs: &[f64], errs: &[f64]) -> Slope {
    if errs.iter().all(|&e| e < EXACT_FLOOR) {
        Slope::Exact
    } else {
        Slope::Fitted(loglog_slope(hs, errs))
    }
}

pub fn convergence_study(cfg: &RunConfig, h_list: &[f64]) -> CliResult<StudyTable> {
    cfg.validate()?;
    check_h_list(h_list)?;
    let p = cfg.model_params()?;
    let rho0 = cfg.initial_state()?;
    let mut rows = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let exact = oracle_propagate(&rho0, h, &p, &OracleConfig::dense())?;
        let s2 = propagate_with_bound(&rho0, h, &p, PropagatorOrder::Split2, None)?;
        let s3 = propagate_with_bound(&rho0, h, &p, PropagatorOrder::Split3, None)?;
        rows.push(StudyRow {
            h,
            err_split2: trace_distance(&s2, &exact)?,
            err_split3: trace_distance(&s3, &exact)?,
        });
    }
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let e2: Vec<f64> = rows.iter().map(|r| r.err_split2).collect();
    let e3: Vec<f64> = rows.iter().map(|r| r.err_split3).collect();
    Ok(StudyTable {
        slope_split2: fit(&hs, &e2),
        slope_split3: fit(&hs, &e3),
        rows,
    })
}

pub fn write_study(cfg: &RunConfig, table: &StudyTable) -> CliResult<()> {
    let text = match cfg.format {
        OutputFormat::Csv => {
            let records: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|r| vec![fmt_float(r.h), fmt_float(r.err_split2), fmt_float(r.err_split3)])
                .collect();
            output::csv_document(
                &[
                    ("schema_version", SCHEMA_VERSION.to_string()),
                    ("study", "convergence".into()),
                    ("config", cfg.to_json()),
                    ("slope_split2", table.slope_split2.to_string()),
                    ("slope_split3", table.slope_split3.to_string()),
                ],
                &["h", "err_split2", "err_split3"],
                &records,
            )?
        }
        OutputFormat::Json => {
            let slope = |s: Slope| match s {
                Slope::Exact => "\"exact\"".to_string(),
                Slope::Fitted(v) => fmt_float(v),
            };
            let rows: Vec<String> = table
                .rows
                .iter()
                .map(|r| {
                    format!(
                        "{{\"h\":{},\"err_split2\":{},\"err_split3\":{}}}",
                        fmt_float(r.h),
                        fmt_float(r.err_split2),
                        fmt_float(r.err_split3)
                    )
                })
                .collect();
            format!(
                "{{\"schema_version\":{SCHEMA_VERSION},\"study\":\"convergence\",\"config\":{},\"slope_split2\":{},\"slope_split3\":{},\"rows\":[{}]}}\n",
                cfg.to_json(),
                slope(table.slope_split2),
                slope(table.slope_split3),
                rows.join(",")
            )
        }
    };
    output::write_file(&cfg.output, text.as_bytes())
}

impl fmt::Display for StudyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>12} {:>14} {:>14}", "h", "err_split2", "err_split3")?;
        for r in &self.rows {
            writeln!(f, "{:>12.4e} {:>14.6e} {:>14.6e}", r.h, r.err_split2, r.err_split3)?;
        }
        writeln!(f, "slope split2: {}", self.slope_split2)?;
        write!(f, "slope split3: {}", self.slope_split3)
    }
}
