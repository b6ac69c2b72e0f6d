//! CSV and JSON writers. Floats are always printed with 17 significant
//! digits in scientific notation so that output is byte-stable.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::config::{OutputFormat, RunConfig};
use crate::error::{CliError, CliResult};
use crate::run::{ObservableRow, OBSERVABLE_COLUMNS};

pub const SCHEMA_VERSION: u32 = 1;

/// `{:.16e}`, or `null`/`nan` spellings for non-finite values.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn json_float(x: f64) -> String {
    if x.is_finite() {
        fmt_float(x)
    } else {
        "null".into()
    }
}

pub fn run_header() -> Vec<&'static str> {
    let mut h = vec!["t", "method"];
    h.extend(OBSERVABLE_COLUMNS);
    h
}

pub fn write_run(cfg: &RunConfig, rows: &[ObservableRow]) -> CliResult<()> {
    let text = match cfg.format {
        OutputFormat::Csv => run_csv(cfg, rows)?,
        OutputFormat::Json => run_json(cfg, rows),
    };
    write_file(&cfg.output, text.as_bytes())
}

pub fn run_csv(cfg: &RunConfig, rows: &[ObservableRow]) -> CliResult<String> {
    let mut records = Vec::with_capacity(rows.len());
    for r in rows {
        let mut rec = vec![fmt_float(r.t), r.method.name().to_string()];
        rec.extend(r.values().iter().map(|&v| fmt_float(v)));
        records.push(rec);
    }
    csv_document(
        &[
            ("schema_version", SCHEMA_VERSION.to_string()),
            ("config", cfg.to_json()),
        ],
        &run_header(),
        &records,
    )
}

pub fn run_json(cfg: &RunConfig, rows: &[ObservableRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{{\"schema_version\":{SCHEMA_VERSION},\"config\":{},\"rows\":[",
        cfg.to_json()
    ));
    for (i, r) in rows.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!(
            "\n{{\"t\":{},\"method\":\"{}\"",
            json_float(r.t),
            r.method.name()
        ));
        for (name, v) in OBSERVABLE_COLUMNS.iter().zip(r.values()) {
            out.push_str(&format!(",\"{name}\":{}", json_float(v)));
        }
        out.push('}');
    }
    out.push_str("\n]}\n");
    out
}

/// `# key=value` comment lines followed by a CSV table.
pub fn csv_document(comments: &[(&str, String)], header: &[&str], records: &[Vec<String>]) -> CliResult<String> {
    let mut buf = Vec::new();
    for (k, v) in comments {
        writeln!(buf, "# {k}={v}").expect("writing to memory");
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let fail = |e: csv::Error| CliError::Io(format!("csv encoding: {e}"));
        w.write_record(header).map_err(fail)?;
        for r in records {
            w.write_record(r).map_err(fail)?;
        }
        w.flush().map_err(|e| CliError::Io(format!("csv encoding: {e}")))?;
    }
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}
