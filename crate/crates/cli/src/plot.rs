//! Gnuplot script generation for run CSV files. Nothing is rendered here.

use std::fs;
use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::output;

/// Writes a gnuplot script with one panel per observable column of
/// `csv_path` and one curve per method. Columns are addressed by header
/// name. Returns the script text.
pub fn emit_plotscript(csv_path: &Path, script_path: &Path) -> CliResult<String> {
    let text = fs::read_to_string(csv_path).map_err(|e| CliError::io(csv_path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Io(format!("{}: {e}", csv_path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let method_col = header
        .iter()
        .position(|h| h == "method")
        .ok_or_else(|| CliError::Io(format!("{}: no `method` column", csv_path.display())))?;
    if !header.iter().any(|h| h == "t") {
        return Err(CliError::Io(format!("{}: no `t` column", csv_path.display())));
    }
    let mut methods: Vec<String> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Io(format!("{}: {e}", csv_path.display())))?;
        let m = rec.get(method_col).unwrap_or_default();
        if !methods.iter().any(|x| x == m) {
            methods.push(m.to_string());
        }
    }
    let observables: Vec<&String> = header.iter().filter(|h| *h != "t" && *h != "method").collect();
    let file = csv_path.to_string_lossy().replace('"', "\\\"");
    let rows = observables.len().div_ceil(2);

    let mut s = String::new();
    s.push_str(&format!("# gnuplot script for {file}\n"));
    s.push_str("set datafile separator \",\"\n");
    s.push_str("set datafile commentschars \"#\"\n");
    s.push_str("set datafile columnheaders\n");
    s.push_str(&format!("methods = \"{}\"\n", methods.join(" ")));
    s.push_str("set xlabel \"t\"\n");
    s.push_str(&format!("set multiplot layout {rows},2\n"));
    for col in observables {
        s.push_str(&format!("set title \"{col}\"\n"));
        s.push_str(&format!(
            "plot for [m in methods] \"{file}\" using (column(\"t\")):(strcol(\"method\") eq m ? column(\"{col}\") : NaN) with lines title m\n"
        ));
    }
    s.push_str("unset multiplot\n");
    output::write_file(script_path, s.as_bytes())?;
    Ok(s)
}
