//! Serialization: 17 significant digits, sorted JSON keys, column-major CSV.

use std::io::Write;
use std::path::Path;

use mvcharlier::Matrix;
use serde_json::{Map, Number, Value};

use crate::CliError;

/// `x` with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        let s = format!("{x:.16e}");
        match s.split_once('e') {
            Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
            _ => s,
        }
    } else {
        x.to_string()
    }
}

/// JSON number carrying the 17-digit text verbatim; `null` if not finite.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(fmt_num(x).parse::<Number>().expect("formatted float is valid JSON"))
}

/// Matrix as a list of rows.
pub fn matrix(m: &Matrix) -> Value {
    Value::Array(m.rows().iter().map(|r| Value::Array(r.iter().map(|&v| num(v)).collect())).collect())
}

pub fn object<const K: usize>(pairs: [(&str, Value); K]) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}

/// Column-major `(i,j)` labels for an `n x n` matrix.
pub fn matrix_headers(n: usize) -> Vec<String> {
    (1..=n).flat_map(|j| (1..=n).map(move |i| format!("({i},{j})"))).collect()
}

/// Column-major entries of `m`.
pub fn matrix_cells(m: &Matrix) -> Vec<String> {
    let n = m.size();
    (1..=n).flat_map(|j| (1..=n).map(move |i| fmt_num(m.get(i, j)))).collect()
}

/// CSV text from a header and rows.
pub fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV fields are UTF-8"))
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Writes `text` to `out`, or to stdout when `out` is `None`.
///
/// # Errors
/// [`CliError::Io`] if the write fails.
pub fn write_out(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    let res = match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    res.map_err(|e| CliError::Io(e.to_string()))
}
