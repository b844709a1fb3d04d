//! Output files. Floats in CSV use 17 significant digits; JSON uses the
//! shortest representation that round-trips, and `NaN` becomes `null`.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::RunError;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), RunError> {
    fs::write(dir.join(name), text).map_err(|e| RunError::io(format!("cannot write {name}: {e}")))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| RunError::io(e.to_string()))?;
    text.push('\n');
    write_text(dir, name, &text)
}

/// Header line plus one line per row, fields joined by `sep`.
pub fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>, sep: &str) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(sep));
        out.push('\n');
    }
    out
}

pub fn join_ints(v: &[i64]) -> String {
    v.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")
}
