//! Plain-text formats: numeric CSV tables and JSON path descriptions.

use std::io::{BufRead, BufReader, Read};

use crate::error::{Error, Result};
use crate::path::{CadlagPath, PathSpec};

/// Reads a two-column numeric CSV with the exact header `expected`.
fn read_pairs<R: Read>(reader: R, expected: [&str; 2]) -> Result<Vec<(f64, f64)>> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))??;
    let cols: Vec<&str> = header.trim().split(',').map(str::trim).collect();
    if cols != expected {
        return Err(Error::Parse(format!(
            "expected header `{}`, found `{}`",
            expected.join(","),
            header.trim()
        )));
    }
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let parse = |f: Option<&str>| -> Result<f64> {
            f.ok_or_else(|| Error::Parse(format!("line {}: missing field", lineno + 2)))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
        };
        let a = parse(fields.next())?;
        let b = parse(fields.next())?;
        if fields.next().is_some() {
            return Err(Error::Parse(format!("line {}: too many fields", lineno + 2)));
        }
        out.push((a, b));
    }
    Ok(out)
}

/// `(μ, A(μ))` pairs from a CSV with header `mu,A`.
pub fn read_table_csv<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    read_pairs(reader, ["mu", "A"])
}

/// Sampled path from a CSV with header `s,value`.
pub fn read_path_csv<R: Read>(reader: R) -> Result<CadlagPath> {
    CadlagPath::sampled(read_pairs(reader, ["s", "value"])?)
}

pub fn read_path_json<R: Read>(reader: R) -> Result<CadlagPath> {
    let spec: PathSpec = serde_json::from_reader(reader).map_err(|e| Error::Parse(e.to_string()))?;
    spec.try_into()
}

/// Loads a path, choosing the format by extension (`.csv` or `.json`).
pub fn load_path(path: &std::path::Path) -> Result<CadlagPath> {
    let file = std::fs::File::open(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_path_csv(file),
        Some("json") => read_path_json(file),
        _ => Err(Error::Parse(format!(
            "{}: path files must end in .csv or .json",
            path.display()
        ))),
    }
}
