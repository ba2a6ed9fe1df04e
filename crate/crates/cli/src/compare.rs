//! Row-wise numeric comparison of the CSV artifacts of two runs.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::output::Manifest;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Absolute slack on every numeric cell.
    pub abs: f64,
    /// Extra slack in units of the larger standard error of the two rows,
    /// applied to Monte Carlo columns only.
    pub stderr_mult: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Difference {
    pub file: String,
    pub row: usize,
    pub column: String,
    pub a: String,
    pub b: String,
    pub allowed: f64,
}

#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<String>,
    pub differences: Vec<Difference>,
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table(path: &Path) -> CliResult<Table> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap_or_default()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    Ok(Table { header, rows })
}

fn parse(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok()
}

/// Noise scales keyed by `(column, T)`, shared across the tables of a run so
/// that plot data without error columns inherits them.
type NoiseIndex = HashMap<(String, String), f64>;

fn index_noise(table: &Table, into: &mut NoiseIndex) {
    let Some(t) = table.header.iter().position(|h| h == "T") else {
        return;
    };
    for row in &table.rows {
        for column in &table.header {
            if let Some(v) = own_noise(table, row, column) {
                into.insert((column.clone(), row[t].clone()), v);
            }
        }
    }
}

fn noise(table: &Table, row: &[String], column: &str, index: &NoiseIndex) -> f64 {
    own_noise(table, row, column)
        .or_else(|| {
            let t = table.header.iter().position(|h| h == "T")?;
            index.get(&(column.to_string(), row.get(t)?.clone())).copied()
        })
        .unwrap_or(0.0)
}

/// Noise scale of `column` computed from its own row; `None` when the row
/// lacks the needed error columns, `Some(0)` for deterministic columns.
fn own_noise(table: &Table, row: &[String], column: &str) -> Option<f64> {
    let get = |name: &str| {
        table
            .header
            .iter()
            .position(|h| h == name)
            .and_then(|i| row.get(i))
            .and_then(|c| parse(c))
    };
    let has_p = table.header.iter().any(|h| h == "p_hat");
    match column {
        "p_hat" | "std_err" | "value" => get("std_err"),
        "abs_gap" if !has_p => get("std_err"),
        "mc_p_hat" | "mc_std_err" => get("mc_std_err"),
        // delta method: se of −ln p / T
        "log_rate" | "abs_gap" => match (get("std_err"), get("p_hat"), get("T")) {
            (Some(se), Some(p), Some(t)) if p > 0.0 && t > 0.0 => Some(se / (p * t)),
            (Some(_), Some(_), Some(_)) => Some(0.0),
            _ => None,
        },
        _ => Some(0.0),
    }
}

fn within(a: f64, b: f64, allowed: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= allowed
}

fn compare_tables(
    name: &str,
    (ta, ia): (&Table, &NoiseIndex),
    (tb, ib): (&Table, &NoiseIndex),
    tol: Tolerance,
    out: &mut Vec<Difference>,
) {
    let mut diff = |row: usize, column: &str, a: &str, b: &str, allowed: f64| {
        out.push(Difference {
            file: name.to_string(),
            row,
            column: column.to_string(),
            a: a.to_string(),
            b: b.to_string(),
            allowed,
        })
    };
    if ta.header != tb.header {
        diff(0, "<header>", &ta.header.join(","), &tb.header.join(","), 0.0);
        return;
    }
    if ta.rows.len() != tb.rows.len() {
        diff(0, "<rows>", &ta.rows.len().to_string(), &tb.rows.len().to_string(), 0.0);
    }
    for (r, (ra, rb)) in ta.rows.iter().zip(&tb.rows).enumerate() {
        for (c, column) in ta.header.iter().enumerate() {
            let (a, b) = (
                ra.get(c).map_or("", String::as_str),
                rb.get(c).map_or("", String::as_str),
            );
            match (parse(a), parse(b)) {
                (Some(x), Some(y)) => {
                    let allowed = tol.abs + tol.stderr_mult * noise(ta, ra, column, ia).max(noise(tb, rb, column, ib));
                    if !within(x, y, allowed) {
                        diff(r + 1, column, a, b, allowed);
                    }
                }
                _ if a != b => diff(r + 1, column, a, b, 0.0),
                _ => {}
            }
        }
    }
}

pub fn compare(dir_a: &Path, dir_b: &Path, tol: Tolerance) -> CliResult<Report> {
    let ma = Manifest::read(dir_a).ok_or_else(|| CliError::ManifestMissing(dir_a.display().to_string()))?;
    let mb = Manifest::read(dir_b).ok_or_else(|| CliError::ManifestMissing(dir_b.display().to_string()))?;
    let mut report = Report::default();
    let mut pairs = Vec::new();
    let (mut ia, mut ib) = (NoiseIndex::new(), NoiseIndex::new());
    for fa in ma.files.iter().filter(|f| f.path.ends_with(".csv")) {
        if !mb.files.iter().any(|fb| fb.path == fa.path) {
            continue;
        }
        let ta = read_table(&dir_a.join(&fa.path))?;
        let tb = read_table(&dir_b.join(&fa.path))?;
        index_noise(&ta, &mut ia);
        index_noise(&tb, &mut ib);
        pairs.push((fa.path.clone(), ta, tb));
    }
    for (name, ta, tb) in &pairs {
        compare_tables(name, (ta, &ia), (tb, &ib), tol, &mut report.differences);
        report.files.push(name.clone());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(s: &str) -> Table {
        let mut lines = s.lines();
        Table {
            header: lines.next().unwrap().split(',').map(str::to_string).collect(),
            rows: lines.map(|l| l.split(',').map(str::to_string).collect()).collect(),
        }
    }

    const HEADER: &str = "T,target,eps,method,n,p_hat,std_err,log_rate,reference_rate,abs_gap";

    #[test]
    fn monte_carlo_columns_get_stderr_slack() {
        let a = table(&format!(
            "{HEADER}\n10.0,0.5,0.1,tilted(0.5),1000,0.010,0.001,0.4605,0.13,0.33"
        ));
        let b = table(&format!(
            "{HEADER}\n10.0,0.5,0.1,tilted(0.5),1000,0.012,0.001,0.4423,0.13,0.31"
        ));
        let strict = Tolerance {
            abs: 0.0,
            stderr_mult: 0.0,
        };
        let mut out = Vec::new();
        let none = NoiseIndex::new();
        compare_tables("x", (&a, &none), (&b, &none), strict, &mut out);
        assert_eq!(
            out.iter().map(|d| d.column.as_str()).collect::<Vec<_>>(),
            ["p_hat", "log_rate", "abs_gap"]
        );
        out.clear();
        compare_tables(
            "x",
            (&a, &none),
            (&b, &none),
            Tolerance {
                abs: 0.0,
                stderr_mult: 5.0,
            },
            &mut out,
        );
        assert!(out.is_empty(), "{out:?}");
    }

    #[test]
    fn plot_rows_borrow_noise_from_sibling_tables() {
        let est = table(&format!(
            "{HEADER}\n10.0,0.5,0.1,tilted(0.5),1000,0.010,0.001,0.4605,0.13,0.33"
        ));
        let mut index = NoiseIndex::new();
        index_noise(&est, &mut index);
        let a = table("T,log_rate,reference_rate\n10.0,0.4605,0.13");
        let b = table("T,log_rate,reference_rate\n10.0,0.4423,0.13");
        let mut out = Vec::new();
        compare_tables(
            "plot",
            (&a, &index),
            (&b, &index),
            Tolerance {
                abs: 0.0,
                stderr_mult: 5.0,
            },
            &mut out,
        );
        assert!(out.is_empty(), "{out:?}");
        let none = NoiseIndex::new();
        compare_tables(
            "plot",
            (&a, &none),
            (&b, &none),
            Tolerance {
                abs: 0.0,
                stderr_mult: 5.0,
            },
            &mut out,
        );
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn text_and_infinite_cells_compare_exactly() {
        let a = table("T,log_rate,method\n5.0,inf,crude");
        let b = table("T,log_rate,method\n5.0,inf,tilted(1.0)");
        let mut out = Vec::new();
        let none = NoiseIndex::new();
        compare_tables(
            "x",
            (&a, &none),
            (&b, &none),
            Tolerance {
                abs: 1.0,
                stderr_mult: 0.0,
            },
            &mut out,
        );
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].column, "method");
    }
}
