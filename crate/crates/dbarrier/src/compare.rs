//! Column-wise comparison of two tables sharing a `t` column.

use crate::output::{NumericCsv, Table};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub column: String,
    pub max_abs: f64,
    /// Root mean square difference over the compared rows.
    pub l2: f64,
    pub rows: usize,
}

/// Linear interpolation of `(xs, ys)` at `x`; `None` outside the range.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    let scale = xs.last()?.abs().max(1.0);
    let tol = 1e-12 * scale;
    if x < xs[0] - tol || x > xs[xs.len() - 1] + tol {
        return None;
    }
    let i = xs.partition_point(|&v| v < x - tol);
    if i < xs.len() && (xs[i] - x).abs() <= tol {
        return Some(ys[i]);
    }
    let (x0, x1) = (xs[i - 1], xs[i]);
    Some(ys[i - 1] + (ys[i] - ys[i - 1]) * (x - x0) / (x1 - x0))
}

/// Compares the rows of `a` with `b` interpolated to the same `t`.
pub fn compare(a: &str, b: &str, columns: Option<&[String]>) -> Result<Vec<Deviation>, CliError> {
    let a = NumericCsv::parse(a).map_err(|e| CliError::Config(format!("first file: {e}")))?;
    let b = NumericCsv::parse(b).map_err(|e| CliError::Config(format!("second file: {e}")))?;
    let (ta, tb) = match (a.column("t"), b.column("t")) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(CliError::Config("both files need a `t` column".into())),
    };
    if tb.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::Config("second file: `t` must increase strictly".into()));
    }
    let names: Vec<String> = match columns {
        Some(c) => c.to_vec(),
        None => a.columns.iter().filter(|c| *c != "t" && b.columns.contains(c)).cloned().collect(),
    };
    if names.is_empty() {
        return Err(CliError::Config("no shared columns to compare".into()));
    }
    let mut out = Vec::new();
    for name in names {
        let (ya, yb) = match (a.column(&name), b.column(&name)) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(CliError::Config(format!("column `{name}` is missing from one file"))),
        };
        let diffs: Vec<f64> = ta
            .iter()
            .zip(&ya)
            .filter_map(|(&t, &v)| interpolate(&tb, &yb, t).map(|w| v - w))
            .filter(|d| !d.is_nan())
            .collect();
        if diffs.is_empty() {
            return Err(CliError::Config(format!("column `{name}`: no rows with overlapping t")));
        }
        let max_abs = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let l2 = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
        out.push(Deviation { column: name, max_abs, l2, rows: diffs.len() });
    }
    Ok(out)
}

pub fn to_table(devs: &[Deviation]) -> Table {
    let mut t = Table::new(&crate::args::COMPARE_COLUMNS);
    for d in devs {
        t.push(vec![d.column.as_str().into(), d.max_abs.into(), d.l2.into(), d.rows.into()]);
    }
    t
}
