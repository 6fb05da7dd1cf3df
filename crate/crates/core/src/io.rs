//! Text interchange: CSV payloads with provenance carried in `#`-prefixed JSON header lines.
//!
//! Every file written here has the layout
//!
//! ```text
//! # {"format":"spectrum","source":{...}}
//! re,im
//! 0.5,-0.25
//! ```
//!
//! Readers merge every header line that parses as a JSON object and ignore other comments, so
//! hand-written files without provenance are accepted.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use faer::{c64, MatRef};
use serde_json::{json, Map, Value};

use crate::error::{DqcError, Result};
use crate::linalg::{self, CMat};
use crate::opcore::{Operator, Role};
use crate::spectra::ComplexSpectrum;

/// A parsed CSV file: merged header object, column names and raw rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    fn float(&self, line: usize, row: &[String], col: usize) -> Result<f64> {
        let cell = row.get(col).ok_or_else(|| DqcError::Parse { line, reason: format!("missing column {col}") })?;
        cell.trim()
            .parse::<f64>()
            .map_err(|e| DqcError::Parse { line, reason: format!("{cell:?}: {e}") })
    }

    /// Column `name` parsed as floats.
    pub fn floats(&self, name: &str) -> Result<Vec<f64>> {
        let col = self
            .column(name)
            .ok_or_else(|| DqcError::Parse { line: 0, reason: format!("no column named {name:?}") })?;
        self.rows.iter().map(|(line, row)| self.float(*line, row, col)).collect()
    }
}

/// Serializes a table. `header` must be a JSON object; it is written on one line.
pub fn format_table(header: &Value, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {header}");
    let _ = writeln!(out, "{}", columns.join(","));
    for row in rows {
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn write_table(path: &Path, header: &Value, columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, format_table(header, columns, rows))?;
    Ok(())
}

/// Parses a table. The first non-comment line is the column header when it is not numeric;
/// otherwise columns default to `c0, c1, …`.
pub fn parse_table(text: &str) -> Result<Table> {
    let mut header = Map::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('#') {
            if let Ok(Value::Object(m)) = serde_json::from_str::<Value>(c.trim()) {
                header.extend(m);
            }
            continue;
        }
        let cells: Vec<String> = t.split(',').map(|c| c.trim().to_string()).collect();
        if columns.is_none() {
            if cells.iter().any(|c| c.parse::<f64>().is_err()) {
                columns = Some(cells);
                continue;
            }
            columns = Some((0..cells.len()).map(|k| format!("c{k}")).collect());
        }
        let width = columns.as_ref().map_or(0, Vec::len);
        if cells.len() != width {
            return Err(DqcError::Parse { line, reason: format!("expected {width} fields, found {}", cells.len()) });
        }
        rows.push((line, cells));
    }
    Ok(Table { header, columns: columns.unwrap_or_default(), rows })
}

pub fn read_table(path: &Path) -> Result<Table> {
    parse_table(&fs::read_to_string(path)?)
}

/// Shortest round-trip decimal form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn spectrum_to_string(spec: &ComplexSpectrum) -> String {
    let header = json!({ "format": "spectrum", "source": spec.source });
    let rows: Vec<Vec<String>> = spec
        .values
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let mut r = vec![fmt_f64(z.re), fmt_f64(z.im)];
            if let Some(labels) = &spec.labels {
                r.push(labels[k].clone());
            }
            r
        })
        .collect();
    let cols: &[&str] = if spec.labels.is_some() { &["re", "im", "label"] } else { &["re", "im"] };
    format_table(&header, cols, &rows)
}

pub fn write_spectrum(path: &Path, spec: &ComplexSpectrum) -> Result<()> {
    if let Some(labels) = &spec.labels {
        if labels.len() != spec.values.len() {
            return Err(DqcError::DimensionMismatch { expected: spec.values.len(), got: labels.len() });
        }
    }
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, spectrum_to_string(spec))?;
    Ok(())
}

/// Reads `re,im[,label]` rows; headerless two-column files are read positionally.
pub fn parse_spectrum(text: &str) -> Result<ComplexSpectrum> {
    let t = parse_table(text)?;
    let (re, im) = match (t.column("re"), t.column("im")) {
        (Some(_), Some(_)) => (t.floats("re")?, t.floats("im")?),
        _ if t.columns.len() >= 2 => (t.floats(&t.columns[0].clone())?, t.floats(&t.columns[1].clone())?),
        _ if t.columns.len() == 1 => {
            let re = t.floats(&t.columns[0].clone())?;
            let im = vec![0.0; re.len()];
            (re, im)
        }
        _ => return Err(DqcError::Parse { line: 0, reason: "no spectrum columns".into() }),
    };
    let values: Vec<c64> = re.into_iter().zip(im).map(|(a, b)| c64::new(a, b)).collect();
    let labels = t
        .column("label")
        .map(|c| t.rows.iter().map(|(_, r)| r[c].clone()).collect::<Vec<_>>());
    let source = t.header.get("source").cloned().unwrap_or(Value::Null);
    Ok(ComplexSpectrum { values, labels, source })
}

pub fn read_spectrum(path: &Path) -> Result<ComplexSpectrum> {
    parse_spectrum(&fs::read_to_string(path)?)
}

/// `x,y` curve.
pub fn write_curve(path: &Path, header: &Value, x_name: &str, y_name: &str, pts: &[(f64, f64)]) -> Result<()> {
    let rows: Vec<Vec<String>> = pts.iter().map(|(x, y)| vec![fmt_f64(*x), fmt_f64(*y)]).collect();
    write_table(path, header, &[x_name, y_name], &rows)
}

/// `re_tau,im_tau,value` curve over complex abscissae.
pub fn write_complex_curve(path: &Path, header: &Value, pts: &[(c64, f64)]) -> Result<()> {
    let rows: Vec<Vec<String>> = pts
        .iter()
        .map(|(z, v)| vec![fmt_f64(z.re), fmt_f64(z.im), fmt_f64(*v)])
        .collect();
    write_table(path, header, &["re_tau", "im_tau", "value"], &rows)
}

fn role_name(role: Role) -> &'static str {
    match role {
        Role::Hamiltonian => "hamiltonian",
        Role::Jump => "jump",
        Role::Density => "density",
        Role::Observable => "observable",
        Role::Generic => "generic",
    }
}

fn role_of(name: &str) -> Option<Role> {
    Some(match name {
        "hamiltonian" => Role::Hamiltonian,
        "jump" => Role::Jump,
        "density" => Role::Density,
        "observable" => Role::Observable,
        "generic" => Role::Generic,
        _ => return None,
    })
}

/// Dense matrix as `row,col,re,im` with zero entries omitted.
pub fn matrix_to_string(m: MatRef<'_, c64>, extra: Value) -> String {
    let mut header = json!({ "format": "matrix", "rows": m.nrows(), "cols": m.ncols(), "convention": "column-major" });
    if let (Value::Object(h), Value::Object(e)) = (&mut header, extra) {
        h.extend(e);
    }
    let mut rows = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if z != linalg::ZERO {
                rows.push(vec![i.to_string(), j.to_string(), fmt_f64(z.re), fmt_f64(z.im)]);
            }
        }
    }
    format_table(&header, &["row", "col", "re", "im"], &rows)
}

pub fn write_operator(path: &Path, op: &Operator) -> Result<()> {
    fs::write(path, matrix_to_string(op.mat(), json!({ "dim": op.dim(), "role": role_name(op.role()) })))?;
    Ok(())
}

pub fn parse_matrix(text: &str) -> Result<(CMat, Map<String, Value>)> {
    let t = parse_table(text)?;
    let dim = |key: &str| t.header.get(key).and_then(Value::as_u64).map(|v| v as usize);
    let (nr, nc) = match (dim("rows").or(dim("dim")), dim("cols").or(dim("dim"))) {
        (Some(r), Some(c)) => (r, c),
        _ => return Err(DqcError::Parse { line: 1, reason: "header lacks matrix dimensions".into() }),
    };
    let (ri, ci) = (t.floats("row")?, t.floats("col")?);
    let (re, im) = (t.floats("re")?, t.floats("im")?);
    let mut m = linalg::zeros(nr, nc);
    for (k, (line, _)) in t.rows.iter().enumerate() {
        let (i, j) = (ri[k] as usize, ci[k] as usize);
        if i >= nr || j >= nc || ri[k].fract() != 0.0 || ci[k].fract() != 0.0 {
            return Err(DqcError::Parse { line: *line, reason: format!("index ({}, {}) out of range", ri[k], ci[k]) });
        }
        m[(i, j)] = c64::new(re[k], im[k]);
    }
    Ok((m, t.header))
}

pub fn read_operator(path: &Path) -> Result<Operator> {
    let (m, header) = parse_matrix(&fs::read_to_string(path)?)?;
    let role = header.get("role").and_then(Value::as_str).and_then(role_of).unwrap_or(Role::Generic);
    Operator::new(m, role)
}
