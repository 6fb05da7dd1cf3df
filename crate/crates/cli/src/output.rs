//! Artifact directory: data CSVs, `summary.json` with checks, `manifest.json` with provenance.
//!
//! CSV headers carry the experiment, seed and resolved section but no timestamp, so identical
//! configurations produce byte-identical data files.

use std::path::{Path, PathBuf};

use dqc_core::io;
use dqc_core::spectra::ComplexSpectrum;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// A mathematical property that must hold; failure exits with code 4.
    Invariant,
    /// A statistical expectation; failure is reported but does not change the exit code.
    Expectation,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub passed: bool,
    pub detail: String,
}

pub struct Output {
    dir: PathBuf,
    provenance: Value,
    files: Vec<String>,
    checks: Vec<Check>,
    results: Map<String, Value>,
}

impl Output {
    /// Creates `dir`; `provenance` is embedded in every CSV header.
    pub fn new(dir: &Path, provenance: Value) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        Ok(Self { dir: dir.to_path_buf(), provenance, files: Vec::new(), checks: Vec::new(), results: Map::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn header(&self, extra: Value) -> Value {
        let mut h = match &self.provenance {
            Value::Object(m) => m.clone(),
            _ => Map::new(),
        };
        if let Value::Object(m) = extra {
            h.extend(m);
        }
        Value::Object(h)
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    pub fn table(&mut self, name: &str, extra: Value, columns: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        let header = self.header(extra);
        let path = self.path(name);
        io::write_table(&path, &header, columns, rows)?;
        Ok(())
    }

    pub fn curve(&mut self, name: &str, extra: Value, x: &str, y: &str, pts: &[(f64, f64)]) -> CliResult<()> {
        let header = self.header(extra);
        let path = self.path(name);
        io::write_curve(&path, &header, x, y, pts)?;
        Ok(())
    }

    pub fn complex_curve(&mut self, name: &str, extra: Value, pts: &[(dqc_core::c64, f64)]) -> CliResult<()> {
        let header = self.header(extra);
        let path = self.path(name);
        io::write_complex_curve(&path, &header, pts)?;
        Ok(())
    }

    /// Writes a spectrum whose `source` is the provenance merged with `extra`.
    pub fn spectrum(&mut self, name: &str, extra: Value, values: Vec<dqc_core::c64>, labels: Option<Vec<String>>) -> CliResult<()> {
        let spec = ComplexSpectrum { values, labels, source: self.header(extra) };
        let path = self.path(name);
        io::write_spectrum(&path, &spec)?;
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &Value) -> CliResult<()> {
        let path = self.path(name);
        write_json(&path, value)
    }

    pub fn check(&mut self, name: &str, kind: CheckKind, passed: bool, detail: impl Into<String>) {
        let detail = detail.into();
        if !passed {
            log::warn!("check {name} failed: {detail}");
        }
        self.checks.push(Check { name: name.into(), kind, passed, detail });
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    /// Writes `summary.json` and `manifest.json`; fails with an invariant error if any invariant
    /// check failed.
    pub fn finish(mut self, mut manifest: Map<String, Value>) -> CliResult<Vec<Check>> {
        let failed: Vec<String> =
            self.checks.iter().filter(|c| c.kind == CheckKind::Invariant && !c.passed).map(|c| c.name.clone()).collect();
        let summary = json!({
            "passed": failed.is_empty(),
            "checks": self.checks,
            "results": self.results,
        });
        let summary_path = self.path("summary.json");
        write_json(&summary_path, &summary)?;
        let created = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let solver = dqc_core::spectra::eigen::solver();
        manifest.insert("tool".into(), json!(env!("CARGO_PKG_NAME")));
        manifest.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        manifest.insert("created_unix".into(), json!(created));
        manifest.insert("eigen_backend".into(), json!({ "name": solver.backend_name(), "path": format!("{:?}", solver.path()) }));
        manifest.insert("files".into(), json!(self.files));
        write_json(&self.dir.join("manifest.json"), &Value::Object(manifest))?;
        if !failed.is_empty() {
            return Err(CliError::Invariant(failed.join(", ")));
        }
        Ok(self.checks)
    }
}

pub fn write_json(path: &Path, value: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

/// Formats a float row.
pub fn row(values: &[f64]) -> Vec<String> {
    values.iter().map(|&v| io::fmt_f64(v)).collect()
}
