use faer::c64;
use serde::Serialize;

use super::superop::{choi_of_map, Superoperator};
use crate::error::Result;
use crate::linalg::{self, CMat};
use crate::spectra::{eigen, matching};

/// Generator of continuous-time dynamics or a discrete-time map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsKind {
    Lindbladian,
    Map,
}

/// Outcome of the validity battery on one generator or map.
#[derive(Clone, Debug, Serialize)]
pub struct ValidityReport {
    pub kind: DynamicsKind,
    pub trace_residual: f64,
    pub hermiticity_residual: f64,
    /// Smallest (conditional) Choi eigenvalue relative to the largest.
    pub choi_min_relative: f64,
    /// max Re ℓ for generators, spectral radius − 1 for maps.
    pub spectral_excess: f64,
    /// Distance from 0 (generators) or 1 (maps) to the spectrum.
    pub fixed_point_distance: f64,
    /// Bottleneck distance between the spectrum and its complex conjugate, if a matching exists.
    pub conjugation_mismatch: Option<f64>,
    pub passed: bool,
}

pub const TRACE_TOL: f64 = 1e-10;
pub const CHOI_TOL: f64 = 1e-9;
pub const RE_TOL: f64 = 1e-8;
pub const FIXED_POINT_TOL: f64 = 1e-8;
pub const CONJ_TOL: f64 = 1e-7;

/// Choi matrix projected off the maximally entangled vector; PSD iff `e^{t𝓛}` is CP for all t ≥ 0.
pub fn conditional_choi(l: &Superoperator) -> CMat {
    let n = l.dim();
    let c = choi_of_map(l);
    let d = n * n;
    let mut p = linalg::identity(d);
    let w = 1.0 / n as f64;
    for a in 0..n {
        for b in 0..n {
            p[(a * n + a, b * n + b)] -= c64::new(w, 0.0);
        }
    }
    &p * &c * &p
}

pub fn validate(op: &Superoperator, kind: DynamicsKind) -> Result<ValidityReport> {
    let scale = linalg::max_abs(op.mat()).max(1.0);
    let trace_residual = op.trace_residual(kind == DynamicsKind::Lindbladian);
    let hermiticity_residual = op.hermiticity_preservation_residual();
    let choi = match kind {
        DynamicsKind::Lindbladian => conditional_choi(op),
        DynamicsKind::Map => choi_of_map(op),
    };
    let cv = linalg::eigvalsh(linalg::hermitize(choi.as_ref()).as_ref())?;
    let cmax = cv.last().copied().unwrap_or(0.0).abs().max(f64::MIN_POSITIVE);
    let choi_min_relative = cv.first().copied().unwrap_or(0.0) / cmax;
    let spec = eigen::superop_eigenvalues(op)?;
    let (spectral_excess, target) = match kind {
        DynamicsKind::Lindbladian => (spec.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max), c64::new(0.0, 0.0)),
        DynamicsKind::Map => (spec.iter().map(|z| z.norm()).fold(0.0, f64::max) - 1.0, c64::new(1.0, 0.0)),
    };
    let fixed_point_distance = spec.iter().map(|z| (z - target).norm()).fold(f64::INFINITY, f64::min);
    let conj: Vec<c64> = spec.iter().map(|z| z.conj()).collect();
    let conjugation_mismatch = matching::match_within(&spec, &conj, CONJ_TOL * scale);
    let passed = trace_residual <= TRACE_TOL * scale
        && hermiticity_residual <= 1e-10 * scale
        && choi_min_relative >= -CHOI_TOL
        && spectral_excess <= RE_TOL
        && fixed_point_distance <= FIXED_POINT_TOL
        && conjugation_mismatch.is_some();
    Ok(ValidityReport {
        kind,
        trace_residual,
        hermiticity_residual,
        choi_min_relative,
        spectral_excess,
        fixed_point_distance,
        conjugation_mismatch,
        passed,
    })
}
