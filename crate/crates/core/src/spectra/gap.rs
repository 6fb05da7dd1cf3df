use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{DqcError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapKind {
    Lindblad,
    Map,
}

/// Eigenvalues within this distance of the stationary value form the stationary cluster.
pub const STATIONARY_TOL: f64 = 1e-9;

/// Relaxation gap: `−max Re ℓ` off the zero cluster, or `−ln |λ₂|` off the unit cluster.
pub fn spectral_gap(spectrum: &[c64], kind: GapKind) -> Result<f64> {
    let target = match kind {
        GapKind::Lindblad => c64::new(0.0, 0.0),
        GapKind::Map => c64::new(1.0, 0.0),
    };
    let rest: Vec<c64> = spectrum.iter().copied().filter(|z| (z - target).norm() > STATIONARY_TOL).collect();
    if rest.is_empty() {
        return Err(DqcError::TooFewPoints { needed: 1, got: 0 });
    }
    Ok(match kind {
        GapKind::Lindblad => -rest.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max),
        GapKind::Map => -rest.iter().map(|z| z.norm()).fold(0.0, f64::max).ln(),
    })
}
