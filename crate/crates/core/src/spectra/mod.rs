//! Eigen-decomposition and spectral statistics.

pub mod analytic;
pub mod balance;
pub mod eigen;
pub mod elliptic;
pub mod form_factors;
pub mod gap;
pub mod matching;
pub mod reference;
pub mod spatial;
pub mod stats;

use faer::c64;
use serde::{Deserialize, Serialize};

pub use analytic::{
    diluted_radii, inside_lemon, lemon_boundary, poisson_reference_i, rho_delta, ring_disk_pc, DilutedRadii, LemonScaling,
};
pub use eigen::{eigen, eigenvalues, overlap_matrix, superop_eigenvalues, EigenDecomposition, EigenSolver};
pub use reference::{ginibre_reference, GINIBRE_REFERENCE_MATRICES, GINIBRE_REFERENCE_SIZE};
pub use form_factors::{dff, dsff, dsff_connected, sff, DsffConvention, FormFactorCurve};
pub use gap::{spectral_gap, GapKind};
pub use stats::{
    complex_spacing_ratios, hermitian_spacing_ratios, nn_spacings, CsrSample, CsrSummary, EdgeFilter, EmpiricalCdf,
    SpacingOptions, SpacingSample,
};

/// Eigenvalues with optional sector labels and a free-form provenance record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexSpectrum {
    pub values: Vec<c64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub source: serde_json::Value,
}

impl ComplexSpectrum {
    pub fn new(values: Vec<c64>, source: serde_json::Value) -> Self {
        Self { values, labels: None, source }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Drops the eigenvalues closest to `target`, e.g. the stationary value of a generator.
    pub fn without_nearest(&self, target: c64, count: usize) -> Vec<c64> {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| (self.values[a] - target).norm().total_cmp(&(self.values[b] - target).norm()));
        let drop: std::collections::HashSet<usize> = idx.into_iter().take(count).collect();
        self.values.iter().enumerate().filter(|(i, _)| !drop.contains(i)).map(|(_, z)| *z).collect()
    }
}
