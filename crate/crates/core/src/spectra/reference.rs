//! Sampled reference distributions.

use rayon::prelude::*;

use super::eigen;
use super::stats::{nn_spacings, EmpiricalCdf, SpacingOptions};
use crate::ensembles::{rng_for, sample_ginibre, Field};
use crate::error::Result;

/// Default matrix size and count for the pooled Ginibre spacing reference.
pub const GINIBRE_REFERENCE_SIZE: usize = 3600;
pub const GINIBRE_REFERENCE_MATRICES: usize = 20;

/// Pooled unfolded nearest-neighbour spacings of complex Ginibre matrices.
///
/// Matrix `k` draws from stream `k` of `seed`, so the result does not depend on the worker count.
pub fn ginibre_reference(n_matrices: usize, size: usize, seed: u64, opts: &SpacingOptions) -> Result<EmpiricalCdf> {
    let pooled: Vec<Vec<f64>> = (0..n_matrices)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(seed, k as u64);
            let g = sample_ginibre(Field::Complex, size, size, 1.0 / size as f64, &mut rng);
            let ev = eigen::eigenvalues(g.as_ref())?;
            Ok(nn_spacings(&ev, opts)?.into_iter().map(|s| s.s).collect())
        })
        .collect::<Result<_>>()?;
    Ok(EmpiricalCdf::new(pooled.into_iter().flatten().collect()))
}

/// Pooled unfolded spacings of uniform points in the unit disk.
pub fn poisson_sample_reference(n_sets: usize, count: usize, seed: u64, opts: &SpacingOptions) -> Result<EmpiricalCdf> {
    let pooled: Vec<Vec<f64>> = (0..n_sets)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(seed, k as u64);
            let pts = crate::ensembles::sample_poisson_disk(count, &mut rng);
            Ok(nn_spacings(&pts, opts)?.into_iter().map(|s| s.s).collect())
        })
        .collect::<Result<_>>()?;
    Ok(EmpiricalCdf::new(pooled.into_iter().flatten().collect()))
}
