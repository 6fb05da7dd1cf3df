use faer::{c64, MatRef};

use super::operator::{devectorize, Operator, Role};
use super::superop::{check_psd, choi_of_map, sandwich, Superoperator, PSD_TOL};
use crate::error::{DqcError, Result};
use crate::linalg::{self, CMat};

/// Trace-preservation tolerance for Kraus sets.
pub const TP_TOL: f64 = 1e-8;

/// Kraus operators of a completely positive map.
#[derive(Clone, Debug)]
pub struct KrausSet {
    n: usize,
    ops: Vec<CMat>,
}

impl KrausSet {
    pub fn new(n: usize, ops: Vec<CMat>) -> Result<Self> {
        for k in &ops {
            if k.nrows() != n || k.ncols() != n {
                return Err(DqcError::DimensionMismatch { expected: n, got: k.nrows() });
            }
        }
        Ok(Self { n, ops })
    }

    pub fn from_operators(n: usize, ops: &[Operator]) -> Result<Self> {
        Self::new(n, ops.iter().map(|o| o.mat().to_owned()).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[CMat] {
        &self.ops
    }

    pub fn operators(&self) -> Result<Vec<Operator>> {
        self.ops.iter().map(|k| Operator::new(k.clone(), Role::Jump)).collect()
    }

    /// `max |Σ K†K − 1|`.
    pub fn tp_residual(&self) -> f64 {
        let mut s = linalg::zeros(self.n, self.n);
        for k in &self.ops {
            s += k.adjoint() * k;
        }
        linalg::max_abs_diff(s.as_ref(), linalg::identity(self.n).as_ref())
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.tp_residual() <= TP_TOL
    }

    /// `Σ K̄_μ ⊗ K_μ` without the trace-preservation check.
    pub fn superoperator(&self) -> Superoperator {
        let n2 = self.n * self.n;
        let mut out = linalg::zeros(n2, n2);
        for k in &self.ops {
            out += sandwich(k.as_ref(), linalg::dagger(k.as_ref()).as_ref());
        }
        Superoperator::from_mat(out).expect("square by construction")
    }
}

/// Superoperator of a trace-preserving Kraus set.
pub fn cptp_from_kraus(ks: &KrausSet) -> Result<Superoperator> {
    let residual = ks.tp_residual();
    if residual > TP_TOL {
        return Err(DqcError::NotTracePreserving { residual });
    }
    Ok(ks.superoperator())
}

/// Kraus decomposition from the Choi eigenvectors, keeping eigenvalues above `cutoff·Tr C`.
pub fn kraus_of_choi(choi: MatRef<'_, c64>, cutoff: f64) -> Result<KrausSet> {
    check_psd(choi, PSD_TOL).map_err(|e| match e {
        DqcError::NotPsd { min_eig, .. } => DqcError::NotCompletelyPositive { min_eig },
        other => other,
    })?;
    let d = choi.nrows();
    let n = (d as f64).sqrt().round() as usize;
    let h = linalg::hermitize(choi);
    let tr = linalg::trace(h.as_ref()).re;
    let (vals, vecs) = linalg::eigh(h.as_ref())?;
    let mut ops = Vec::new();
    for (a, &mu) in vals.iter().enumerate().rev() {
        if mu <= cutoff * tr || mu <= 0.0 {
            continue;
        }
        let s = mu.sqrt();
        // g[iN+k] = K[k,i], i.e. g = vec(K)
        let g: Vec<c64> = (0..d).map(|r| vecs[(r, a)] * s).collect();
        ops.push(devectorize(&g)?);
    }
    KrausSet::new(n, ops)
}

/// Kraus rank of a map from its Choi spectrum.
pub fn kraus_rank(phi: &Superoperator, cutoff: f64) -> Result<usize> {
    let c = choi_of_map(phi);
    let tr = linalg::trace(c.as_ref()).re;
    let vals = linalg::eigvalsh(linalg::hermitize(c.as_ref()).as_ref())?;
    Ok(vals.iter().filter(|&&v| v > cutoff * tr).count())
}
