use faer::{c64, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{DqcError, Result};
use crate::linalg::{self, CMat};

/// What an operator stands for. Hermitian roles are checked on construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Hamiltonian,
    Jump,
    Density,
    Observable,
    Generic,
}

impl Role {
    pub fn is_hermitian(self) -> bool {
        matches!(self, Role::Hamiltonian | Role::Density | Role::Observable)
    }
}

/// Dense square complex operator on an N-dimensional Hilbert space.
#[derive(Clone, Debug)]
pub struct Operator {
    mat: CMat,
    role: Role,
}

pub const HERMITIAN_TOL: f64 = 1e-12;

impl Operator {
    pub fn new(mat: CMat, role: Role) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(DqcError::DimensionMismatch { expected: mat.nrows(), got: mat.ncols() });
        }
        if !mat.as_ref().norm_max().is_finite() {
            return Err(DqcError::InvalidParameter {
                name: "operator",
                reason: "non-finite entries".into(),
            });
        }
        if role.is_hermitian() {
            let scale = linalg::max_abs(mat.as_ref());
            let residual = linalg::hermiticity_residual(mat.as_ref());
            if residual > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) && residual > 0.0 {
                return Err(DqcError::NotHermitian { residual });
            }
        }
        Ok(Self { mat, role })
    }

    pub fn generic(mat: CMat) -> Result<Self> {
        Self::new(mat, Role::Generic)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn mat(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn with_role(self, role: Role) -> Result<Self> {
        Self::new(self.mat, role)
    }
}

/// Column-stacking vectorization.
pub fn vectorize(a: MatRef<'_, c64>) -> Vec<c64> {
    linalg::vec_of(a)
}

pub fn devectorize(v: &[c64]) -> Result<CMat> {
    let n = (v.len() as f64).sqrt().round() as usize;
    if n * n != v.len() {
        return Err(DqcError::DimensionMismatch { expected: n * n, got: v.len() });
    }
    Ok(CMat::from_fn(n, n, |i, j| v[i + n * j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, ONE, ZERO};

    #[test]
    fn vectorize_identity() {
        assert_eq!(vectorize(identity(2).as_ref()), vec![ONE, ZERO, ZERO, ONE]);
    }

    #[test]
    fn devectorize_rejects_non_square_length() {
        assert!(devectorize(&[ONE; 3]).is_err());
    }

    #[test]
    fn hermitian_role_is_checked() {
        let mut m = identity(2);
        m[(0, 1)] = c64::new(1.0, 0.0);
        assert!(Operator::new(m.clone(), Role::Hamiltonian).is_err());
        assert!(Operator::new(m, Role::Jump).is_ok());
    }
}
