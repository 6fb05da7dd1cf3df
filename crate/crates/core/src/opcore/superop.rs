use faer::{c64, Mat, MatRef};
use serde::{Deserialize, Serialize};

use super::operator::{devectorize, vectorize, Operator};
use crate::error::{DqcError, Result};
use crate::linalg::{self, CMat, I, ONE, ZERO};

/// Vectorization convention carried by every superoperator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.
    ColumnMajor,
}

/// Dense N²×N² matrix acting on column-vectorized N×N operators.
#[derive(Clone, Debug)]
pub struct Superoperator {
    n: usize,
    mat: CMat,
}

impl Superoperator {
    pub fn from_mat(mat: CMat) -> Result<Self> {
        let d = mat.nrows();
        let n = (d as f64).sqrt().round() as usize;
        if mat.ncols() != d || n * n != d {
            return Err(DqcError::DimensionMismatch { expected: n * n, got: mat.ncols() });
        }
        Ok(Self { n, mat })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, mat: linalg::zeros(n * n, n * n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { n, mat: linalg::identity(n * n) }
    }

    pub fn convention(&self) -> Convention {
        Convention::ColumnMajor
    }

    /// Hilbert-space dimension N.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mat(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn apply(&self, rho: MatRef<'_, c64>) -> Result<CMat> {
        if rho.nrows() != self.n || rho.ncols() != self.n {
            return Err(DqcError::DimensionMismatch { expected: self.n, got: rho.nrows() });
        }
        devectorize(&linalg::matvec(self.mat.as_ref(), &vectorize(rho)))
    }

    pub fn add(&self, other: &Superoperator) -> Result<Superoperator> {
        self.check_dim(other)?;
        Ok(Self { n: self.n, mat: &self.mat + &other.mat })
    }

    pub fn scaled(&self, s: f64) -> Superoperator {
        Self { n: self.n, mat: linalg::scale(self.mat.as_ref(), c64::new(s, 0.0)) }
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Result<Superoperator> {
        self.check_dim(other)?;
        Ok(Self { n: self.n, mat: &self.mat * &other.mat })
    }

    fn check_dim(&self, other: &Superoperator) -> Result<()> {
        if self.n != other.n {
            return Err(DqcError::DimensionMismatch { expected: self.n, got: other.n });
        }
        Ok(())
    }

    /// `max_k |Σ_i S[ii, k] − target_k|` where the target is vec(1) for maps and 0 for generators.
    pub fn trace_residual(&self, generator: bool) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for col in 0..n * n {
            let s: c64 = (0..n).map(|i| self.mat[(i + n * i, col)]).sum();
            let (a, b) = (col % n, col / n);
            let target = if !generator && a == b { ONE } else { ZERO };
            worst = worst.max((s - target).norm());
        }
        worst
    }

    /// Largest violation of `S(ρ)† = S(ρ†)` in entrywise form.
    pub fn hermiticity_preservation_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for l in 0..n {
            for k in 0..n {
                let col = k + n * l;
                let tcol = l + n * k;
                for j in 0..n {
                    for i in 0..n {
                        let a = self.mat[(i + n * j, col)];
                        let b = self.mat[(j + n * i, tcol)].conj();
                        worst = worst.max((a - b).norm());
                    }
                }
            }
        }
        worst
    }

    pub fn is_hermiticity_preserving(&self, tol: f64) -> bool {
        self.hermiticity_preservation_residual() <= tol * linalg::max_abs(self.mat.as_ref()).max(1.0)
    }

    /// Matrix of the superoperator in the orthonormal Hermitian basis
    /// `{E_aa, (E_ab+E_ba)/√2, i(E_ab−E_ba)/√2}`. Real whenever the map preserves Hermiticity;
    /// the imaginary residue is returned alongside.
    pub fn real_form(&self) -> (Mat<f64>, f64) {
        let n = self.n;
        let d = n * n;
        let basis = hermitian_basis_columns(n);
        // SB: column l combines at most two columns of S.
        let mut sb = linalg::zeros(d, d);
        for (l, col) in basis.iter().enumerate() {
            for &(idx, w) in col {
                for r in 0..d {
                    sb[(r, l)] += self.mat[(r, idx)] * w;
                }
            }
        }
        let mut out = Mat::<f64>::zeros(d, d);
        let mut imag = 0.0f64;
        for l in 0..d {
            for (k, row) in basis.iter().enumerate() {
                let mut acc = ZERO;
                for &(idx, w) in row {
                    acc += w.conj() * sb[(idx, l)];
                }
                out[(k, l)] = acc.re;
                imag = imag.max(acc.im.abs());
            }
        }
        (out, imag)
    }
}

/// Sparse columns `vec(G_k)` of the Hermitian orthonormal basis.
fn hermitian_basis_columns(n: usize) -> Vec<Vec<(usize, c64)>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut cols = Vec::with_capacity(n * n);
    for a in 0..n {
        cols.push(vec![(a + n * a, ONE)]);
    }
    for b in 0..n {
        for a in 0..b {
            cols.push(vec![(a + n * b, c64::new(h, 0.0)), (b + n * a, c64::new(h, 0.0))]);
            cols.push(vec![(a + n * b, c64::new(0.0, h)), (b + n * a, c64::new(0.0, -h))]);
        }
    }
    cols
}

/// `−i(1⊗H − Hᵀ⊗1)`.
pub fn hamiltonian_superop(h: &Operator) -> Result<Superoperator> {
    let m = h.mat();
    let n = m.nrows();
    let residual = linalg::hermiticity_residual(m);
    if residual > super::operator::HERMITIAN_TOL * linalg::max_abs(m).max(f64::MIN_POSITIVE) && residual > 0.0 {
        return Err(DqcError::NotHermitian { residual });
    }
    let mut out = linalg::zeros(n * n, n * n);
    add_left_right(&mut out, n, Some((m, -I)), Some((m, I)));
    Ok(Superoperator { n, mat: out })
}

/// Adds `ca·(1⊗A) + cb·(Bᵀ⊗1)`, i.e. the superoperator of `ca·Aρ + cb·ρB`.
fn add_left_right(
    out: &mut CMat,
    n: usize,
    left: Option<(MatRef<'_, c64>, c64)>,
    right: Option<(MatRef<'_, c64>, c64)>,
) {
    if let Some((a, ca)) = left {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    out[(k + n * j, l + n * j)] += ca * a[(k, l)];
                }
            }
        }
    }
    if let Some((b, cb)) = right {
        // (Bᵀ⊗1)[(i n + k), (j n + k)] = B[j, i]
        for i in 0..n {
            for j in 0..n {
                let v = cb * b[(j, i)];
                if v == ZERO {
                    continue;
                }
                for k in 0..n {
                    out[(k + n * i, k + n * j)] += v;
                }
            }
        }
    }
}

/// Superoperator of `ρ ↦ AρB`.
pub fn sandwich(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    linalg::kron(b.transpose(), a)
}

/// `Σ_α (L̄_α⊗L_α − ½ 1⊗L_α†L_α − ½ (L_α†L_α)ᵀ⊗1)`.
pub fn dissipator_from_jumps(n: usize, jumps: &[Operator]) -> Result<Superoperator> {
    let mut out = linalg::zeros(n * n, n * n);
    let mut x = linalg::zeros(n, n);
    for l in jumps {
        if l.dim() != n {
            return Err(DqcError::DimensionMismatch { expected: n, got: l.dim() });
        }
        let lm = l.mat();
        for j in 0..n {
            for i in 0..n {
                let s = lm[(i, j)].conj();
                if s == ZERO {
                    continue;
                }
                for q in 0..n {
                    for p in 0..n {
                        out[(i * n + p, j * n + q)] += s * lm[(p, q)];
                    }
                }
            }
        }
        x += lm.adjoint() * lm;
    }
    add_left_right(&mut out, n, Some((x.as_ref(), c64::new(-0.5, 0.0))), Some((x.as_ref(), c64::new(-0.5, 0.0))));
    Ok(Superoperator { n, mat: out })
}

/// Dissipator of a CP map Ψ: `Ψ(ρ) − ½{Ψ‡(1), ρ}`.
pub fn dissipator_from_cp_map(psi: &Superoperator) -> Result<Superoperator> {
    let choi = choi_of_map(psi);
    check_psd(choi.as_ref(), PSD_TOL).map_err(|e| match e {
        DqcError::NotPsd { min_eig, .. } => DqcError::NotCompletelyPositive { min_eig },
        other => other,
    })?;
    Ok(dissipator_from_cp_map_unchecked(psi))
}

fn dissipator_from_cp_map_unchecked(psi: &Superoperator) -> Superoperator {
    let n = psi.n;
    // vec(X) = S† vec(1)
    let x = CMat::from_fn(n, n, |d, b| {
        (0..n).map(|a| psi.mat[(a + n * a, d + n * b)].conj()).sum::<c64>()
    });
    let mut out = psi.mat.clone();
    add_left_right(&mut out, n, Some((x.as_ref(), c64::new(-0.5, 0.0))), Some((x.as_ref(), c64::new(-0.5, 0.0))));
    Superoperator { n, mat: out }
}

pub const PSD_TOL: f64 = 1e-10;

/// Accepts a Hermitian matrix whose eigenvalues are ≥ −tol·(largest eigenvalue).
pub fn check_psd(a: MatRef<'_, c64>, tol: f64) -> Result<Vec<f64>> {
    let h = linalg::hermitize(a);
    let vals = linalg::eigvalsh(h.as_ref())?;
    let min = vals.first().copied().unwrap_or(0.0);
    let max = vals.last().copied().unwrap_or(0.0);
    if min < -tol * max.max(0.0) {
        return Err(DqcError::NotPsd { min_eig: min, max_eig: max });
    }
    Ok(vals)
}

/// Choi matrix `C[(iN+k),(jN+l)] = Φ(E_ij)[k,l]`.
pub fn choi_of_map(phi: &Superoperator) -> CMat {
    let n = phi.n;
    CMat::from_fn(n * n, n * n, |r, c| {
        let (i, k) = (r / n, r % n);
        let (j, l) = (c / n, c % n);
        phi.mat[(k + n * l, i + n * j)]
    })
}

pub fn map_of_choi(choi: MatRef<'_, c64>) -> Result<Superoperator> {
    let d = choi.nrows();
    let n = (d as f64).sqrt().round() as usize;
    if n * n != d || choi.ncols() != d {
        return Err(DqcError::DimensionMismatch { expected: n * n, got: choi.ncols() });
    }
    let mat = CMat::from_fn(d, d, |r, c| {
        let (k, l) = (r % n, r / n);
        let (i, j) = (c % n, c / n);
        choi[(i * n + k, j * n + l)]
    });
    Ok(Superoperator { n, mat })
}

/// `e^{𝓛}` by scaling and squaring.
pub fn superop_expm(l: &Superoperator) -> Result<Superoperator> {
    Ok(Superoperator { n: l.n, mat: linalg::expm(l.mat.as_ref())? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::operator::Role;

    fn sigma_minus() -> Operator {
        let mut m = linalg::zeros(2, 2);
        m[(0, 1)] = ONE;
        Operator::new(m, Role::Jump).unwrap()
    }

    #[test]
    fn real_form_of_identity_is_identity() {
        let (r, imag) = Superoperator::identity(3).real_form();
        assert!(imag < 1e-15);
        for i in 0..9 {
            for j in 0..9 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((r[(i, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn amplitude_damping_trace_preserving() {
        let d = dissipator_from_jumps(2, &[sigma_minus()]).unwrap();
        assert!(d.trace_residual(true) < 1e-15);
        assert!(d.hermiticity_preservation_residual() < 1e-15);
    }

    #[test]
    fn choi_round_trip() {
        let d = dissipator_from_jumps(2, &[sigma_minus()]).unwrap();
        let back = map_of_choi(choi_of_map(&d).as_ref()).unwrap();
        assert_eq!(linalg::max_abs_diff(back.mat(), d.mat()), 0.0);
    }
}
