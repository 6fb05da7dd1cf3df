use faer::{c64, MatRef};
use serde::{Deserialize, Serialize};

use super::operator::{Operator, Role};
use super::superop::{check_psd, Superoperator, PSD_TOL};
use crate::error::{DqcError, Result};
use crate::linalg::{self, CMat, ZERO};

/// Orthonormal Hilbert–Schmidt bases of N×N operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    /// `F_{a+Nb} = E_ab`.
    MatrixUnits,
    /// Generalized Gell-Mann generators, optionally followed by `1/√N`.
    SuN { include_identity: bool },
}

#[derive(Clone, Debug)]
pub struct HSBasis {
    kind: BasisKind,
    n: usize,
    elements: Vec<Operator>,
}

impl HSBasis {
    pub fn new(kind: BasisKind, n: usize) -> Self {
        let mut elements = Vec::with_capacity(n * n);
        match kind {
            BasisKind::MatrixUnits => {
                for b in 0..n {
                    for a in 0..n {
                        let mut m = linalg::zeros(n, n);
                        m[(a, b)] = linalg::ONE;
                        elements.push(m);
                    }
                }
            }
            BasisKind::SuN { include_identity } => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                for b in 0..n {
                    for a in 0..b {
                        let mut s = linalg::zeros(n, n);
                        s[(a, b)] = c64::new(h, 0.0);
                        s[(b, a)] = c64::new(h, 0.0);
                        elements.push(s);
                        let mut t = linalg::zeros(n, n);
                        t[(a, b)] = c64::new(0.0, -h);
                        t[(b, a)] = c64::new(0.0, h);
                        elements.push(t);
                    }
                }
                for l in 1..n {
                    let norm = ((l * (l + 1)) as f64).sqrt().recip();
                    let mut d = linalg::zeros(n, n);
                    for k in 0..l {
                        d[(k, k)] = c64::new(norm, 0.0);
                    }
                    d[(l, l)] = c64::new(-(l as f64) * norm, 0.0);
                    elements.push(d);
                }
                if include_identity {
                    elements.push(linalg::scale(linalg::identity(n).as_ref(), c64::new((n as f64).sqrt().recip(), 0.0)));
                }
            }
        }
        let elements = elements
            .into_iter()
            .map(|m| Operator::new(m, Role::Generic).expect("basis elements are finite and square"))
            .collect();
        Self { kind, n, elements }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    /// N²×d matrix whose m-th column is `vec(F_m)`.
    pub fn columns(&self) -> CMat {
        let n2 = self.n * self.n;
        let mut b = linalg::zeros(n2, self.len());
        for (m, f) in self.elements.iter().enumerate() {
            for (r, v) in linalg::vec_of(f.mat()).into_iter().enumerate() {
                b[(r, m)] = v;
            }
        }
        b
    }

    /// `max |Tr(F_n F_m†) − δ_nm|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let b = self.columns();
        let g = b.adjoint() * &b;
        linalg::max_abs_diff(g.as_ref(), linalg::identity(self.len()).as_ref())
    }
}

/// Hermitian PSD coefficient matrix of the dissipator in a Hilbert–Schmidt basis.
#[derive(Clone, Debug)]
pub struct KossakowskiMatrix {
    mat: CMat,
}

/// Eigenvalues above `RANK_CUTOFF·Tr K` count toward the rank.
pub const RANK_CUTOFF: f64 = 1e-12;

impl KossakowskiMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(DqcError::DimensionMismatch { expected: mat.nrows(), got: mat.ncols() });
        }
        let scale = linalg::max_abs(mat.as_ref());
        let residual = linalg::hermiticity_residual(mat.as_ref());
        if residual > 1e-12 * scale.max(f64::MIN_POSITIVE) && residual > 0.0 {
            return Err(DqcError::NotHermitian { residual });
        }
        check_psd(mat.as_ref(), PSD_TOL)?;
        Ok(Self { mat: linalg::hermitize(mat.as_ref()) })
    }

    pub(crate) fn new_unchecked(mat: CMat) -> Self {
        Self { mat }
    }

    pub fn mat(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn basis_dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(self.mat.as_ref()).re
    }

    pub fn rank(&self) -> Result<usize> {
        let tr = self.trace();
        let vals = linalg::eigvalsh(self.mat.as_ref())?;
        Ok(vals.iter().filter(|&&v| v > RANK_CUTOFF * tr).count())
    }

    /// Copy rescaled to `Tr K = target`.
    pub fn normalized(&self, target: f64) -> Self {
        let tr = self.trace();
        if tr == 0.0 {
            return self.clone();
        }
        Self { mat: linalg::scale(self.mat.as_ref(), c64::new(target / tr, 0.0)) }
    }

    /// K expressed in the matrix-unit basis: `B K B†`.
    pub fn in_matrix_units(&self, basis: &HSBasis) -> Result<CMat> {
        if basis.len() != self.basis_dim() {
            return Err(DqcError::DimensionMismatch { expected: basis.len(), got: self.basis_dim() });
        }
        if basis.kind() == BasisKind::MatrixUnits {
            return Ok(self.mat.clone());
        }
        let b = basis.columns();
        Ok(&b * &self.mat * b.adjoint())
    }
}

/// GKLS dissipator `Σ K_nm (F_n ρ F_m† − ½{F_m†F_n, ρ})`.
pub fn dissipator_from_kossakowski(k: &KossakowskiMatrix, basis: &HSBasis) -> Result<Superoperator> {
    let km = k.in_matrix_units(basis)?;
    Ok(dissipator_from_matrix_unit_kossakowski(basis.dim(), km.as_ref()))
}

/// Realigns a matrix-unit Kossakowski matrix into superoperator form.
pub(crate) fn dissipator_from_matrix_unit_kossakowski(n: usize, k: MatRef<'_, c64>) -> Superoperator {
    let n2 = n * n;
    // Ψ[(a+Nc), (b+Nd)] = K[(a+Nb), (c+Nd)]
    let mut out = CMat::from_fn(n2, n2, |r, col| {
        let (a, c) = (r % n, r / n);
        let (b, d) = (col % n, col / n);
        k[(a + n * b, c + n * d)]
    });
    // X[d,b] = Σ_a K[a+Nb, a+Nd]
    let x = CMat::from_fn(n, n, |d, b| (0..n).map(|a| k[(a + n * b, a + n * d)]).sum::<c64>());
    let half = c64::new(-0.5, 0.0);
    for j in 0..n {
        for kk in 0..n {
            for l in 0..n {
                out[(kk + n * j, l + n * j)] += half * x[(kk, l)];
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let v = half * x[(j, i)];
            if v == ZERO {
                continue;
            }
            for kk in 0..n {
                out[(kk + n * i, kk + n * j)] += v;
            }
        }
    }
    Superoperator::from_mat(out).expect("square by construction")
}

/// Jump operators `L_α = Σ_m Y_{mα} F_m` from `K = Y Y†`, one per eigenvalue above the rank cutoff.
pub fn kossakowski_to_jumps(k: &KossakowskiMatrix, basis: &HSBasis) -> Result<Vec<Operator>> {
    if basis.len() != k.basis_dim() {
        return Err(DqcError::DimensionMismatch { expected: basis.len(), got: k.basis_dim() });
    }
    let tr = k.trace();
    let (vals, vecs) = linalg::eigh(k.mat())?;
    let n = basis.dim();
    let mut jumps = Vec::new();
    for (alpha, &mu) in vals.iter().enumerate() {
        if mu <= RANK_CUTOFF * tr || mu <= 0.0 {
            continue;
        }
        let s = mu.sqrt();
        let mut l = linalg::zeros(n, n);
        for (m, f) in basis.elements().iter().enumerate() {
            let y = vecs[(m, alpha)] * s;
            if y == ZERO {
                continue;
            }
            let fm = f.mat();
            for j in 0..n {
                for i in 0..n {
                    l[(i, j)] += y * fm[(i, j)];
                }
            }
        }
        jumps.push(Operator::new(l, Role::Jump)?);
    }
    Ok(jumps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bases_are_orthonormal() {
        for n in 2..6 {
            assert!(HSBasis::new(BasisKind::MatrixUnits, n).orthonormality_residual() < 1e-12);
            let su = HSBasis::new(BasisKind::SuN { include_identity: true }, n);
            assert_eq!(su.len(), n * n);
            assert!(su.orthonormality_residual() < 1e-12);
            let traceless = HSBasis::new(BasisKind::SuN { include_identity: false }, n);
            assert_eq!(traceless.len(), n * n - 1);
            for f in traceless.elements() {
                assert!(linalg::trace(f.mat()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_kossakowski_gives_no_jumps() {
        let basis = HSBasis::new(BasisKind::MatrixUnits, 3);
        let k = KossakowskiMatrix::new(linalg::zeros(9, 9)).unwrap();
        assert!(kossakowski_to_jumps(&k, &basis).unwrap().is_empty());
        let d = dissipator_from_kossakowski(&k, &basis).unwrap();
        assert_eq!(linalg::max_abs(d.mat()), 0.0);
    }

    #[test]
    fn indefinite_matrix_rejected() {
        let mut m = linalg::identity(4);
        m[(3, 3)] = c64::new(-1.0, 0.0);
        assert!(matches!(KossakowskiMatrix::new(m), Err(DqcError::NotPsd { .. })));
    }
}
