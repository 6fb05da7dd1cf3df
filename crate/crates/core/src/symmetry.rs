//! Unitary and antiunitary symmetry checks, spectral reflection tests and sector decomposition.

use std::f64::consts::{PI, TAU};

use faer::{c64, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{DqcError, Result};
use crate::linalg::{self, CMat};
use crate::spectra::{eigen, matching};

/// Residual tolerance shared by all symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Eigen-phase clustering tolerance for sector grouping, in radians.
pub const PHASE_CLUSTER_TOL: f64 = 1e-6;
/// Relative tolerance for spectral reflection matching.
pub const REFLECTION_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryKind {
    #[serde(rename = "T+")]
    TPlus,
    #[serde(rename = "T-")]
    TMinus,
    #[serde(rename = "C+")]
    CPlus,
    #[serde(rename = "C-")]
    CMinus,
    #[serde(rename = "P")]
    P,
    #[serde(rename = "Q+")]
    QPlus,
    #[serde(rename = "Q-")]
    QMinus,
}

impl SymmetryKind {
    pub fn is_antiunitary(self) -> bool {
        matches!(self, Self::TPlus | Self::TMinus | Self::CPlus | Self::CMinus)
    }

    /// Whether the action involves the adjoint (`C` and `Q` types).
    pub fn uses_adjoint(self) -> bool {
        matches!(self, Self::CPlus | Self::CMinus | Self::QPlus | Self::QMinus)
    }

    /// Sign `s` in `S σ(M) S⁻¹ = s M`; `P` defaults to a commuting unitary.
    pub fn default_sign(self) -> f64 {
        match self {
            Self::TMinus | Self::CMinus | Self::QMinus => -1.0,
            _ => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::TPlus => "T+",
            Self::TMinus => "T-",
            Self::CPlus => "C+",
            Self::CMinus => "C-",
            Self::P => "P",
            Self::QPlus => "Q+",
            Self::QMinus => "Q-",
        }
    }
}

/// A symmetry given by its unitary part; antiunitary kinds act as `U ∘ K` with `K` complex conjugation.
#[derive(Clone, Debug)]
pub struct SymmetryOp {
    kind: SymmetryKind,
    unitary: CMat,
    square: i8,
    sign: f64,
}

impl SymmetryOp {
    /// Checks unitarity and the declared square (`U Ū` for antiunitary kinds, `U²` otherwise).
    pub fn new(kind: SymmetryKind, unitary: CMat, square: i8) -> Result<Self> {
        let n = unitary.nrows();
        if unitary.ncols() != n {
            return Err(DqcError::DimensionMismatch { expected: n, got: unitary.ncols() });
        }
        if square != 1 && square != -1 {
            return Err(DqcError::InvalidParameter { name: "square", reason: "must be +1 or -1".into() });
        }
        let op = Self { kind, unitary, square, sign: kind.default_sign() };
        let unit_res = op.unitarity_residual();
        if unit_res > 1e-10 {
            return Err(DqcError::InvalidParameter { name: "unitary", reason: format!("U†U − 1 = {unit_res:.3e}") });
        }
        let sq_res = op.square_residual();
        if sq_res > 1e-10 {
            return Err(DqcError::InvalidParameter {
                name: "square",
                reason: format!("declared square {square} violated by {sq_res:.3e}"),
            });
        }
        if !kind.is_antiunitary() && square != 1 {
            return Err(DqcError::InvalidParameter { name: "square", reason: "unitary involutions square to +1".into() });
        }
        Ok(op)
    }

    /// Sets the sign for `P`, which may either commute or anticommute.
    pub fn with_sign(mut self, sign: f64) -> Self {
        if self.kind == SymmetryKind::P {
            self.sign = sign.signum();
        }
        self
    }

    pub fn kind(&self) -> SymmetryKind {
        self.kind
    }

    pub fn unitary(&self) -> &CMat {
        &self.unitary
    }

    pub fn square(&self) -> i8 {
        self.square
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    fn unitarity_residual(&self) -> f64 {
        let g = self.unitary.adjoint() * &self.unitary;
        linalg::max_abs_diff(g.as_ref(), linalg::identity(self.unitary.nrows()).as_ref())
    }

    fn square_residual(&self) -> f64 {
        let u = &self.unitary;
        let sq = if self.kind.is_antiunitary() { u * linalg::conj(u.as_ref()) } else { u * u };
        let target = linalg::scale(linalg::identity(u.nrows()).as_ref(), c64::new(self.square as f64, 0.0));
        linalg::max_abs_diff(sq.as_ref(), target.as_ref())
    }

    /// `U σ(M) U⁻¹` with `σ` the conjugation, transpose, identity or adjoint for T, C, P, Q.
    pub fn act(&self, m: MatRef<'_, c64>) -> CMat {
        let inner = match (self.kind.is_antiunitary(), self.kind.uses_adjoint()) {
            (true, false) => linalg::conj(m),
            (true, true) => linalg::transpose(m),
            (false, false) => m.to_owned(),
            (false, true) => linalg::dagger(m),
        };
        &self.unitary * inner * self.unitary.adjoint()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub kind: SymmetryKind,
    pub square: i8,
    pub sign: f64,
    pub residual: f64,
    pub passed: bool,
}

/// `‖U σ(M) U⁻¹ − s M‖_F / ‖M‖_F`, passing below `tol`.
pub fn check_symmetry(m: MatRef<'_, c64>, sym: &SymmetryOp, tol: f64) -> Result<SymmetryReport> {
    if m.nrows() != sym.unitary.nrows() || m.ncols() != m.nrows() {
        return Err(DqcError::DimensionMismatch { expected: sym.unitary.nrows(), got: m.nrows() });
    }
    let image = sym.act(m);
    let target = linalg::scale(m, c64::new(sym.sign, 0.0));
    let diff = &image - &target;
    let norm = linalg::frobenius(m).max(f64::MIN_POSITIVE);
    let residual = linalg::frobenius(diff.as_ref()) / norm;
    Ok(SymmetryReport { kind: sym.kind, square: sym.square, sign: sym.sign, residual, passed: residual < tol })
}

/// Image of an eigenvalue under the spectral reflection implied by a symmetry kind.
pub fn reflect(kind: SymmetryKind, z: c64) -> Result<c64> {
    Ok(match kind {
        SymmetryKind::TPlus => z.conj(),
        SymmetryKind::TMinus => -z.conj(),
        SymmetryKind::CMinus => -z,
        other => {
            return Err(DqcError::InvalidParameter {
                name: "kind",
                reason: format!("{} implies no eigenvalue reflection", other.label()),
            })
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReflectionReport {
    pub kind: SymmetryKind,
    /// Largest distance in an optimal matching, `None` when no matching within tolerance exists.
    pub max_distance: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Matches the spectrum to its reflected image within `rel_tol · max|λ|`.
pub fn spectrum_reflection_check(spec: &[c64], kind: SymmetryKind, rel_tol: f64) -> Result<ReflectionReport> {
    let image: Vec<c64> = spec.iter().map(|&z| reflect(kind, z)).collect::<Result<_>>()?;
    let scale = spec.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tolerance = rel_tol * scale;
    let max_distance = matching::match_within(spec, &image, tolerance);
    Ok(ReflectionReport { kind, max_distance, tolerance, passed: max_distance.is_some() })
}

/// Isometries onto the simultaneous eigenspaces of an induced conjugation `ρ ↦ UρU†`.
#[derive(Clone, Debug)]
pub struct SectorDecomposition {
    /// Eigen-phase of the induced action on each sector, in `(−π, π]`.
    pub phases: Vec<f64>,
    pub labels: Vec<String>,
    /// Orthonormal columns spanning each sector, in column-vectorized form.
    pub bases: Vec<CMat>,
}

impl SectorDecomposition {
    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(|b| b.ncols()).collect()
    }

    pub fn projector(&self, k: usize) -> CMat {
        &self.bases[k] * self.bases[k].adjoint()
    }

    /// Largest deviation from idempotence, mutual orthogonality and completeness.
    pub fn projector_residual(&self) -> f64 {
        let dim = self.bases.first().map_or(0, |b| b.nrows());
        let mut total = linalg::zeros(dim, dim);
        let mut worst = 0.0f64;
        let proj: Vec<CMat> = (0..self.len()).map(|k| self.projector(k)).collect();
        for (a, pa) in proj.iter().enumerate() {
            let sq = pa * pa;
            worst = worst.max(linalg::max_abs_diff(sq.as_ref(), pa.as_ref()));
            for pb in &proj[a + 1..] {
                worst = worst.max(linalg::max_abs((pa * pb).as_ref()));
            }
            total += pa;
        }
        worst.max(linalg::max_abs_diff(total.as_ref(), linalg::identity(dim).as_ref()))
    }

    /// Compressions `B_s† M B_s`.
    pub fn blocks(&self, m: MatRef<'_, c64>) -> Vec<CMat> {
        self.bases.iter().map(|b| b.adjoint() * (m * b)).collect()
    }

    /// Eigenvalues of every block, tagged by sector label.
    pub fn sector_spectra(&self, m: MatRef<'_, c64>) -> Result<Vec<Vec<c64>>> {
        self.blocks(m).iter().map(|b| eigen::eigenvalues(b.as_ref())).collect()
    }
}

/// Angle of `z` wrapped to `(−π, π]`.
fn wrap(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(TAU);
    if p > PI {
        p -= TAU;
    }
    p
}

/// Groups phases on the circle; consecutive sorted phases closer than `tol` share a cluster.
fn cluster_phases(phases: &[f64], tol: f64) -> Vec<Vec<usize>> {
    if phases.is_empty() {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..phases.len()).collect();
    order.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]));
    let mut clusters: Vec<Vec<usize>> = vec![vec![order[0]]];
    for w in order.windows(2) {
        if phases[w[1]] - phases[w[0]] <= tol {
            clusters.last_mut().expect("non-empty").push(w[1]);
        } else {
            clusters.push(vec![w[1]]);
        }
    }
    if clusters.len() > 1 {
        let first = phases[clusters[0][0]];
        let last = *clusters.last().and_then(|c| c.last()).expect("non-empty");
        if first + TAU - phases[last] <= tol {
            let tail = clusters.pop().expect("non-empty");
            clusters[0].extend(tail);
        }
    }
    clusters
}

/// Orthonormal eigenbasis of a unitary matrix with its eigen-phases.
fn unitary_eigenbasis(u: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = u.nrows();
    let dec = eigen::eigen(u.as_ref())?;
    let phases: Vec<f64> = dec.values.iter().map(|z| z.arg()).collect();
    let mut v = linalg::zeros(n, n);
    for cluster in cluster_phases(&phases, PHASE_CLUSTER_TOL) {
        let cols = CMat::from_fn(n, cluster.len(), |i, k| dec.right[(i, cluster[k])]);
        let q = cols.qr().compute_thin_Q();
        for (k, &c) in cluster.iter().enumerate() {
            for i in 0..n {
                v[(i, c)] = q[(i, k)];
            }
        }
    }
    Ok((phases, v))
}

/// Splits a superoperator into the sectors of the induced action `ρ ↦ UρU†`.
///
/// The induced action `Ū⊗U` must commute with `l` to `SYMMETRY_TOL`; sector bases are built from
/// `vec(v_i v_j†)` for eigenvectors of `U`, grouped by the phase difference `φ_i − φ_j`.
pub fn block_decompose(l: MatRef<'_, c64>, u: &CMat) -> Result<SectorDecomposition> {
    let n = u.nrows();
    if l.nrows() != n * n || l.ncols() != n * n {
        return Err(DqcError::DimensionMismatch { expected: n * n, got: l.nrows() });
    }
    let induced = linalg::kron(linalg::conj(u.as_ref()).as_ref(), u.as_ref());
    let comm = &induced * l - l * &induced;
    let residual = linalg::frobenius(comm.as_ref()) / linalg::frobenius(l).max(f64::MIN_POSITIVE);
    if residual > SYMMETRY_TOL {
        return Err(DqcError::Commutation { residual });
    }
    let (phi, v) = unitary_eigenbasis(u)?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..n).map(move |i| (i, j))).collect();
    let diffs: Vec<f64> = pairs.iter().map(|&(i, j)| wrap(phi[i] - phi[j])).collect();
    let mut clusters = cluster_phases(&diffs, PHASE_CLUSTER_TOL);
    clusters.sort_by(|a, b| diffs[a[0]].abs().total_cmp(&diffs[b[0]].abs()).then(diffs[a[0]].total_cmp(&diffs[b[0]])));
    let mut out = SectorDecomposition { phases: Vec::new(), labels: Vec::new(), bases: Vec::new() };
    for cluster in clusters {
        let phase = wrap(diffs[cluster[0]]);
        let basis = CMat::from_fn(n * n, cluster.len(), |row, k| {
            let (i, j) = pairs[cluster[k]];
            let (p, q) = (row % n, row / n);
            v[(p, i)] * v[(q, j)].conj()
        });
        out.labels.push(format!("phase={phase:.6}"));
        out.phases.push(phase);
        out.bases.push(basis);
    }
    Ok(out)
}

pub use crate::spectra::eigen::overlap_matrix;

/// Overlaps `O_{α,β}` between each eigenvalue `λ_α` and the eigenvalue `λ_β` nearest to `pair(λ_α)`.
pub fn paired_overlaps(dec: &eigen::EigenDecomposition, pair: impl Fn(c64) -> c64) -> Vec<(usize, usize, c64)> {
    let o = dec.overlaps();
    let mut out = Vec::with_capacity(dec.values.len());
    for (a, &lam) in dec.values.iter().enumerate() {
        let target = pair(lam);
        let b = (0..dec.values.len())
            .min_by(|&x, &y| (dec.values[x] - target).norm().total_cmp(&(dec.values[y] - target).norm()))
            .expect("non-empty spectrum");
        out.push((a, b, o[(a, b)]));
    }
    out
}

/// A matrix with a `C−` symmetry of square `square`: `H = A − U Aᵀ U†` with `U Ū = square`.
pub fn c_minus_example(a: &CMat, square: i8) -> Result<(CMat, SymmetryOp)> {
    let n = a.nrows();
    let u = match square {
        1 => linalg::identity(n),
        -1 if n % 2 == 0 => {
            let h = n / 2;
            CMat::from_fn(n, n, |i, j| {
                if i < h && j == i + h {
                    linalg::ONE
                } else if i >= h && j + h == i {
                    -linalg::ONE
                } else {
                    linalg::ZERO
                }
            })
        }
        _ => {
            return Err(DqcError::InvalidParameter { name: "square", reason: "−1 needs even dimension, else ±1".into() })
        }
    };
    let h = a - &u * linalg::transpose(a.as_ref()) * u.adjoint();
    Ok((h, SymmetryOp::new(SymmetryKind::CMinus, u, square)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_matrix_has_t_plus() {
        let m = CMat::from_fn(3, 3, |i, j| c64::new((i * 3 + j) as f64 - 4.0, 0.0));
        let t = SymmetryOp::new(SymmetryKind::TPlus, linalg::identity(3), 1).unwrap();
        assert!(check_symmetry(m.as_ref(), &t, SYMMETRY_TOL).unwrap().passed);
    }

    #[test]
    fn wrong_square_rejected() {
        assert!(SymmetryOp::new(SymmetryKind::TPlus, linalg::identity(2), -1).is_err());
    }

    #[test]
    fn wraparound_cluster_merges() {
        let c = cluster_phases(&[PI - 1e-9, -PI + 1e-9, 0.0], 1e-6);
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn identity_unitary_gives_one_sector() {
        let l = CMat::from_fn(4, 4, |i, j| c64::new((i + j) as f64, (i as f64) - (j as f64)));
        let d = block_decompose(l.as_ref(), &linalg::identity(2)).unwrap();
        assert_eq!(d.dims(), vec![4]);
        assert!(d.projector_residual() < 1e-12);
    }
}
