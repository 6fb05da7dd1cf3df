//! Dense nonsymmetric eigensolver front end.
//!
//! Backends declare whether they may be called concurrently; calls into a
//! non-reentrant backend are serialized behind a process-wide lock.

use std::sync::{Arc, Mutex, OnceLock};

use faer::linalg::solvers::DenseSolveCore;
use faer::{c64, Mat, MatRef};

use super::balance::balance;
use crate::error::{DqcError, Result};
use crate::linalg::{self, CMat};
use crate::opcore::Superoperator;

/// Environment variable selecting the eigen path: `auto` (default), `real-form` or `complex`.
pub const BACKEND_ENV: &str = "DQC_EIGEN_BACKEND";

pub trait EigenBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn reentrant(&self) -> bool;
    fn eigenvalues_complex(&self, m: MatRef<'_, c64>) -> Result<Vec<c64>>;
    fn eigenvalues_real(&self, m: MatRef<'_, f64>) -> Result<Vec<c64>>;
    /// Eigenvalues and right eigenvectors as columns.
    fn eigen_complex(&self, m: MatRef<'_, c64>) -> Result<(Vec<c64>, CMat)>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct FaerBackend;

fn evd_err(e: impl std::fmt::Debug) -> DqcError {
    DqcError::Eigensolver(format!("{e:?}"))
}

fn check_finite(vals: &[c64]) -> Result<()> {
    if vals.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(DqcError::Eigensolver("non-finite eigenvalue".into()))
    }
}

impl EigenBackend for FaerBackend {
    fn name(&self) -> &'static str {
        "faer"
    }

    fn reentrant(&self) -> bool {
        true
    }

    fn eigenvalues_complex(&self, m: MatRef<'_, c64>) -> Result<Vec<c64>> {
        let v = m.eigenvalues().map_err(evd_err)?;
        check_finite(&v)?;
        Ok(v)
    }

    fn eigenvalues_real(&self, m: MatRef<'_, f64>) -> Result<Vec<c64>> {
        let v = m.eigenvalues().map_err(evd_err)?;
        check_finite(&v)?;
        Ok(v)
    }

    fn eigen_complex(&self, m: MatRef<'_, c64>) -> Result<(Vec<c64>, CMat)> {
        let e = m.eigen().map_err(evd_err)?;
        let n = m.nrows();
        let vals: Vec<c64> = (0..n).map(|i| e.S()[i]).collect();
        check_finite(&vals)?;
        Ok((vals, e.U().to_owned()))
    }
}

/// How Hermiticity-preserving superoperators are diagonalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenPath {
    /// Real Hermitian-basis form when the map preserves Hermiticity, complex otherwise.
    Auto,
    /// Always the complex solver.
    Complex,
}

impl EigenPath {
    pub fn from_env() -> Result<Self> {
        match std::env::var(BACKEND_ENV) {
            Err(_) => Ok(Self::Auto),
            Ok(v) => match v.trim().to_ascii_lowercase().as_str() {
                "" | "auto" | "real-form" | "faer" => Ok(Self::Auto),
                "complex" | "faer-complex" => Ok(Self::Complex),
                other => Err(DqcError::InvalidParameter {
                    name: BACKEND_ENV,
                    reason: format!("unknown backend `{other}`"),
                }),
            },
        }
    }
}

/// Eigen-decomposition with biorthonormal left vectors: `left[:,α]† right[:,β] = δ_αβ`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<c64>,
    pub right: CMat,
    pub left: CMat,
}

impl EigenDecomposition {
    /// `max_α ‖M v_α − λ_α v_α‖ / ‖v_α‖`.
    pub fn max_residual(&self, m: MatRef<'_, c64>) -> f64 {
        let mv = m * &self.right;
        let mut worst = 0.0f64;
        for (a, &lam) in self.values.iter().enumerate() {
            let mut r = 0.0;
            let mut nv = 0.0;
            for i in 0..m.nrows() {
                r += (mv[(i, a)] - lam * self.right[(i, a)]).norm_sqr();
                nv += self.right[(i, a)].norm_sqr();
            }
            worst = worst.max((r / nv).sqrt());
        }
        worst
    }

    /// `max |L† R − 1|`.
    pub fn biorthogonality_residual(&self) -> f64 {
        let g = self.left.adjoint() * &self.right;
        linalg::max_abs_diff(g.as_ref(), linalg::identity(self.values.len()).as_ref())
    }

    /// Eigenvector overlaps `O_αβ = (L_α† L_β)(R_β† R_α)`.
    pub fn overlaps(&self) -> CMat {
        overlap_matrix(self.right.as_ref(), self.left.as_ref())
    }

    /// Per-eigenvalue condition numbers `κ_α = √O_αα`.
    pub fn condition_estimate(&self) -> Vec<f64> {
        (0..self.values.len())
            .map(|a| {
                let l: f64 = (0..self.left.nrows()).map(|i| self.left[(i, a)].norm_sqr()).sum();
                let r: f64 = (0..self.right.nrows()).map(|i| self.right[(i, a)].norm_sqr()).sum();
                (l * r).sqrt()
            })
            .collect()
    }
}

/// `O_αβ = (L_α† L_β)(R_β† R_α)` for biorthonormal right and left eigenvectors.
pub fn overlap_matrix(right: MatRef<'_, c64>, left: MatRef<'_, c64>) -> CMat {
    let ll = left.adjoint() * left;
    let rr = right.adjoint() * right;
    let n = ll.nrows();
    CMat::from_fn(n, n, |a, b| ll[(a, b)] * rr[(b, a)])
}

fn check_square(r: usize, c: usize) -> Result<()> {
    if r == c {
        Ok(())
    } else {
        Err(DqcError::DimensionMismatch { expected: r, got: c })
    }
}

static SERIAL: Mutex<()> = Mutex::new(());

#[derive(Clone)]
pub struct EigenSolver {
    backend: Arc<dyn EigenBackend>,
    path: EigenPath,
}

impl std::fmt::Debug for EigenSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EigenSolver")
            .field("backend", &self.backend.name())
            .field("path", &self.path)
            .finish()
    }
}

impl Default for EigenSolver {
    fn default() -> Self {
        Self { backend: Arc::new(FaerBackend), path: EigenPath::Auto }
    }
}

impl EigenSolver {
    pub fn new(backend: Arc<dyn EigenBackend>, path: EigenPath) -> Self {
        Self { backend, path }
    }

    pub fn from_env() -> Result<Self> {
        Ok(Self { backend: Arc::new(FaerBackend), path: EigenPath::from_env()? })
    }

    pub fn backend_name(&self) -> &'static str {
        self.backend.name()
    }

    pub fn path(&self) -> EigenPath {
        self.path
    }

    fn serialized<T>(&self, f: impl FnOnce() -> T) -> T {
        if self.backend.reentrant() {
            f()
        } else {
            let _guard = SERIAL.lock().unwrap_or_else(|p| p.into_inner());
            f()
        }
    }

    /// Eigenvalues after balancing; isolated diagonal entries are returned exactly.
    pub fn eigenvalues(&self, m: MatRef<'_, c64>) -> Result<Vec<c64>> {
        check_square(m.nrows(), m.ncols())?;
        let b = balance(m, true);
        let mut vals = b.isolated_eigenvalues();
        if b.hi > b.lo {
            vals.extend(self.serialized(|| self.backend.eigenvalues_complex(b.core()))?);
        }
        Ok(vals)
    }

    pub fn eigenvalues_real(&self, m: MatRef<'_, f64>) -> Result<Vec<c64>> {
        check_square(m.nrows(), m.ncols())?;
        let b = balance(m, true);
        let mut vals = b.isolated_eigenvalues();
        if b.hi > b.lo {
            vals.extend(self.serialized(|| self.backend.eigenvalues_real(b.core()))?);
        }
        Ok(vals)
    }

    /// Spectrum of a superoperator, through the real Hermitian-basis form when allowed.
    pub fn superop_eigenvalues(&self, s: &Superoperator) -> Result<Vec<c64>> {
        if self.path == EigenPath::Auto && s.dim() > 1 {
            let scale = linalg::max_abs(s.mat()).max(1.0);
            if s.hermiticity_preservation_residual() <= 1e-12 * scale {
                let (r, _) = s.real_form();
                return self.eigenvalues_real(r.as_ref());
            }
        }
        self.eigenvalues(s.mat())
    }

    /// Eigenvalues with unit-norm right and biorthonormal left eigenvectors; balanced by scaling only.
    pub fn eigen(&self, m: MatRef<'_, c64>) -> Result<EigenDecomposition> {
        check_square(m.nrows(), m.ncols())?;
        let b = balance(m, false);
        let (values, x) = self.serialized(|| self.backend.eigen_complex(b.mat.as_ref()))?;
        let n = m.nrows();
        let mut right = linalg::zeros(n, n);
        for a in 0..n {
            let col: Vec<c64> = (0..n).map(|i| x[(i, a)]).collect();
            let v = b.back_transform(&col);
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            for i in 0..n {
                right[(i, a)] = v[i] / norm;
            }
        }
        let inv = right.partial_piv_lu().inverse();
        let left = inv.adjoint().to_owned();
        Ok(EigenDecomposition { values, right, left })
    }
}

static GLOBAL: OnceLock<EigenSolver> = OnceLock::new();

/// Process-wide solver configured from the environment (falls back to the default on a bad value).
pub fn solver() -> &'static EigenSolver {
    GLOBAL.get_or_init(|| match EigenSolver::from_env() {
        Ok(s) => s,
        Err(e) => {
            log::warn!("{e}; using the default eigen path");
            EigenSolver::default()
        }
    })
}

pub fn eigenvalues(m: MatRef<'_, c64>) -> Result<Vec<c64>> {
    solver().eigenvalues(m)
}

pub fn eigenvalues_real(m: MatRef<'_, f64>) -> Result<Vec<c64>> {
    solver().eigenvalues_real(m)
}

pub fn superop_eigenvalues(s: &Superoperator) -> Result<Vec<c64>> {
    solver().superop_eigenvalues(s)
}

pub fn eigen(m: MatRef<'_, c64>) -> Result<EigenDecomposition> {
    solver().eigen(m)
}

/// Lifts a real matrix to complex entries.
pub fn complexify(m: MatRef<'_, f64>) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Exclusive {
        inside: AtomicUsize,
        max_seen: AtomicUsize,
    }

    impl EigenBackend for Exclusive {
        fn name(&self) -> &'static str {
            "exclusive-test"
        }
        fn reentrant(&self) -> bool {
            false
        }
        fn eigenvalues_complex(&self, m: MatRef<'_, c64>) -> Result<Vec<c64>> {
            let now = self.inside.fetch_add(1, Ordering::SeqCst) + 1;
            self.max_seen.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(std::time::Duration::from_millis(2));
            let out = FaerBackend.eigenvalues_complex(m);
            self.inside.fetch_sub(1, Ordering::SeqCst);
            out
        }
        fn eigenvalues_real(&self, m: MatRef<'_, f64>) -> Result<Vec<c64>> {
            FaerBackend.eigenvalues_real(m)
        }
        fn eigen_complex(&self, m: MatRef<'_, c64>) -> Result<(Vec<c64>, CMat)> {
            FaerBackend.eigen_complex(m)
        }
    }

    #[test]
    fn non_reentrant_backend_is_serialized() {
        let backend = Arc::new(Exclusive { inside: AtomicUsize::new(0), max_seen: AtomicUsize::new(0) });
        let solver = EigenSolver::new(backend.clone(), EigenPath::Complex);
        let m = Mat::from_fn(4, 4, |i, j| c64::new((i + 2 * j) as f64, (i * j) as f64));
        std::thread::scope(|s| {
            for _ in 0..4 {
                let solver = solver.clone();
                let m = m.clone();
                s.spawn(move || {
                    for _ in 0..3 {
                        solver.eigenvalues(m.as_ref()).unwrap();
                    }
                });
            }
        });
        assert_eq!(backend.max_seen.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn diagonal_spectrum() {
        let d = [c64::new(1.0, 2.0), c64::new(-3.0, 0.5), c64::new(0.0, 0.0)];
        let m = Mat::from_fn(3, 3, |i, j| if i == j { d[i] } else { linalg::ZERO });
        let mut v = eigenvalues(m.as_ref()).unwrap();
        v.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((v[0] - d[1]).norm() < 1e-14);
        assert!((v[2] - d[0]).norm() < 1e-14);
    }

    #[test]
    fn left_vectors_are_biorthonormal() {
        let m = Mat::from_fn(5, 5, |i, j| c64::new(((i * 7 + j * 3) % 5) as f64 - 2.0, (i as f64 - j as f64) * 0.3));
        let e = eigen(m.as_ref()).unwrap();
        assert!(e.biorthogonality_residual() < 1e-10);
        assert!(e.max_residual(m.as_ref()) < 1e-10);
    }
}
