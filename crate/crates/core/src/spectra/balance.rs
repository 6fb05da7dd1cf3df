//! Balancing ahead of the nonsymmetric eigensolver: permutations that isolate eigenvalues
//! followed by radix-2 diagonal scaling, as in LAPACK's `gebal`.

use faer::{c64, Mat, MatRef};

pub trait Entry: Copy {
    fn modulus(self) -> f64;
    fn times(self, s: f64) -> Self;
    fn is_zero(self) -> bool;
    fn to_c64(self) -> c64;
}

impl Entry for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn times(self, s: f64) -> Self {
        self * s
    }
    fn is_zero(self) -> bool {
        self == 0.0
    }
    fn to_c64(self) -> c64 {
        c64::new(self, 0.0)
    }
}

impl Entry for c64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn times(self, s: f64) -> Self {
        self * s
    }
    fn is_zero(self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn to_c64(self) -> c64 {
        self
    }
}

/// `mat[p, q] = A[perm[p], perm[q]] · scale[q] / scale[p]`.
///
/// Rows and columns outside `lo..hi` form upper-triangular corners whose diagonals are eigenvalues.
#[derive(Clone, Debug)]
pub struct Balanced<T> {
    pub mat: Mat<T>,
    pub lo: usize,
    pub hi: usize,
    pub perm: Vec<usize>,
    pub scale: Vec<f64>,
}

impl<T: Entry> Balanced<T> {
    /// Eigenvalues read off the isolated diagonal entries.
    pub fn isolated_eigenvalues(&self) -> Vec<c64> {
        (0..self.lo).chain(self.hi..self.mat.nrows()).map(|i| self.mat[(i, i)].to_c64()).collect()
    }

    /// The block whose eigenvalues still need an iterative solver.
    pub fn core(&self) -> MatRef<'_, T> {
        self.mat.as_ref().submatrix(self.lo, self.lo, self.hi - self.lo, self.hi - self.lo)
    }

    /// Maps an eigenvector of the balanced matrix back to the input basis.
    pub fn back_transform(&self, x: &[c64]) -> Vec<c64> {
        let mut v = vec![c64::new(0.0, 0.0); x.len()];
        for (p, &xp) in x.iter().enumerate() {
            v[self.perm[p]] = xp * self.scale[p];
        }
        v
    }
}

const MAX_SWEEPS: usize = 200;
const SCALE_LIMIT: f64 = 1e150;

fn swap<T: Entry>(a: &mut Mat<T>, perm: &mut [usize], i: usize, j: usize) {
    if i == j {
        return;
    }
    let n = a.nrows();
    for r in 0..n {
        let t = a[(r, i)];
        a[(r, i)] = a[(r, j)];
        a[(r, j)] = t;
    }
    for c in 0..n {
        let t = a[(i, c)];
        a[(i, c)] = a[(j, c)];
        a[(j, c)] = t;
    }
    perm.swap(i, j);
}

pub fn balance<T: Entry>(m: MatRef<'_, T>, permute: bool) -> Balanced<T> {
    let n = m.nrows();
    let mut a = Mat::from_fn(n, n, |i, j| m[(i, j)]);
    let mut perm: Vec<usize> = (0..n).collect();
    let (mut lo, mut hi) = (0usize, n);
    if permute {
        // rows with no off-diagonal entries in the active columns sink to the bottom
        'rows: while hi > 0 {
            for j in (0..hi).rev() {
                if (0..hi).all(|i| i == j || a[(j, i)].is_zero()) {
                    swap(&mut a, &mut perm, j, hi - 1);
                    hi -= 1;
                    continue 'rows;
                }
            }
            break;
        }
        // columns with no off-diagonal entries in the active rows rise to the top
        'cols: while lo < hi {
            for j in lo..hi {
                if (lo..hi).all(|i| i == j || a[(i, j)].is_zero()) {
                    swap(&mut a, &mut perm, j, lo);
                    lo += 1;
                    continue 'cols;
                }
            }
            break;
        }
    }
    let mut scale = vec![1.0f64; n];
    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for i in lo..hi {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in lo..hi {
                if j != i {
                    c += a[(j, i)].modulus();
                    r += a[(i, j)].modulus();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / 2.0;
            while c < g && f < SCALE_LIMIT {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while c >= g && f > 1.0 / SCALE_LIMIT {
                f /= 2.0;
                c /= 4.0;
            }
            if (c + r) / f < 0.95 * s {
                let next = scale[i] * f;
                if !(1.0 / SCALE_LIMIT..=SCALE_LIMIT).contains(&next) {
                    continue;
                }
                scale[i] = next;
                changed = true;
                for k in 0..n {
                    a[(i, k)] = a[(i, k)].times(1.0 / f);
                    a[(k, i)] = a[(k, i)].times(f);
                }
            }
        }
        if !changed {
            break;
        }
    }
    Balanced { mat: a, lo, hi, perm, scale }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hidden_triangular_matrix_is_fully_isolated() {
        // a lower-triangular matrix conjugated by a permutation
        let n = 6;
        let order = [3usize, 0, 5, 1, 4, 2];
        let t = Mat::from_fn(n, n, |i, j| if j <= i { (1 + i + 2 * j) as f64 } else { 0.0 });
        let m = Mat::from_fn(n, n, |i, j| t[(order[i], order[j])]);
        let b = balance(m.as_ref(), true);
        assert_eq!(b.hi - b.lo, 0);
        let mut got: Vec<f64> = b.isolated_eigenvalues().iter().map(|z| z.re).collect();
        got.sort_by(f64::total_cmp);
        let mut want: Vec<f64> = (0..n).map(|i| t[(i, i)]).collect();
        want.sort_by(f64::total_cmp);
        assert_eq!(got, want);
    }

    #[test]
    fn scaling_is_a_similarity() {
        let m = Mat::from_fn(3, 3, |i, j| [[1.0, 1e6, 0.0], [1e-6, 2.0, 1e5], [3.0, 1e-4, 0.5]][i][j]);
        let b = balance(m.as_ref(), false);
        for p in 0..3 {
            for q in 0..3 {
                let want = m[(b.perm[p], b.perm[q])] * b.scale[q] / b.scale[p];
                assert!((b.mat[(p, q)] - want).abs() <= 1e-15 * want.abs());
            }
        }
        assert!(b.scale.iter().any(|&s| s != 1.0));
    }
}
