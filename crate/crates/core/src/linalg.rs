//! Dense complex linear algebra helpers on top of `faer`.

use faer::{c64, Mat, MatRef, Side};

use crate::error::{DqcError, Result};

pub type CMat = Mat<c64>;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    Mat::zeros(r, c)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    let mut out = zeros(ar * br, ac * bc);
    for j in 0..ac {
        for i in 0..ar {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for l in 0..bc {
                for k in 0..br {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn dagger(a: MatRef<'_, c64>) -> CMat {
    a.adjoint().to_owned()
}

pub fn transpose(a: MatRef<'_, c64>) -> CMat {
    a.transpose().to_owned()
}

pub fn conj(a: MatRef<'_, c64>) -> CMat {
    a.conjugate().to_owned()
}

pub fn trace(a: MatRef<'_, c64>) -> c64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// Largest entry modulus.
pub fn max_abs(a: MatRef<'_, c64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn frobenius(a: MatRef<'_, c64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// Maximum absolute column sum.
pub fn norm1(a: MatRef<'_, c64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

/// `max|A − A†|`.
pub fn hermiticity_residual(a: MatRef<'_, c64>) -> f64 {
    let n = a.nrows();
    let mut m = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            m = m.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    m
}

pub fn scale(a: MatRef<'_, c64>, s: c64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn hermitize(a: MatRef<'_, c64>) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(a: MatRef<'_, c64>) -> Result<(Vec<f64>, CMat)> {
    let e = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| DqcError::Eigensolver(format!("{e:?}")))?;
    let vals = (0..a.nrows()).map(|i| e.S()[i].re).collect();
    Ok((vals, e.U().to_owned()))
}

pub fn eigvalsh(a: MatRef<'_, c64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| DqcError::Eigensolver(format!("{e:?}")))
}

/// Applies a real function to a Hermitian matrix through its spectrum.
pub fn hermitian_function(a: MatRef<'_, c64>, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (vals, u) = eigh(a)?;
    let n = a.nrows();
    let mut du = u.clone();
    for j in 0..n {
        let s = f(vals[j]);
        for i in 0..n {
            du[(i, j)] *= s;
        }
    }
    Ok(&du * u.adjoint())
}

/// Column-major vectorization.
pub fn vec_of(a: MatRef<'_, c64>) -> Vec<c64> {
    let (r, c) = (a.nrows(), a.ncols());
    let mut v = Vec::with_capacity(r * c);
    for j in 0..c {
        for i in 0..r {
            v.push(a[(i, j)]);
        }
    }
    v
}

pub fn matvec(a: MatRef<'_, c64>, x: &[c64]) -> Vec<c64> {
    assert_eq!(a.ncols(), x.len());
    let mut y = vec![ZERO; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == ZERO {
            continue;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += a[(i, j)] * xj;
        }
    }
    y
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

fn axpy(acc: &mut CMat, s: f64, x: &CMat) {
    for j in 0..acc.ncols() {
        for i in 0..acc.nrows() {
            acc[(i, j)] += x[(i, j)] * s;
        }
    }
}

fn pade_solve(u: CMat, v: CMat) -> CMat {
    use faer::linalg::solvers::Solve;
    // (V − U)⁻¹ (V + U)
    let p = &v + &u;
    let q = &v - &u;
    q.partial_piv_lu().solve(&p)
}

/// Matrix exponential by scaling and squaring with a diagonal Padé approximant.
pub fn expm(a: MatRef<'_, c64>) -> Result<CMat> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    if n == 0 {
        return Ok(zeros(0, 0));
    }
    let a = a.to_owned();
    let norm = norm1(a.as_ref());
    if !norm.is_finite() {
        return Err(DqcError::ExpmOverflow { norm });
    }
    let id = identity(n);
    let a2 = &a * &a;
    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let mut pows = vec![id.clone(), a2.clone()];
            while pows.len() <= m / 2 {
                let next = pows.last().unwrap() * &a2;
                pows.push(next);
            }
            let mut u = zeros(n, n);
            let mut v = zeros(n, n);
            for k in 0..=m / 2 {
                axpy(&mut u, coeffs[2 * k + 1], &pows[k]);
                axpy(&mut v, coeffs[2 * k], &pows[k]);
            }
            let u = &a * &u;
            return Ok(pade_solve(u, v));
        }
    }
    let s = ((norm / THETA13).log2().ceil()).max(0.0) as i32;
    if s > 1000 {
        return Err(DqcError::ExpmOverflow { norm });
    }
    let f = 0.5f64.powi(s);
    let a1 = scale(a.as_ref(), c64::new(f, 0.0));
    let a2 = scale(a2.as_ref(), c64::new(f * f, 0.0));
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;
    let mut inner_u = zeros(n, n);
    axpy(&mut inner_u, b[13], &a6);
    axpy(&mut inner_u, b[11], &a4);
    axpy(&mut inner_u, b[9], &a2);
    let mut u = &a6 * &inner_u;
    axpy(&mut u, b[7], &a6);
    axpy(&mut u, b[5], &a4);
    axpy(&mut u, b[3], &a2);
    axpy(&mut u, b[1], &id);
    let u = &a1 * &u;
    let mut inner_v = zeros(n, n);
    axpy(&mut inner_v, b[12], &a6);
    axpy(&mut inner_v, b[10], &a4);
    axpy(&mut inner_v, b[8], &a2);
    let mut v = &a6 * &inner_v;
    axpy(&mut v, b[6], &a6);
    axpy(&mut v, b[4], &a4);
    axpy(&mut v, b[2], &a2);
    axpy(&mut v, b[0], &id);
    let mut r = pade_solve(u, v);
    for _ in 0..s {
        r = &r * &r;
    }
    if !r.as_ref().norm_max().is_finite() {
        return Err(DqcError::ExpmOverflow { norm });
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn expm_of_zero_is_identity() {
        let z = zeros(4, 4);
        let e = expm(z.as_ref()).unwrap();
        assert_abs_diff_eq!(max_abs_diff(e.as_ref(), identity(4).as_ref()), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn expm_diagonal_across_scales() {
        for &s in &[1e-3, 0.1, 0.5, 1.5, 4.0, 40.0] {
            let d = [c64::new(-s, 0.3 * s), c64::new(0.2 * s, -s), c64::new(-0.7 * s, 0.0)];
            let a = Mat::from_fn(3, 3, |i, j| if i == j { d[i] } else { ZERO });
            let e = expm(a.as_ref()).unwrap();
            for i in 0..3 {
                let want = d[i].exp();
                assert!((e[(i, i)] - want).norm() <= 1e-12 * want.norm().max(1.0), "s={s}");
            }
        }
    }

    #[test]
    fn expm_nilpotent() {
        let mut a = zeros(3, 3);
        a[(0, 1)] = c64::new(2.0, 0.0);
        a[(1, 2)] = c64::new(0.0, 3.0);
        let e = expm(a.as_ref()).unwrap();
        // I + A + A²/2
        assert!((e[(0, 2)] - c64::new(0.0, 3.0)).norm() < 1e-14);
        assert!((e[(0, 1)] - c64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn kron_shape_and_entries() {
        let a = Mat::from_fn(2, 2, |i, j| c64::new((i * 2 + j) as f64, 0.0));
        let b = identity(3);
        let k = kron(a.as_ref(), b.as_ref());
        assert_eq!(k.nrows(), 6);
        assert_eq!(k[(3, 0)], c64::new(2.0, 0.0));
        assert_eq!(k[(4, 1)], c64::new(2.0, 0.0));
        assert_eq!(k[(4, 0)], ZERO);
    }
}
