use faer::c64;

use crate::error::{DqcError, Result};
use crate::linalg::{self, CMat};

/// Angular-momentum matrices in the `|S, m⟩` basis ordered `m = S, S−1, …, −S`.
#[derive(Clone, Debug)]
pub struct SpinOps {
    pub two_s: usize,
    pub jz: CMat,
    pub jx: CMat,
    pub jy: CMat,
    pub jplus: CMat,
    pub jminus: CMat,
    pub j2: CMat,
}

impl SpinOps {
    pub fn s(&self) -> f64 {
        self.two_s as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_s + 1
    }

    /// Magnetic quantum number of basis index `i`.
    pub fn m_of(&self, i: usize) -> f64 {
        self.s() - i as f64
    }
}

/// Spin operators for spin `S = two_s/2`.
pub fn spin_operators(two_s: usize) -> Result<SpinOps> {
    if two_s == 0 {
        return Err(DqcError::InvalidParameter { name: "S", reason: "must be at least 1/2".into() });
    }
    let n = two_s + 1;
    let s = two_s as f64 / 2.0;
    let mut jz = linalg::zeros(n, n);
    let mut jminus = linalg::zeros(n, n);
    for i in 0..n {
        let m = s - i as f64;
        jz[(i, i)] = c64::new(m, 0.0);
        if i + 1 < n {
            jminus[(i + 1, i)] = c64::new((s * (s + 1.0) - m * (m - 1.0)).sqrt(), 0.0);
        }
    }
    let jplus = linalg::dagger(jminus.as_ref());
    let jx = linalg::scale((&jplus + &jminus).as_ref(), c64::new(0.5, 0.0));
    let jy = linalg::scale((&jplus - &jminus).as_ref(), c64::new(0.0, -0.5));
    let j2 = &jx * &jx + &jy * &jy + &jz * &jz;
    Ok(SpinOps { two_s, jz, jx, jy, jplus, jminus, j2 })
}

/// Truncated bosonic mode with Fock levels `0..n_max`.
#[derive(Clone, Debug)]
pub struct BosonOps {
    pub a: CMat,
    pub adag: CMat,
    pub num: CMat,
}

pub fn boson_operators(n_max: usize) -> Result<BosonOps> {
    if n_max < 2 {
        return Err(DqcError::InvalidParameter { name: "n_max", reason: "must be at least 2".into() });
    }
    let mut a = linalg::zeros(n_max, n_max);
    for k in 1..n_max {
        a[(k - 1, k)] = c64::new((k as f64).sqrt(), 0.0);
    }
    let adag = linalg::dagger(a.as_ref());
    let num = &adag * &a;
    Ok(BosonOps { a, adag, num })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_half_is_pauli_over_two() {
        let s = spin_operators(1).unwrap();
        assert_eq!(s.jz[(0, 0)], c64::new(0.5, 0.0));
        assert_eq!(s.jx[(0, 1)], c64::new(0.5, 0.0));
        assert_eq!(s.jy[(0, 1)], c64::new(0.0, -0.5));
        assert_eq!(s.jy[(1, 0)], c64::new(0.0, 0.5));
    }

    #[test]
    fn casimir_is_scalar() {
        for two_s in 1..12 {
            let s = spin_operators(two_s).unwrap();
            let want = s.s() * (s.s() + 1.0);
            let target = linalg::scale(linalg::identity(s.dim()).as_ref(), c64::new(want, 0.0));
            assert!(linalg::max_abs_diff(s.j2.as_ref(), target.as_ref()) < 1e-10);
        }
    }

    #[test]
    fn raising_lowering_product_is_a_m() {
        let s = spin_operators(7).unwrap();
        let pm = &s.jplus * &s.jminus;
        for i in 0..s.dim() {
            let m = s.m_of(i);
            let a_m = (s.s() + m) * (s.s() - m + 1.0);
            assert!((pm[(i, i)].re - a_m).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_commutator_deviates_only_in_corner() {
        let n = 6;
        let b = boson_operators(n).unwrap();
        let c = &b.a * &b.adag - &b.adag * &b.a;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { if i == n - 1 { 1.0 - n as f64 } else { 1.0 } } else { 0.0 };
                assert!((c[(i, j)].re - want).abs() < 1e-12 && c[(i, j)].im.abs() < 1e-12);
            }
        }
    }
}
