//! Complete elliptic integrals in the parameter convention `K(m) = ∫₀^{π/2} (1 − m sin²θ)^{−1/2} dθ`.

use std::f64::consts::FRAC_PI_2;

const AGM_TOL: f64 = 1e-15;

/// Arithmetic–geometric mean iteration returning `(a_∞, Σ 2^{n−1} c_n²)` with `c_0² = m`.
fn agm(m: f64) -> (f64, f64) {
    agm_from(m, (1.0 - m).sqrt())
}

/// As [`agm`], starting from the complementary modulus `b = √(1 − m)`.
fn agm_from(m: f64, b: f64) -> (f64, f64) {
    let mut a = 1.0f64;
    let mut b = b;
    let mut sum = 0.5 * m;
    let mut pow = 0.5f64;
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        pow *= 2.0;
        sum += pow * c * c;
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        if c.abs() <= AGM_TOL * a {
            break;
        }
    }
    (a, sum)
}

/// Complete elliptic integral of the first kind; `+∞` at `m = 1`.
pub fn ellip_k(m: f64) -> f64 {
    assert!(m <= 1.0, "parameter must not exceed 1");
    if m == 1.0 {
        return f64::INFINITY;
    }
    let (a, _) = agm(m);
    FRAC_PI_2 / a
}

/// Complete elliptic integral of the second kind; `1` at `m = 1`.
pub fn ellip_e(m: f64) -> f64 {
    assert!(m <= 1.0, "parameter must not exceed 1");
    if m == 1.0 {
        return 1.0;
    }
    let (a, sum) = agm(m);
    FRAC_PI_2 / a * (1.0 - sum)
}

/// `(K, E)` at parameter `m = 1 − k′²`, taking the complementary modulus `k′ ∈ (0, 1]`.
///
/// Avoids forming `1 − m` when `m` is within rounding of 1.
pub fn ellip_ke_complementary(kp: f64) -> (f64, f64) {
    assert!(kp > 0.0 && kp <= 1.0, "complementary modulus must lie in (0, 1]");
    let (a, sum) = agm_from(1.0 - kp * kp, kp);
    (FRAC_PI_2 / a, FRAC_PI_2 / a * (1.0 - sum))
}

/// Power-series evaluation, accurate for `|m| ≲ 0.9`; used as an independent check.
pub fn ellip_k_series(m: f64) -> f64 {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for n in 1..4000 {
        let r = (2 * n - 1) as f64 / (2 * n) as f64;
        term *= r * r * m;
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    FRAC_PI_2 * sum
}

pub fn ellip_e_series(m: f64) -> f64 {
    let mut coef = 1.0f64;
    let mut sum = 1.0f64;
    for n in 1..4000 {
        let r = (2 * n - 1) as f64 / (2 * n) as f64;
        coef *= r * r * m;
        let t = coef / (2 * n - 1) as f64;
        sum -= t;
        if t.abs() < 1e-18 {
            break;
        }
    }
    FRAC_PI_2 * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn special_values() {
        assert!((ellip_k(0.0) - FRAC_PI_2).abs() < 1e-15);
        assert!((ellip_e(0.0) - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(ellip_e(1.0), 1.0);
        // K(1/2) = Γ(1/4)² / (4√π)
        let gamma_quarter = 3.625_609_908_221_908_3;
        assert!((ellip_k(0.5) - gamma_quarter * gamma_quarter / (4.0 * PI.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn legendre_relation() {
        for &m in &[0.1, 0.3, 0.5, 0.77, 0.95] {
            let mc = 1.0 - m;
            let lhs = ellip_e(m) * ellip_k(mc) + ellip_e(mc) * ellip_k(m) - ellip_k(m) * ellip_k(mc);
            assert!((lhs - FRAC_PI_2).abs() < 1e-13, "m={m}");
        }
    }

    #[test]
    fn agm_matches_series_at_twenty_points() {
        for i in 0..20 {
            let m = -0.5 + 1.3 * i as f64 / 19.0;
            assert!((ellip_k(m) - ellip_k_series(m)).abs() < 1e-10, "K m={m}");
            assert!((ellip_e(m) - ellip_e_series(m)).abs() < 1e-10, "E m={m}");
        }
    }
}
