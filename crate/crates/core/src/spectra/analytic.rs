//! Closed-form reference curves: semicircle self-convolution, lemon boundary, diluted-unitary radii.

use std::f64::consts::PI;

use faer::c64;
use serde::{Deserialize, Serialize};

use super::elliptic::{ellip_e, ellip_k, ellip_ke_complementary};
use crate::error::{DqcError, Result};

/// Wigner semicircle of radius 2.
pub fn semicircle(e: f64) -> f64 {
    if e.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - e * e).sqrt() / (2.0 * PI)
    }
}

/// Density of `E_α − E_β` for independent radius-2 semicircle levels, supported on `|ω| ≤ 4`.
pub fn rho_delta(omega: f64) -> f64 {
    let w2 = omega * omega;
    if w2 >= 16.0 {
        return 0.0;
    }
    if w2 == 0.0 {
        return rho_delta_at_zero();
    }
    let (k, e) = ellip_ke_complementary(omega.abs() / 4.0);
    ((16.0 + w2) * e - 2.0 * w2 * k) / (6.0 * PI * PI)
}

/// `ρ_Δ(0) = 8/(3π²)`.
pub fn rho_delta_at_zero() -> f64 {
    8.0 / (3.0 * PI * PI)
}

/// Cumulative distribution of `ρ_Δ` by adaptive quadrature.
pub fn rho_delta_cdf(omega: f64) -> f64 {
    if omega <= -4.0 {
        return 0.0;
    }
    if omega >= 4.0 {
        return 1.0;
    }
    let half = 0.5;
    if omega >= 0.0 {
        half + integrate(rho_delta, 0.0, omega, 1e-13)
    } else {
        half - integrate(rho_delta, omega, 0.0, 1e-13)
    }
}

/// Density of `c_i + c_j` for independent radius-1 semicircle levels (support `[−2, 2]`).
pub fn rho_pair_sum(x: f64) -> f64 {
    2.0 * rho_delta(2.0 * x)
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * GK_WK[7];
    let mut g = fc * GK_WG[3];
    for i in 0..7 {
        let x = h * GK_X[i];
        let s = f(c - x) + f(c + x);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) quadrature to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut stack = vec![(a, b, tol, 0u32)];
    let mut total = 0.0;
    while let Some((lo, hi, t, depth)) = stack.pop() {
        let (v, err) = gk15(&f, lo, hi);
        if err <= t || depth >= 50 || (hi - lo) < 1e-14 * (1.0 + lo.abs()) {
            total += v;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * t, depth + 1));
            stack.push((mid, hi, 0.5 * t, depth + 1));
        }
    }
    total
}

/// `∫ ρ(x) / |z − x|² dx` for the pair-sum density; the lemon support is where this is ≥ 1.
pub fn lemon_weight(z: c64) -> f64 {
    let y = z.im.abs();
    let x0 = z.re;
    if y == 0.0 && x0.abs() < 2.0 {
        return f64::INFINITY;
    }
    let f = |x: f64| rho_pair_sum(x) / ((x0 - x) * (x0 - x) + y * y);
    let tol = 1e-10;
    if x0 > -2.0 && x0 < 2.0 {
        // split at the near-singular point and resolve its neighbourhood separately
        let w = (50.0 * y).min(0.5);
        let a = (x0 - w).max(-2.0);
        let b = (x0 + w).min(2.0);
        integrate(f, -2.0, a, tol) + integrate(f, a, x0, tol) + integrate(f, x0, b, tol) + integrate(f, b, 2.0, tol)
    } else {
        integrate(f, -2.0, 2.0, tol)
    }
}

/// Stieltjes transform `G(x) = ∫ ρ(y)/(x − y) dy` of the pair-sum density for real `|x| > 2`,
/// from the elliptic closed form.
pub fn lemon_g_real(x: f64) -> Result<f64> {
    if x.abs() <= 2.0 {
        return Err(DqcError::InvalidParameter { name: "x", reason: "closed form needs |x| > 2".into() });
    }
    let m = 4.0 / (x * x);
    let x2 = x * x;
    Ok(2.0 * x - (2.0 * x / (3.0 * PI)) * ((4.0 + x2) * ellip_e(m) + (4.0 - x2) * ellip_k(m)))
}

/// Whether `z` lies inside the lemon support dilated by `dilation` about the origin.
pub fn inside_lemon(z: c64, dilation: f64) -> bool {
    lemon_weight(z / dilation) >= 1.0
}

/// Boundary radius along direction `theta` from the origin.
pub fn lemon_radius(theta: f64) -> Result<f64> {
    let dir = c64::from_polar(1.0, theta);
    let g = |r: f64| lemon_weight(dir * r) - 1.0;
    let mut lo = 0.05;
    if g(lo) < 0.0 {
        return Err(DqcError::RootTracing { angle: theta });
    }
    let mut hi = 1.0;
    while g(hi) >= 0.0 {
        lo = hi;
        hi *= 1.5;
        if hi > 10.0 {
            return Err(DqcError::RootTracing { angle: theta });
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed polyline of the lemon boundary, counter-clockwise from the positive real axis.
///
/// The upper half is traced on `resolution` rays and mirrored, so the curve is exactly symmetric.
pub fn lemon_boundary(resolution: usize) -> Result<Vec<c64>> {
    let m = resolution.max(4);
    let mut upper = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let theta = PI * k as f64 / m as f64;
        let r = if k == 0 || k == m { lemon_real_tip() } else { lemon_radius(theta)? };
        upper.push(c64::from_polar(r, theta));
    }
    upper[0] = c64::new(upper[0].re, 0.0);
    upper[m] = c64::new(upper[m].re, 0.0);
    let mut curve = upper.clone();
    for z in upper[1..m].iter().rev() {
        curve.push(z.conj());
    }
    Ok(curve)
}

/// Where the boundary meets the real axis: the edge of the pair-sum support or beyond it.
pub fn lemon_real_tip() -> f64 {
    let g = |x: f64| lemon_weight(c64::new(x, 0.0)) - 1.0;
    if g(2.0 + 1e-12) < 0.0 {
        return 2.0;
    }
    let (mut lo, mut hi) = (2.0, 3.0);
    while g(hi) >= 0.0 {
        hi += 1.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Rescaling of random-Lindbladian eigenvalues before comparison with the lemon boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum LemonScaling {
    /// `ℓ′ = N(ℓ + 1)`.
    Dimension(usize),
    /// `ℓ′ = √R(ℓ + 1)` for Kossakowski rank `R`; heuristic below full rank.
    SqrtRank(usize),
}

impl LemonScaling {
    pub fn factor(self) -> f64 {
        match self {
            Self::Dimension(n) => n as f64,
            Self::SqrtRank(r) => (r as f64).sqrt(),
        }
    }

    pub fn apply(self, spectrum: &[c64]) -> Vec<c64> {
        let f = self.factor();
        spectrum.iter().map(|z| (z + 1.0) * f).collect()
    }
}

/// Inner and outer radii of the diluted-unitary spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DilutedRadii {
    pub r_minus: f64,
    pub r_plus: f64,
    /// True once the inner radius has closed and the support is a disk.
    pub disk: bool,
}

pub fn diluted_radii(p: f64, d: usize) -> DilutedRadii {
    let df = d as f64;
    let base = (1.0 - p) * (1.0 - p) * df;
    let r_plus = ((base + p * p) / df).sqrt();
    let inner = (base - p * p) / df;
    if inner <= 0.0 {
        DilutedRadii { r_minus: 0.0, r_plus, disk: true }
    } else {
        DilutedRadii { r_minus: inner.sqrt(), r_plus, disk: false }
    }
}

/// Dilution at which the inner radius closes: `√d / (1 + √d)`.
pub fn ring_disk_pc(d: usize) -> f64 {
    let s = (d as f64).sqrt();
    s / (1.0 + s)
}

/// Integrated Poisson nearest-neighbour spacing distribution in the plane.
pub fn poisson_reference_i(s: f64) -> f64 {
    1.0 - (-PI * s * s / 4.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_delta_limits() {
        assert!((rho_delta(0.0) - rho_delta_at_zero()).abs() < 1e-15);
        assert!((rho_delta(1e-7) - rho_delta_at_zero()).abs() < 1e-8);
        assert!(rho_delta(4.0).abs() < 1e-15);
        assert!(rho_delta(3.999_999).abs() < 1e-8);
        for i in 0..50 {
            let w = -4.0 + 8.0 * i as f64 / 49.0;
            assert!(rho_delta(w) >= 0.0);
            assert!((rho_delta(w) - rho_delta(-w)).abs() < 1e-10);
        }
    }

    #[test]
    fn rho_delta_matches_numerical_convolution() {
        for &w in &[0.0f64, 0.7, 1.9, 3.1] {
            let lo = (w - 2.0).max(-2.0);
            let hi = (w + 2.0).min(2.0);
            // substitute e = lo + (hi−lo)(1−cos t)/2 to tame the square-root edges
            let conv = integrate(
                |t| {
                    let e = lo + (hi - lo) * (1.0 - t.cos()) / 2.0;
                    let jac = (hi - lo) * t.sin() / 2.0;
                    semicircle(e) * semicircle(e - w) * jac
                },
                0.0,
                PI,
                1e-13,
            );
            assert!((conv - rho_delta(w)).abs() < 1e-9, "w={w}: {conv} vs {}", rho_delta(w));
        }
    }

    #[test]
    fn stieltjes_closed_form_matches_quadrature() {
        for &x in &[2.3, 3.0, 5.0, -2.7] {
            let quad = integrate(|y| rho_pair_sum(y) / (x - y), -2.0, 2.0, 1e-13);
            let closed = lemon_g_real(x).unwrap();
            assert!((quad - closed).abs() < 1e-9, "x={x}: {quad} vs {closed}");
        }
    }

    #[test]
    fn diluted_radii_endpoints() {
        let r0 = diluted_radii(0.0, 4);
        assert!((r0.r_plus - 1.0).abs() < 1e-15 && (r0.r_minus - 1.0).abs() < 1e-15);
        let r1 = diluted_radii(1.0, 4);
        assert!((r1.r_plus - 0.5).abs() < 1e-15 && r1.disk);
        assert!((ring_disk_pc(4) - 2.0 / 3.0).abs() < 1e-15);
        let rc = diluted_radii(ring_disk_pc(9), 9);
        assert!(rc.r_minus.abs() < 1e-7);
    }

    #[test]
    fn poisson_reference_values() {
        assert_eq!(poisson_reference_i(0.0), 0.0);
        assert!((poisson_reference_i(2.0) - (1.0 - (-PI).exp())).abs() < 1e-15);
    }
}
