//! Spectral, dissipative and dissipative-spectral form factors.

use faer::{c64, MatRef};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMat};

/// One averaged form-factor curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormFactorCurve {
    pub abscissa: Vec<c64>,
    pub value: Vec<f64>,
    pub n_samples: usize,
}

impl FormFactorCurve {
    fn empty(abscissa: Vec<c64>) -> Self {
        let len = abscissa.len();
        Self { abscissa, value: vec![0.0; len], n_samples: 0 }
    }

    fn accumulate(&mut self, values: &[f64]) {
        let k = self.n_samples as f64;
        for (acc, v) in self.value.iter_mut().zip(values) {
            *acc = (*acc * k + v) / (k + 1.0);
        }
        self.n_samples += 1;
    }
}

/// `K(t) = |Σ_j e^{−iE_j t}|²`.
pub fn sff_single(levels: &[f64], t: f64) -> f64 {
    let s: c64 = levels.iter().map(|&e| c64::from_polar(1.0, -e * t)).sum();
    s.norm_sqr()
}

/// Ensemble-averaged SFF.
pub fn sff(spectra: &[Vec<f64>], times: &[f64]) -> FormFactorCurve {
    let mut curve = FormFactorCurve::empty(times.iter().map(|&t| c64::new(t, 0.0)).collect());
    for levels in spectra {
        let v: Vec<f64> = times.iter().map(|&t| sff_single(levels, t)).collect();
        curve.accumulate(&v);
    }
    curve
}

/// `Σ_j λ_j^t` for a non-negative integer power.
pub fn dff_single(spectrum: &[c64], t: u32) -> c64 {
    spectrum.iter().map(|z| z.powi(t as i32)).sum()
}

/// Ensemble-averaged DFF (real part; the sum is real for conjugation-closed spectra).
pub fn dff(spectra: &[Vec<c64>], times: &[u32]) -> FormFactorCurve {
    let mut curve = FormFactorCurve::empty(times.iter().map(|&t| c64::new(t as f64, 0.0)).collect());
    for s in spectra {
        let v: Vec<f64> = times.iter().map(|&t| dff_single(s, t).re).collect();
        curve.accumulate(&v);
    }
    curve
}

/// `Tr Φ^t` by repeated multiplication.
pub fn trace_of_power(phi: MatRef<'_, c64>, t: u32) -> c64 {
    let n = phi.nrows();
    if t == 0 {
        return c64::new(n as f64, 0.0);
    }
    let mut p: CMat = phi.to_owned();
    for _ in 1..t {
        p = &p * phi;
    }
    linalg::trace(p.as_ref())
}

/// Phase convention for the DSFF exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DsffConvention {
    /// `exp(−i Re(ℓ* τ)/2)`, i.e. the sum form at `τ/2`.
    #[default]
    Half,
    /// `exp(−i{Re ℓ Re τ + Im ℓ Im τ})`.
    Sum,
}

fn dsff_sum(spectrum: &[c64], tau: c64, convention: DsffConvention) -> c64 {
    let tau = match convention {
        DsffConvention::Sum => tau,
        DsffConvention::Half => tau * 0.5,
    };
    spectrum.iter().map(|l| c64::from_polar(1.0, -(l.re * tau.re + l.im * tau.im))).sum()
}

/// `|Σ_j e^{−i(Re ℓ_j Re τ + Im ℓ_j Im τ)}|²`, with `τ` halved under [`DsffConvention::Half`].
pub fn dsff_single(spectrum: &[c64], tau: c64, convention: DsffConvention) -> f64 {
    dsff_sum(spectrum, tau, convention).norm_sqr()
}

pub fn dsff(spectra: &[Vec<c64>], taus: &[c64], convention: DsffConvention) -> FormFactorCurve {
    let mut curve = FormFactorCurve::empty(taus.to_vec());
    for s in spectra {
        let v: Vec<f64> = taus.iter().map(|&t| dsff_single(s, t, convention)).collect();
        curve.accumulate(&v);
    }
    curve
}

/// Connected DSFF `⟨|Σ_j e^{…}|²⟩ − |⟨Σ_j e^{…}⟩|²`, which removes the density's own Fourier transform.
pub fn dsff_connected(spectra: &[Vec<c64>], taus: &[c64], convention: DsffConvention) -> FormFactorCurve {
    let m = spectra.len().max(1) as f64;
    let value = taus
        .iter()
        .map(|&t| {
            let sums: Vec<c64> = spectra.iter().map(|s| dsff_sum(s, t, convention)).collect();
            let mean = sums.iter().sum::<c64>() / m;
            sums.iter().map(|z| z.norm_sqr()).sum::<f64>() / m - mean.norm_sqr()
        })
        .collect();
    FormFactorCurve { abscissa: taus.to_vec(), value, n_samples: spectra.len() }
}

/// First time after the dip at which `curve/n` reaches `level`.
pub fn plateau_onset(times: &[f64], values: &[f64], n: f64, level: f64) -> Option<f64> {
    let dip = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)?;
    (dip..values.len()).find(|&i| values[i] / n >= level).map(|i| times[i])
}
