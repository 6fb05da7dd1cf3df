//! Quantum-jump trajectories of the periodically driven Kerr cavity: click records, waiting-time
//! statistics, truncated power-law fits and quantum and mean-field Lyapunov exponents.

use faer::c64;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::rng_for;
use crate::error::{DqcError, Result};
use crate::linalg::{self, CMat};

/// Time dependence of the coherent drive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriveShape {
    /// `F = A` on the first half of each period and zero on the second.
    #[default]
    Pulsed,
    /// `F = A` at all times.
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KerrParams {
    pub chi: f64,
    pub amplitude: f64,
    pub period: f64,
    pub gamma: f64,
    pub n_max: usize,
    pub dt: f64,
    pub seed: u64,
    #[serde(default)]
    pub drive: DriveShape,
}

/// Population of the top two Fock levels above which truncation is reported.
pub const TRUNCATION_WARN: f64 = 1e-6;

impl KerrParams {
    /// Defaults to `dt = T/1000` and pulsed drive.
    pub fn new(chi: f64, amplitude: f64, period: f64, gamma: f64, n_max: usize, seed: u64) -> Self {
        Self { chi, amplitude, period, gamma, n_max, dt: period / 1000.0, seed, drive: DriveShape::Pulsed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(DqcError::InvalidParameter { name: "gamma", reason: "must be positive".into() });
        }
        if self.n_max < 8 {
            return Err(DqcError::InvalidParameter { name: "n_max", reason: "must be at least 8".into() });
        }
        if !(self.period > 0.0) {
            return Err(DqcError::InvalidParameter { name: "period", reason: "must be positive".into() });
        }
        if !(self.dt > 0.0 && self.dt <= self.period / 100.0 * (1.0 + 1e-12)) {
            return Err(DqcError::InvalidParameter { name: "dt", reason: "must lie in (0, T/100]".into() });
        }
        if !(self.chi.is_finite() && self.amplitude.is_finite()) {
            return Err(DqcError::InvalidParameter { name: "chi", reason: "chi and amplitude must be finite".into() });
        }
        Ok(())
    }

    /// Steps per half period; the step is shrunk so half periods hold a whole number of steps.
    pub fn steps_per_half(&self) -> u64 {
        ((0.5 * self.period / self.dt) - 1e-9).ceil().max(1.0) as u64
    }

    pub fn step(&self) -> f64 {
        0.5 * self.period / self.steps_per_half() as f64
    }

    /// Drive during step `k`, which covers `(k h, (k+1) h]`.
    pub fn drive_at_step(&self, k: u64) -> f64 {
        match self.drive {
            DriveShape::Constant => self.amplitude,
            DriveShape::Pulsed => {
                if (k / self.steps_per_half()) % 2 == 0 {
                    self.amplitude
                } else {
                    0.0
                }
            }
        }
    }

    /// Number of whole steps covering `duration`.
    pub fn steps_for(&self, duration: f64) -> u64 {
        (duration / self.step() - 1e-9).ceil().max(0.0) as u64
    }
}

/// Non-Hermitian drift `−i(H − (i/2)γ a†a)` in the Fock basis.
#[derive(Clone, Debug)]
pub struct KerrSystem {
    pub params: KerrParams,
    kerr: Vec<f64>,
    loss: Vec<f64>,
    sqrt_n: Vec<f64>,
    h: f64,
}

impl KerrSystem {
    pub fn new(params: KerrParams) -> Result<Self> {
        params.validate()?;
        let n = params.n_max;
        Ok(Self {
            params,
            kerr: (0..n).map(|k| 0.5 * params.chi * (k * k.saturating_sub(1)) as f64).collect(),
            loss: (0..n).map(|k| 0.5 * params.gamma * k as f64).collect(),
            sqrt_n: (0..n).map(|k| (k as f64).sqrt()).collect(),
            h: params.step(),
        })
    }

    pub fn dim(&self) -> usize {
        self.params.n_max
    }

    /// Drive part `F(a† − a)ψ` of the drift.
    fn drive_term(&self, f: f64, psi: &[c64], out: &mut [c64]) {
        let n = psi.len();
        for k in 0..n {
            let mut v = c64::new(0.0, 0.0);
            if k > 0 {
                v += psi[k - 1] * (f * self.sqrt_n[k]);
            }
            if k + 1 < n {
                v -= psi[k + 1] * (f * self.sqrt_n[k + 1]);
            }
            out[k] = v;
        }
    }

    /// `exp(h D)` for the diagonal part `D = −i(χ/2)n(n−1) − (γ/2)n`.
    fn diagonal_propagator(&self, h: f64) -> Vec<c64> {
        self.kerr
            .iter()
            .zip(&self.loss)
            .map(|(k, l)| c64::from_polar((-l * h).exp(), -k * h))
            .collect()
    }

    /// One fourth-order integrating-factor step of length `h` at constant drive: the diagonal is
    /// propagated exactly and the drive by the classical scheme in the interaction frame.
    pub fn rk4(&self, f: f64, psi: &[c64], h: f64) -> Vec<c64> {
        let n = psi.len();
        let e1 = self.diagonal_propagator(h);
        let e2 = self.diagonal_propagator(0.5 * h);
        let zero = c64::new(0.0, 0.0);
        let mut k1 = vec![zero; n];
        let mut k2 = k1.clone();
        let mut k3 = k1.clone();
        let mut k4 = k1.clone();
        let mut tmp = k1.clone();
        self.drive_term(f, psi, &mut k1);
        for i in 0..n {
            tmp[i] = e2[i] * (psi[i] + k1[i] * (0.5 * h));
        }
        self.drive_term(f, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = e2[i] * psi[i] + k2[i] * (0.5 * h);
        }
        self.drive_term(f, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = e1[i] * psi[i] + e2[i] * k3[i] * h;
        }
        self.drive_term(f, &tmp, &mut k4);
        (0..n)
            .map(|i| e1[i] * (psi[i] + k1[i] * (h / 6.0)) + e2[i] * (k2[i] + k3[i]) * (h / 3.0) + k4[i] * (h / 6.0))
            .collect()
    }

    /// `d‖ψ‖²/dt = −γ⟨ψ|a†a|ψ⟩` for the unnormalized state.
    fn norm_rate(&self, psi: &[c64]) -> f64 {
        -2.0 * psi.iter().zip(&self.loss).map(|(z, l)| l * z.norm_sqr()).sum::<f64>()
    }

    pub fn lower(&self, psi: &[c64]) -> Vec<c64> {
        let n = psi.len();
        (0..n).map(|k| if k + 1 < n { psi[k + 1] * self.sqrt_n[k + 1] } else { c64::new(0.0, 0.0) }).collect()
    }
}

pub fn norm_sqr(psi: &[c64]) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum()
}

fn normalized(psi: &[c64]) -> Vec<c64> {
    let s = norm_sqr(psi).sqrt();
    psi.iter().map(|z| z / s).collect()
}

/// `⟨a⟩` of a normalized state.
pub fn mean_a(psi: &[c64]) -> c64 {
    (1..psi.len()).map(|k| psi[k - 1].conj() * psi[k] * (k as f64).sqrt()).sum()
}

/// `⟨a†a⟩` of a normalized state.
pub fn mean_n(psi: &[c64]) -> f64 {
    psi.iter().enumerate().map(|(k, z)| k as f64 * z.norm_sqr()).sum()
}

/// Norm-threshold quantum-jump trajectory.
#[derive(Clone, Debug)]
pub struct Trajectory<'a> {
    sys: &'a KerrSystem,
    psi: Vec<c64>,
    step: u64,
    rng: ChaCha20Rng,
    eta: f64,
    pub clicks: Vec<f64>,
    pub max_top_population: f64,
}

fn draw_eta(rng: &mut ChaCha20Rng) -> f64 {
    // open interval so that ln η is finite
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

impl<'a> Trajectory<'a> {
    pub fn new(sys: &'a KerrSystem, psi0: Vec<c64>, mut rng: ChaCha20Rng) -> Self {
        let eta = draw_eta(&mut rng);
        Self { sys, psi: normalized(&psi0), step: 0, rng, eta, clicks: Vec::new(), max_top_population: 0.0 }
    }

    pub fn vacuum(sys: &'a KerrSystem, rng: ChaCha20Rng) -> Self {
        let mut psi = vec![c64::new(0.0, 0.0); sys.dim()];
        psi[0] = c64::new(1.0, 0.0);
        Self::new(sys, psi, rng)
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.sys.h
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Normalized conditional state.
    pub fn state(&self) -> Vec<c64> {
        normalized(&self.psi)
    }

    fn jump(&mut self, t: f64) {
        self.psi = normalized(&self.sys.lower(&self.psi));
        self.clicks.push(t);
        self.eta = draw_eta(&mut self.rng);
    }

    /// Advances one grid step, resolving any jumps inside it.
    pub fn advance_step(&mut self) -> Result<()> {
        let f = self.sys.params.drive_at_step(self.step);
        let t0 = self.time();
        let mut offset = 0.0;
        let mut remaining = self.sys.h;
        let mut guard = 0;
        while remaining > 0.0 {
            guard += 1;
            if guard > 10_000 || !norm_sqr(&self.psi).is_finite() {
                return Err(DqcError::Numerical(format!("trajectory diverged at t = {t0}")));
            }
            let n0 = norm_sqr(&self.psi);
            let d0 = self.sys.norm_rate(&self.psi);
            let next = self.sys.rk4(f, &self.psi, remaining);
            let n1 = norm_sqr(&next);
            if n1 > self.eta {
                self.psi = next;
                break;
            }
            let d1 = self.sys.norm_rate(&next);
            let theta = hermite_crossing(n0, d0 * remaining, n1, d1 * remaining, self.eta);
            let h = (theta * remaining).max(1e-15 * self.sys.h);
            let at = self.sys.rk4(f, &self.psi, h);
            self.psi = at;
            offset += h;
            remaining -= h;
            if remaining < 1e-12 * self.sys.h {
                remaining = 0.0;
            }
            self.jump(t0 + offset);
        }
        self.step += 1;
        let norm = norm_sqr(&self.psi);
        if norm > 0.0 {
            let n = self.psi.len();
            let top = (self.psi[n - 1].norm_sqr() + self.psi[n - 2].norm_sqr()) / norm;
            self.max_top_population = self.max_top_population.max(top);
        }
        Ok(())
    }

    pub fn advance_steps(&mut self, steps: u64) -> Result<()> {
        for _ in 0..steps {
            self.advance_step()?;
        }
        Ok(())
    }
}

/// Root in `[0, 1]` of the cubic Hermite interpolant through `(0, y0, m0)` and `(1, y1, m1)` at
/// level `y`, with `y0 > y ≥ y1`.
fn hermite_crossing(y0: f64, m0: f64, y1: f64, m1: f64, y: f64) -> f64 {
    let p = |s: f64| {
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if p(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClickRecord {
    pub times: Vec<f64>,
    pub duration: f64,
    pub params: KerrParams,
    /// Set when the top two Fock levels exceeded `TRUNCATION_WARN`.
    pub truncation_warning: bool,
}

impl ClickRecord {
    pub fn waiting_times(&self, after: f64) -> Vec<f64> {
        let t: Vec<f64> = self.times.iter().copied().filter(|&x| x >= after).collect();
        t.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Trajectory from the vacuum over `duration`, with its final normalized state.
pub fn unravel_trajectory(params: &KerrParams, duration: f64, stream: u64) -> Result<(ClickRecord, Vec<c64>)> {
    let sys = KerrSystem::new(*params)?;
    let mut tr = Trajectory::vacuum(&sys, rng_for(params.seed, stream));
    tr.advance_steps(params.steps_for(duration))?;
    let warn = tr.max_top_population > TRUNCATION_WARN;
    if warn {
        log::warn!("Fock truncation reached: top-level population {:.2e}", tr.max_top_population);
    }
    let record = ClickRecord { times: tr.clicks.clone(), duration: tr.time(), params: *params, truncation_warning: warn };
    Ok((record, tr.state()))
}

/// Average of `|ψ⟩⟨ψ|` over trajectories `0..count` at `duration`.
pub fn ensemble_density(params: &KerrParams, duration: f64, count: usize) -> Result<CMat> {
    let n = params.n_max;
    let states: Vec<Vec<c64>> = (0..count)
        .into_par_iter()
        .map(|k| unravel_trajectory(params, duration, k as u64).map(|r| r.1))
        .collect::<Result<_>>()?;
    let mut rho = linalg::zeros(n, n);
    for psi in &states {
        for j in 0..n {
            for i in 0..n {
                rho[(i, j)] += psi[i] * psi[j].conj();
            }
        }
    }
    Ok(linalg::scale(rho.as_ref(), c64::new(1.0 / count.max(1) as f64, 0.0)))
}

/// Probability-normalized histogram.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub density: Vec<f64>,
}

impl Histogram {
    /// Bins between the smallest and largest sample, logarithmic when `log` is set.
    pub fn new(samples: &[f64], bins: usize, log: bool) -> Result<Self> {
        let pos: Vec<f64> = samples.iter().copied().filter(|x| x.is_finite() && (*x > 0.0 || !log)).collect();
        if pos.is_empty() {
            return Err(DqcError::TooFewPoints { needed: 1, got: 0 });
        }
        let lo = pos.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = pos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let bins = bins.max(1);
        let edges: Vec<f64> = if hi <= lo {
            vec![lo * (1.0 - 1e-9) - 1e-300, hi * (1.0 + 1e-9) + 1e-300]
        } else if log {
            let (a, b) = (lo.ln(), hi.ln());
            (0..=bins).map(|k| (a + (b - a) * k as f64 / bins as f64).exp()).collect()
        } else {
            (0..=bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect()
        };
        let nb = edges.len() - 1;
        let mut counts = vec![0usize; nb];
        for &x in &pos {
            let k = edges.partition_point(|&e| e <= x).saturating_sub(1).min(nb - 1);
            counts[k] += 1;
        }
        let total = pos.len() as f64;
        let density = counts.iter().enumerate().map(|(k, &c)| c as f64 / (total * (edges[k + 1] - edges[k]))).collect();
        Ok(Self { edges, counts, density })
    }

    pub fn centers(&self, log: bool) -> Vec<f64> {
        self.edges
            .windows(2)
            .map(|w| if log { (w[0] * w[1]).sqrt() } else { 0.5 * (w[0] + w[1]) })
            .collect()
    }

    /// `Σ density · width`.
    pub fn integral(&self) -> f64 {
        self.density.iter().zip(self.edges.windows(2)).map(|(d, w)| d * (w[1] - w[0])).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WaitingStats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    /// `τ̄/σ_τ`, infinite for deterministic gaps.
    pub ratio: f64,
    pub histogram: Histogram,
}

pub const WAITING_BINS: usize = 40;

/// Mean, spread and log-binned histogram of waiting times.
pub fn waiting_stats_from_gaps(gaps: &[f64]) -> Result<WaitingStats> {
    if gaps.len() < 2 {
        return Err(DqcError::TooFewPoints { needed: 2, got: gaps.len() });
    }
    let n = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / n;
    let var = (gaps.iter().map(|g| g * g).sum::<f64>() / n - mean * mean).max(0.0);
    let std = var.sqrt();
    let ratio = if std > 1e-12 * mean.abs() { mean / std } else { f64::INFINITY };
    let histogram = Histogram::new(gaps, WAITING_BINS, true)?;
    Ok(WaitingStats { count: gaps.len(), mean, std, ratio, histogram })
}

pub fn waiting_stats(record: &ClickRecord) -> Result<WaitingStats> {
    waiting_stats_from_gaps(&record.waiting_times(f64::NEG_INFINITY))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Bins with fewer counts are left out.
    pub min_count: usize,
    /// The window starts this many first-bin widths above the first edge.
    pub start_widths: f64,
    /// Fits with a weighted `R²` below this are rejected.
    pub r2_threshold: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { min_count: 5, start_widths: 5.0, r2_threshold: 0.95 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    /// Cutoff time; infinite when the fitted exponential factor does not decay.
    pub tau_c: f64,
    pub r2: f64,
    pub accepted: bool,
    pub window: (f64, f64),
    pub bins_used: usize,
}

/// Weighted least squares of `ln P = c − α ln τ − τ/τ_c` on log-density.
pub fn fit_truncated_power_law(hist: &Histogram, opts: &FitOptions) -> Result<PowerLawFit> {
    let w0 = hist.edges.get(1).zip(hist.edges.first()).map_or(0.0, |(b, a)| b - a);
    let start = hist.edges[0] + opts.start_widths * w0;
    let centers = hist.centers(true);
    let rows: Vec<(f64, f64, f64)> = centers
        .iter()
        .zip(&hist.counts)
        .zip(&hist.density)
        .filter(|((t, &c), _)| c >= opts.min_count && **t >= start)
        .map(|((t, &c), d)| (*t, d.ln(), c as f64))
        .collect();
    if rows.len() < 4 {
        return Err(DqcError::Fit(format!("only {} usable bins", rows.len())));
    }
    // normal equations for y = c0 + c1 ln τ + c2 τ
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for &(t, y, w) in &rows {
        let x = [1.0, t.ln(), t];
        for i in 0..3 {
            aty[i] += w * x[i] * y;
            for j in 0..3 {
                ata[i][j] += w * x[i] * x[j];
            }
        }
    }
    let coef = solve3(ata, aty).ok_or_else(|| DqcError::Fit("singular normal equations".into()))?;
    let wsum: f64 = rows.iter().map(|r| r.2).sum();
    let ymean = rows.iter().map(|r| r.2 * r.1).sum::<f64>() / wsum;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for &(t, y, w) in &rows {
        let pred = coef[0] + coef[1] * t.ln() + coef[2] * t;
        ss_res += w * (y - pred).powi(2);
        ss_tot += w * (y - ymean).powi(2);
    }
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };
    let alpha = -coef[1];
    let tau_c = if coef[2] < 0.0 { -1.0 / coef[2] } else { f64::INFINITY };
    Ok(PowerLawFit {
        alpha,
        tau_c,
        r2,
        accepted: r2 >= opts.r2_threshold,
        window: (rows[0].0, rows[rows.len() - 1].0),
        bins_used: rows.len(),
    })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Draws from `P(τ) ∝ τ^{−α} e^{−τ/τ_c}` on `[τ_min, ∞)` by Pareto proposals, for `α > 1`.
pub fn sample_truncated_power_law(alpha: f64, tau_c: f64, tau_min: f64, count: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u: f64 = rng.random();
        if u <= 0.0 {
            continue;
        }
        let t = tau_min * u.powf(-1.0 / (alpha - 1.0));
        if rng.random::<f64>() < (-(t - tau_min) / tau_c).exp() {
            out.push(t);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    A,
    N,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovConfig {
    pub observable: Observable,
    pub delta_max: f64,
    pub delta_0: f64,
    /// Resets before this time are not counted.
    #[serde(default)]
    pub transient: f64,
    #[serde(default)]
    pub sampling: Sampling,
}

/// When the mismatch is compared with `Δ_max`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// At the end of every drive period, deferred while the two jump counts disagree.
    #[default]
    Stroboscopic,
    EveryStep,
}

impl LyapunovConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_0 > 0.0 && self.delta_0 < self.delta_max) {
            return Err(DqcError::InvalidParameter { name: "delta_0", reason: "need 0 < Δ₀ < Δ_max".into() });
        }
        Ok(())
    }
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self { observable: Observable::A, delta_max: 1e-1, delta_0: 1e-5, transient: 0.0, sampling: Sampling::Stroboscopic }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub lambda: f64,
    pub std_err: f64,
    pub resets: usize,
    pub low_confidence: bool,
}

fn mismatch(obs: Observable, f: &[c64], a: &[c64]) -> f64 {
    match obs {
        Observable::A => (mean_a(f) - mean_a(a)).norm(),
        Observable::N => (mean_n(f) - mean_n(a)).abs(),
    }
}

fn blend(f: &[c64], a: &[c64], c: f64) -> Vec<c64> {
    normalized(&f.iter().zip(a).map(|(x, y)| x + (y - x) * c).collect::<Vec<_>>())
}

/// Largest `c ∈ (0, c_hi]` found by bisection with `mismatch(ψ_f, blend(c)) = Δ₀`.
fn reset_coefficient(obs: Observable, f: &[c64], a: &[c64], target: f64, c_hi: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, c_hi);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mismatch(obs, f, &blend(f, a, mid)) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Reset-rate estimate `ln(Δ_max/Δ₀) · K/t` from a fiducial and an auxiliary trajectory that
/// share one jump-threshold stream.
pub fn quantum_lyapunov(params: &KerrParams, config: &LyapunovConfig, duration: f64, stream: u64) -> Result<LyapunovEstimate> {
    config.validate()?;
    let sys = KerrSystem::new(*params)?;
    let rng = rng_for(params.seed, stream);
    let mut fid = Trajectory::vacuum(&sys, rng.clone());
    let mut aux = Trajectory::vacuum(&sys, rng);
    // seed the auxiliary copy along a† ψ_f
    let f0 = fid.state();
    let mut dir = vec![c64::new(0.0, 0.0); f0.len()];
    for k in 1..f0.len() {
        dir[k] = f0[k - 1] * (k as f64).sqrt();
    }
    let probe: Vec<c64> = f0.iter().zip(&dir).map(|(x, d)| x + d).collect();
    let c = reset_coefficient(config.observable, &f0, &probe, config.delta_0, 1.0);
    aux.psi = blend(&f0, &probe, c);
    let steps = params.steps_for(duration);
    let per_period = 2 * params.steps_per_half();
    let mut resets = 0usize;
    let mut pending = 0u64;
    let mut offset = 0isize;
    for k in 1..=steps {
        fid.advance_step()?;
        aux.advance_step()?;
        if config.sampling == Sampling::EveryStep || k % per_period == 0 {
            pending = per_period;
        }
        let synced = fid.clicks.len() as isize - aux.clicks.len() as isize == offset;
        if pending == 0 || !(synced || pending == 1) {
            pending = pending.saturating_sub(1);
            continue;
        }
        pending = 0;
        let (fs, as_) = (fid.state(), aux.state());
        if mismatch(config.observable, &fs, &as_) >= config.delta_max {
            let c = reset_coefficient(config.observable, &fs, &as_, config.delta_0, 1.0);
            let scale = norm_sqr(&fid.psi).sqrt();
            aux.psi = blend(&fs, &as_, c).into_iter().map(|z| z * scale).collect();
            aux.rng = fid.rng.clone();
            aux.eta = fid.eta;
            offset = fid.clicks.len() as isize - aux.clicks.len() as isize;
            if fid.time() > config.transient {
                resets += 1;
            }
        }
    }
    let t = (fid.time() - config.transient).max(f64::MIN_POSITIVE);
    let growth = (config.delta_max / config.delta_0).ln();
    Ok(LyapunovEstimate {
        lambda: growth * resets as f64 / t,
        std_err: growth * (resets as f64).sqrt().max(1.0) / t,
        resets,
        low_confidence: resets == 0,
    })
}

/// `dα/dt = −iχ|α|²α + F(t) − (γ/2)α` together with its tangent flow.
fn meanfield_rhs(p: &KerrParams, f: f64, alpha: c64, delta: c64) -> (c64, c64) {
    let i = c64::new(0.0, 1.0);
    let n = alpha.norm_sqr();
    let da = -i * p.chi * n * alpha + f - alpha * (0.5 * p.gamma);
    let dd = (-i * 2.0 * p.chi * n - 0.5 * p.gamma) * delta - i * p.chi * alpha * alpha * delta.conj();
    (da, dd)
}

/// Mean-field amplitude sampled at the end of every step.
pub fn meanfield_trajectory(params: &KerrParams, alpha0: c64, duration: f64) -> Result<Vec<c64>> {
    params.validate()?;
    let h = params.step();
    let mut a = alpha0;
    let mut out = Vec::new();
    for k in 0..params.steps_for(duration) {
        let f = params.drive_at_step(k);
        let (a1, _) = meanfield_rhs(params, f, a, c64::new(0.0, 0.0));
        let (a2, _) = meanfield_rhs(params, f, a + a1 * (0.5 * h), c64::new(0.0, 0.0));
        let (a3, _) = meanfield_rhs(params, f, a + a2 * (0.5 * h), c64::new(0.0, 0.0));
        let (a4, _) = meanfield_rhs(params, f, a + a3 * h, c64::new(0.0, 0.0));
        a += (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0);
        out.push(a);
    }
    Ok(out)
}

/// Largest Lyapunov exponent of the mean-field flow from `α = 0`, averaged after `transient`.
pub fn meanfield_lyapunov(params: &KerrParams, duration: f64, transient: f64) -> Result<f64> {
    params.validate()?;
    let h = params.step();
    let mut a = c64::new(0.0, 0.0);
    let mut d = c64::new(1.0, 0.0);
    let mut log_sum = 0.0;
    let mut t_acc = 0.0;
    for k in 0..params.steps_for(duration) {
        let f = params.drive_at_step(k);
        let (a1, d1) = meanfield_rhs(params, f, a, d);
        let (a2, d2) = meanfield_rhs(params, f, a + a1 * (0.5 * h), d + d1 * (0.5 * h));
        let (a3, d3) = meanfield_rhs(params, f, a + a2 * (0.5 * h), d + d2 * (0.5 * h));
        let (a4, d4) = meanfield_rhs(params, f, a + a3 * h, d + d3 * h);
        a += (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0);
        d += (d1 + d2 * 2.0 + d3 * 2.0 + d4) * (h / 6.0);
        let norm = d.norm();
        let t = (k + 1) as f64 * h;
        if t > transient {
            log_sum += norm.ln();
            t_acc += h;
        }
        d /= norm;
    }
    if t_acc <= 0.0 {
        return Err(DqcError::InvalidParameter { name: "duration", reason: "must exceed the transient".into() });
    }
    Ok(log_sum / t_acc)
}

/// One cell of an `(A, T)` sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KerrGridPoint {
    pub amplitude: f64,
    pub period: f64,
    pub lambda_meanfield: f64,
    pub lambda_qle: f64,
    pub qle_err: f64,
    pub alpha_fit: f64,
    pub reject: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Durations and transients in drive periods.
    pub periods: f64,
    pub transient_periods: f64,
    pub lyapunov: LyapunovConfig,
    pub fit: FitOptions,
}

/// Mean-field and quantum Lyapunov exponents and the waiting-time fit at every `(A, T)` pair.
pub fn kerr_grid(base: &KerrParams, amplitudes: &[f64], periods: &[f64], cfg: &SweepConfig) -> Result<Vec<KerrGridPoint>> {
    let cells: Vec<(usize, f64, f64)> = periods
        .iter()
        .flat_map(|&t| amplitudes.iter().map(move |&a| (a, t)))
        .enumerate()
        .map(|(k, (a, t))| (k, a, t))
        .collect();
    cells
        .par_iter()
        .map(|&(k, amplitude, period)| {
            let p = KerrParams { amplitude, period, dt: base.dt.min(period / 100.0), ..*base };
            let duration = cfg.periods * period;
            let transient = cfg.transient_periods * period;
            let lambda_meanfield = meanfield_lyapunov(&p, duration, transient)?;
            let lcfg = LyapunovConfig { transient, ..cfg.lyapunov };
            let q = quantum_lyapunov(&p, &lcfg, duration, k as u64)?;
            let (record, _) = unravel_trajectory(&p, duration, (1 << 32) + k as u64)?;
            let gaps = record.waiting_times(transient);
            let fit = waiting_stats_from_gaps(&gaps).and_then(|w| fit_truncated_power_law(&w.histogram, &cfg.fit));
            let (alpha_fit, reject) = match fit {
                Ok(f) => (f.alpha, !f.accepted),
                Err(_) => (f64::NAN, true),
            };
            Ok(KerrGridPoint { amplitude, period, lambda_meanfield, lambda_qle: q.lambda, qle_err: q.std_err, alpha_fit, reject })
        })
        .collect()
}
