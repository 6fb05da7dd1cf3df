//! Run configuration: one TOML file with top-level `experiment`, `seed`, `workers`, `out` keys
//! and one flat section per experiment.
//!
//! Layers are merged in order: section defaults, preset, config file, `--set key=value`,
//! dedicated flags. Parse errors carry the line and column of the offending key.

use std::path::{Path, PathBuf};

use dqc_core::ensembles::{EnsembleKind, EnsembleSpec};
use dqc_core::ghs::JumpConvention;
use dqc_core::kerr::{DriveShape, Observable, Sampling};
use dqc_core::spectra::stats::NearReal;
use dqc_core::spectra::DsffConvention;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Ghs,
    RandomLindblad,
    Lemon,
    Diluted,
    Rpqc,
    Csr,
    Spacings,
    Sff,
    Dff,
    Dsff,
    Kerr,
    Symmetry,
}

impl Experiment {
    pub const ALL: [Experiment; 12] = [
        Self::Ghs,
        Self::RandomLindblad,
        Self::Lemon,
        Self::Diluted,
        Self::Rpqc,
        Self::Csr,
        Self::Spacings,
        Self::Sff,
        Self::Dff,
        Self::Dsff,
        Self::Kerr,
        Self::Symmetry,
    ];

    /// Section name in the config file.
    pub fn name(self) -> &'static str {
        match self {
            Self::Ghs => "ghs",
            Self::RandomLindblad => "random-lindblad",
            Self::Lemon => "lemon",
            Self::Diluted => "diluted",
            Self::Rpqc => "rpqc",
            Self::Csr => "csr",
            Self::Spacings => "spacings",
            Self::Sff => "sff",
            Self::Dff => "dff",
            Self::Dsff => "dsff",
            Self::Kerr => "kerr",
            Self::Symmetry => "symmetry",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }
}

fn bad(key: &str, reason: &str) -> CliResult<()> {
    Err(CliError::invalid(key, reason))
}

fn positive(key: &str, v: usize) -> CliResult<()> {
    if v == 0 {
        return bad(key, "must be positive");
    }
    Ok(())
}

fn finite(key: &str, v: f64) -> CliResult<()> {
    if !v.is_finite() {
        return bad(key, "must be finite");
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectorMode {
    Parity,
    FixedQ,
}

/// Stroboscopic spin map: spectra, pooled `I(s)` over a `k₀` sweep and eigenvalue flow in `Γ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GhsSection {
    /// Twice the spin.
    pub two_s: usize,
    pub p: f64,
    pub k0: f64,
    pub k0_max: f64,
    pub k0_steps: usize,
    pub k1: Vec<f64>,
    pub gamma: f64,
    pub jump: JumpConvention,
    pub sectors: SectorMode,
    pub q: Vec<i64>,
    pub statistics: bool,
    /// Eigenvalue flow over `Γ ∈ [0, flow_gamma_max]`; off when the step is zero.
    pub flow_gamma_max: f64,
    pub flow_gamma_step: f64,
    /// Ginibre reference size; zero means `(2S+1)²`.
    pub reference_size: usize,
    pub reference_matrices: usize,
    pub unfold: bool,
    pub k_loc: usize,
    pub smooth: usize,
    /// Hull distance in mean spacings for the edge filter; zero disables it.
    pub edge_hull: f64,
    pub near_real: NearReal,
    pub s_max: f64,
    pub curve_points: usize,
}

impl Default for GhsSection {
    fn default() -> Self {
        Self {
            two_s: 20,
            p: 2.0,
            k0: 10.0,
            k0_max: 12.0,
            k0_steps: 20,
            k1: vec![0.0, 8.0],
            gamma: 0.1,
            jump: JumpConvention::Consistent,
            sectors: SectorMode::Parity,
            q: vec![2, 6, 12],
            statistics: true,
            flow_gamma_max: 0.4,
            flow_gamma_step: 0.0,
            reference_size: 0,
            reference_matrices: 20,
            unfold: true,
            k_loc: 10,
            smooth: 20,
            edge_hull: 2.0,
            near_real: NearReal::Auto,
            s_max: 3.0,
            curve_points: 301,
        }
    }
}

impl GhsSection {
    fn validate(&self) -> CliResult<()> {
        positive("two_s", self.two_s)?;
        positive("k0_steps", self.k0_steps)?;
        positive("curve_points", self.curve_points)?;
        positive("reference_matrices", self.reference_matrices)?;
        for (k, v) in [("p", self.p), ("k0", self.k0), ("k0_max", self.k0_max), ("gamma", self.gamma), ("s_max", self.s_max)] {
            finite(k, v)?;
        }
        if self.k1.is_empty() || self.k1.iter().any(|v| !v.is_finite()) {
            return bad("k1", "needs at least one finite value");
        }
        if self.gamma < 0.0 {
            return bad("gamma", "must be non-negative");
        }
        if self.k0_max < self.k0 {
            return bad("k0_max", "must not be below k0");
        }
        if self.flow_gamma_step < 0.0 || self.flow_gamma_max < 0.0 {
            return bad("flow_gamma_step", "flow range must be non-negative");
        }
        if self.flow_gamma_step > 0.0 && self.flow_gamma_max / self.flow_gamma_step > 1e6 {
            return bad("flow_gamma_step", "more than 10⁶ flow points");
        }
        let bound = self.two_s as i64;
        if self.sectors == SectorMode::FixedQ && (self.q.is_empty() || self.q.iter().any(|q| q.abs() > bound)) {
            return bad("q", "needs sector labels with |q| ≤ 2S");
        }
        if self.edge_hull < 0.0 {
            return bad("edge_hull", "must be non-negative");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisChoice {
    MatrixUnits,
    SuN,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormChoice {
    InverseDimension,
    PerDimension,
    Raw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingChoice {
    Dimension,
    SqrtRank,
}

/// Random Lindbladians `α𝓛_H + 𝓛_D` with Wishart Kossakowski matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomLindbladSection {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    pub alpha: f64,
    pub basis: BasisChoice,
    pub hamiltonian_norm: NormChoice,
    pub realizations: usize,
    pub scaling: ScalingChoice,
    pub dilation: f64,
    /// 2D histogram of the rescaled spectrum; zero disables it.
    pub density_bins: usize,
    pub drop_real: bool,
}

impl Default for RandomLindbladSection {
    fn default() -> Self {
        Self {
            n: 10,
            rank: None,
            alpha: 0.0,
            basis: BasisChoice::MatrixUnits,
            hamiltonian_norm: NormChoice::InverseDimension,
            realizations: 4,
            scaling: ScalingChoice::Dimension,
            dilation: 1.05,
            density_bins: 0,
            drop_real: false,
        }
    }
}

impl RandomLindbladSection {
    fn validate(&self) -> CliResult<()> {
        if self.n < 2 {
            return bad("n", "must be at least 2");
        }
        positive("realizations", self.realizations)?;
        let d = match self.basis {
            BasisChoice::MatrixUnits => self.n * self.n,
            BasisChoice::SuN => self.n * self.n - 1,
        };
        if let Some(r) = self.rank {
            if r == 0 || r > d {
                return bad("rank", &format!("must lie in 1..={d} for this basis"));
            }
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha", "must be finite and non-negative");
        }
        if !(self.dilation > 0.0) {
            return bad("dilation", "must be positive");
        }
        Ok(())
    }
}

/// Lemon support: one rescaled spectrum, sampled densities and the random-matrix model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemonSection {
    pub n_single: usize,
    pub n_density: usize,
    pub density_realizations: usize,
    pub rmt_n: usize,
    pub rmt_realizations: usize,
    pub alpha: f64,
    pub bins: usize,
    pub dilation: f64,
    pub boundary_points: usize,
}

impl Default for LemonSection {
    fn default() -> Self {
        Self {
            n_single: 50,
            n_density: 20,
            density_realizations: 20,
            rmt_n: 20,
            rmt_realizations: 20,
            alpha: 0.0,
            bins: 80,
            dilation: 1.05,
            boundary_points: 400,
        }
    }
}

impl LemonSection {
    fn validate(&self) -> CliResult<()> {
        for (k, v) in [("n_single", self.n_single), ("n_density", self.n_density), ("rmt_n", self.rmt_n)] {
            if v < 2 {
                return bad(k, "must be at least 2");
            }
        }
        positive("bins", self.bins)?;
        positive("boundary_points", self.boundary_points)?;
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha", "must be finite and non-negative");
        }
        if !(self.dilation > 0.0) {
            return bad("dilation", "must be positive");
        }
        Ok(())
    }
}

/// Diluted unitaries: spectra and inner/outer radii against the large-N prediction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DilutedSection {
    pub n: usize,
    pub d: Vec<usize>,
    pub p: Vec<f64>,
    pub realizations: usize,
    /// Eigenvalues averaged for each radius estimate.
    pub edge_count: usize,
    pub theory_points: usize,
}

impl Default for DilutedSection {
    fn default() -> Self {
        Self { n: 50, d: vec![4], p: vec![0.1, 0.3, 0.5, 0.8], realizations: 1, edge_count: 10, theory_points: 101 }
    }
}

impl DilutedSection {
    fn validate(&self) -> CliResult<()> {
        if self.n < 2 {
            return bad("n", "must be at least 2");
        }
        if self.d.is_empty() || self.d.contains(&0) {
            return bad("d", "needs positive channel counts");
        }
        if self.p.is_empty() || self.p.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("p", "needs values in [0, 1]");
        }
        positive("realizations", self.realizations)?;
        positive("edge_count", self.edge_count)?;
        if 2 * self.edge_count + 1 > self.n * self.n {
            return bad("edge_count", "exceeds half the spectrum");
        }
        if self.theory_points < 2 {
            return bad("theory_points", "must be at least 2");
        }
        Ok(())
    }
}

/// Random-Hamiltonian circuit with noise: spectra over a `(τ, ε)` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RpqcSection {
    pub n: usize,
    /// Rank of the noise channel.
    pub k: usize,
    pub tau: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub realizations: usize,
}

impl Default for RpqcSection {
    fn default() -> Self {
        Self { n: 20, k: 4, tau: vec![0.3, 20.0], epsilon: vec![0.05, 0.5, 0.9], realizations: 1 }
    }
}

impl RpqcSection {
    fn validate(&self) -> CliResult<()> {
        if self.n < 2 {
            return bad("n", "must be at least 2");
        }
        positive("k", self.k)?;
        positive("realizations", self.realizations)?;
        if self.tau.is_empty() || self.tau.iter().any(|t| !t.is_finite()) {
            return bad("tau", "needs finite values");
        }
        if self.epsilon.is_empty() || self.epsilon.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return bad("epsilon", "needs values in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CsrSource {
    /// Uniform points in the unit disk.
    Poisson,
    /// Complex symmetric Gaussian matrices.
    AiDagger,
    GinUe,
    GinOe,
    /// Gaussian matrices with a transposition symmetry squaring to −1.
    AiiDagger,
}

impl CsrSource {
    pub fn name(self) -> &'static str {
        match self {
            Self::Poisson => "poisson",
            Self::AiDagger => "ai-dagger",
            Self::GinUe => "gin-ue",
            Self::GinOe => "gin-oe",
            Self::AiiDagger => "aii-dagger",
        }
    }
}

/// Complex spacing ratios for reference point processes and matrix classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsrSection {
    pub sources: Vec<CsrSource>,
    pub n: usize,
    pub matrices: usize,
    pub points: usize,
    pub bins: usize,
    pub depletion_radius: f64,
}

impl Default for CsrSection {
    fn default() -> Self {
        Self {
            sources: vec![CsrSource::Poisson, CsrSource::AiDagger, CsrSource::GinUe, CsrSource::AiiDagger],
            n: 300,
            matrices: 10,
            points: 100_000,
            bins: 60,
            depletion_radius: 0.1,
        }
    }
}

impl CsrSection {
    fn validate(&self) -> CliResult<()> {
        if self.sources.is_empty() {
            return bad("sources", "needs at least one source");
        }
        if self.n < 4 || self.n % 2 == 1 && self.sources.contains(&CsrSource::AiiDagger) {
            return bad("n", "must be at least 4, and even for aii-dagger");
        }
        positive("matrices", self.matrices)?;
        if self.points < 3 {
            return bad("points", "must be at least 3");
        }
        positive("bins", self.bins)?;
        if !(self.depletion_radius > 0.0 && self.depletion_radius <= 1.0) {
            return bad("depletion_radius", "must lie in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceChoice {
    Poisson,
    Ginibre,
    Both,
}

fn default_ensemble(kind: EnsembleKind, n: usize) -> EnsembleSpec {
    EnsembleSpec::new(kind, n, 0)
}

fn validate_ensemble(spec: &EnsembleSpec) -> CliResult<()> {
    spec.validate().map_err(|e| CliError::invalid("ensemble", e.to_string()))
}

/// Nearest-neighbour spacings of any ensemble against the planar references.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpacingsSection {
    pub ensemble: EnsembleSpec,
    pub realizations: usize,
    /// Drops the stationary eigenvalue of generators and channels.
    pub drop_stationary: bool,
    pub unfold: bool,
    pub k_loc: usize,
    pub smooth: usize,
    pub edge_hull: f64,
    pub near_real: NearReal,
    pub reference: ReferenceChoice,
    /// Zero sizes the Ginibre reference to the spectra.
    pub reference_size: usize,
    pub reference_matrices: usize,
    pub s_max: f64,
    pub curve_points: usize,
}

impl Default for SpacingsSection {
    fn default() -> Self {
        Self {
            ensemble: default_ensemble(EnsembleKind::GinUe, 200),
            realizations: 10,
            drop_stationary: true,
            unfold: true,
            k_loc: 10,
            smooth: 20,
            edge_hull: 2.0,
            near_real: NearReal::Auto,
            reference: ReferenceChoice::Both,
            reference_size: 0,
            reference_matrices: 10,
            s_max: 3.0,
            curve_points: 301,
        }
    }
}

impl SpacingsSection {
    fn validate(&self) -> CliResult<()> {
        validate_ensemble(&self.ensemble)?;
        if matches!(self.ensemble.kind, EnsembleKind::Goe | EnsembleKind::Gue | EnsembleKind::WishartKossakowski) {
            return bad("ensemble", "planar spacings need a non-Hermitian ensemble");
        }
        positive("realizations", self.realizations)?;
        positive("reference_matrices", self.reference_matrices)?;
        positive("curve_points", self.curve_points)?;
        if self.edge_hull < 0.0 {
            return bad("edge_hull", "must be non-negative");
        }
        if !(self.s_max > 0.0) {
            return bad("s_max", "must be positive");
        }
        Ok(())
    }
}

/// Spectral form factor of Hermitian ensembles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SffSection {
    pub ensemble: EnsembleSpec,
    pub realizations: usize,
    pub t_min: f64,
    pub t_max: f64,
    /// Logarithmically spaced times.
    pub points: usize,
}

impl Default for SffSection {
    fn default() -> Self {
        Self { ensemble: default_ensemble(EnsembleKind::Gue, 100), realizations: 50, t_min: 0.01, t_max: 200.0, points: 200 }
    }
}

impl SffSection {
    fn validate(&self) -> CliResult<()> {
        validate_ensemble(&self.ensemble)?;
        if !matches!(self.ensemble.kind, EnsembleKind::Goe | EnsembleKind::Gue) {
            return bad("ensemble", "the SFF needs a Hermitian ensemble (goe or gue)");
        }
        positive("realizations", self.realizations)?;
        if !(self.t_min > 0.0 && self.t_max > self.t_min) {
            return bad("t_max", "need 0 < t_min < t_max");
        }
        if self.points < 2 {
            return bad("points", "must be at least 2");
        }
        Ok(())
    }
}

/// Dissipative form factor of random maps, with the trace-of-powers oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DffSection {
    pub ensemble: EnsembleSpec,
    pub realizations: usize,
    pub t_max: u32,
    /// Powers checked against `Tr Φ^t`; zero disables the check.
    pub oracle_t_max: u32,
}

impl Default for DffSection {
    fn default() -> Self {
        Self { ensemble: default_ensemble(EnsembleKind::RandomCptp, 8), realizations: 20, t_max: 30, oracle_t_max: 20 }
    }
}

impl DffSection {
    fn validate(&self) -> CliResult<()> {
        validate_ensemble(&self.ensemble)?;
        if !matches!(self.ensemble.kind, EnsembleKind::RandomCptp | EnsembleKind::DilutedUnitary | EnsembleKind::Rpqc) {
            return bad("ensemble", "the DFF needs a channel ensemble (random-cptp, diluted-unitary, rpqc)");
        }
        positive("realizations", self.realizations)?;
        Ok(())
    }
}

/// Dissipative spectral form factor along a ray or on a grid of complex `τ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DsffSection {
    pub ensemble: EnsembleSpec,
    pub realizations: usize,
    pub tau_max: f64,
    pub points: usize,
    /// Direction of the ray in the `τ` plane, in radians.
    pub angle: f64,
    pub convention: DsffConvention,
    pub connected: bool,
    /// Side of a square `τ` grid; zero evaluates the ray only.
    pub grid: usize,
}

impl Default for DsffSection {
    fn default() -> Self {
        Self {
            ensemble: default_ensemble(EnsembleKind::GinUe, 100),
            realizations: 50,
            tau_max: 30.0,
            points: 150,
            angle: std::f64::consts::FRAC_PI_4,
            convention: DsffConvention::Half,
            connected: true,
            grid: 0,
        }
    }
}

impl DsffSection {
    fn validate(&self) -> CliResult<()> {
        validate_ensemble(&self.ensemble)?;
        positive("realizations", self.realizations)?;
        if !(self.tau_max > 0.0 && self.tau_max.is_finite()) {
            return bad("tau_max", "must be positive");
        }
        if self.points < 2 {
            return bad("points", "must be at least 2");
        }
        finite("angle", self.angle)?;
        if self.grid == 1 {
            return bad("grid", "must be zero or at least 2");
        }
        Ok(())
    }
}

/// Driven Kerr cavity: `(A, T)` maps of Lyapunov exponents and waiting-time fits, plus click
/// records at marked points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KerrSection {
    pub chi: f64,
    pub gamma: f64,
    pub n_max: usize,
    pub dt: f64,
    pub drive: DriveShape,
    pub amplitude_min: f64,
    pub amplitude_max: f64,
    pub amplitude_steps: usize,
    pub period_min: f64,
    pub period_max: f64,
    pub period_steps: usize,
    /// Sweep duration and transient in drive periods.
    pub duration_periods: f64,
    pub transient_periods: f64,
    pub observable: Observable,
    pub delta_max: f64,
    pub delta_0: f64,
    pub sampling: Sampling,
    pub fit_min_count: usize,
    pub fit_start_widths: f64,
    pub fit_r2: f64,
    /// `[A, T]` points that get a click record and waiting-time histogram.
    pub click_points: Vec<[f64; 2]>,
    pub click_periods: f64,
    /// Mean-field exponents at or below this count as non-positive.
    pub meanfield_zero: f64,
}

impl Default for KerrSection {
    fn default() -> Self {
        Self {
            chi: 0.5,
            gamma: 0.2,
            n_max: 40,
            dt: 0.01,
            drive: DriveShape::Pulsed,
            amplitude_min: 0.3,
            amplitude_max: 3.0,
            amplitude_steps: 10,
            period_min: 4.0,
            period_max: 40.0,
            period_steps: 10,
            duration_periods: 100.0,
            transient_periods: 10.0,
            observable: Observable::A,
            delta_max: 0.1,
            delta_0: 1e-5,
            sampling: Sampling::Stroboscopic,
            fit_min_count: 5,
            fit_start_widths: 5.0,
            fit_r2: 0.95,
            click_points: vec![[0.6, 8.0], [1.5, 20.0], [2.7, 36.0]],
            click_periods: 500.0,
            meanfield_zero: 1e-3,
        }
    }
}

impl KerrSection {
    fn validate(&self) -> CliResult<()> {
        if !(self.gamma > 0.0) {
            return bad("gamma", "must be positive");
        }
        if self.n_max < 8 {
            return bad("n_max", "must be at least 8");
        }
        if !(self.dt > 0.0) {
            return bad("dt", "must be positive");
        }
        finite("chi", self.chi)?;
        if !(self.period_min > 0.0 && self.period_max >= self.period_min) {
            return bad("period_min", "need 0 < period_min ≤ period_max");
        }
        if self.amplitude_max < self.amplitude_min {
            return bad("amplitude_max", "must not be below amplitude_min");
        }
        if self.dt > self.period_min / 100.0 {
            return bad("dt", "must not exceed period_min/100");
        }
        if self.click_points.iter().any(|&[_, t]| !(t > 0.0) || self.dt > t / 100.0) {
            return bad("click_points", "periods must be positive and at least 100 dt");
        }
        if !(self.duration_periods > self.transient_periods && self.transient_periods >= 0.0) {
            return bad("duration_periods", "must exceed transient_periods ≥ 0");
        }
        if !(self.click_periods > 0.0) {
            return bad("click_periods", "must be positive");
        }
        if !(self.delta_0 > 0.0 && self.delta_0 < self.delta_max) {
            return bad("delta_0", "need 0 < delta_0 < delta_max");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryModel {
    /// Parity of the spin map, with its sector decomposition.
    Ghs,
    /// `H = A − U Aᵀ U†` with a transposition symmetry of chosen square.
    CMinus,
    /// Conjugation symmetry of a random Lindbladian's spectrum.
    RandomLindblad,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymmetrySection {
    pub model: SymmetryModel,
    pub two_s: usize,
    pub p: f64,
    pub k0: f64,
    pub k1: f64,
    pub gamma: f64,
    pub n: usize,
    pub square: i8,
    pub tol: f64,
}

impl Default for SymmetrySection {
    fn default() -> Self {
        Self { model: SymmetryModel::Ghs, two_s: 8, p: 2.0, k0: 10.0, k1: 8.0, gamma: 0.2, n: 8, square: -1, tol: 1e-8 }
    }
}

impl SymmetrySection {
    fn validate(&self) -> CliResult<()> {
        positive("two_s", self.two_s)?;
        if self.square != 1 && self.square != -1 {
            return bad("square", "must be 1 or -1");
        }
        if self.model == SymmetryModel::CMinus && self.square == -1 && self.n % 2 == 1 {
            return bad("n", "square −1 needs an even dimension");
        }
        if self.n < 2 {
            return bad("n", "must be at least 2");
        }
        if !(self.tol > 0.0) {
            return bad("tol", "must be positive");
        }
        Ok(())
    }
}

/// Experiment-specific parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Params {
    Ghs(GhsSection),
    RandomLindblad(RandomLindbladSection),
    Lemon(LemonSection),
    Diluted(DilutedSection),
    Rpqc(RpqcSection),
    Csr(CsrSection),
    Spacings(SpacingsSection),
    Sff(SffSection),
    Dff(DffSection),
    Dsff(DsffSection),
    Kerr(KerrSection),
    Symmetry(SymmetrySection),
}

impl Params {
    pub fn experiment(&self) -> Experiment {
        match self {
            Self::Ghs(_) => Experiment::Ghs,
            Self::RandomLindblad(_) => Experiment::RandomLindblad,
            Self::Lemon(_) => Experiment::Lemon,
            Self::Diluted(_) => Experiment::Diluted,
            Self::Rpqc(_) => Experiment::Rpqc,
            Self::Csr(_) => Experiment::Csr,
            Self::Spacings(_) => Experiment::Spacings,
            Self::Sff(_) => Experiment::Sff,
            Self::Dff(_) => Experiment::Dff,
            Self::Dsff(_) => Experiment::Dsff,
            Self::Kerr(_) => Experiment::Kerr,
            Self::Symmetry(_) => Experiment::Symmetry,
        }
    }

    fn from_table(exp: Experiment, table: Table) -> Result<Self, toml::de::Error> {
        fn de<T: DeserializeOwned>(t: Table) -> Result<T, toml::de::Error> {
            Value::Table(t).try_into()
        }
        Ok(match exp {
            Experiment::Ghs => Self::Ghs(de(table)?),
            Experiment::RandomLindblad => Self::RandomLindblad(de(table)?),
            Experiment::Lemon => Self::Lemon(de(table)?),
            Experiment::Diluted => Self::Diluted(de(table)?),
            Experiment::Rpqc => Self::Rpqc(de(table)?),
            Experiment::Csr => Self::Csr(de(table)?),
            Experiment::Spacings => Self::Spacings(de(table)?),
            Experiment::Sff => Self::Sff(de(table)?),
            Experiment::Dff => Self::Dff(de(table)?),
            Experiment::Dsff => Self::Dsff(de(table)?),
            Experiment::Kerr => Self::Kerr(de(table)?),
            Experiment::Symmetry => Self::Symmetry(de(table)?),
        })
    }

    pub fn to_table(&self) -> Table {
        let v = match self {
            Self::Ghs(s) => Table::try_from(s),
            Self::RandomLindblad(s) => Table::try_from(s),
            Self::Lemon(s) => Table::try_from(s),
            Self::Diluted(s) => Table::try_from(s),
            Self::Rpqc(s) => Table::try_from(s),
            Self::Csr(s) => Table::try_from(s),
            Self::Spacings(s) => Table::try_from(s),
            Self::Sff(s) => Table::try_from(s),
            Self::Dff(s) => Table::try_from(s),
            Self::Dsff(s) => Table::try_from(s),
            Self::Kerr(s) => Table::try_from(s),
            Self::Symmetry(s) => Table::try_from(s),
        };
        v.expect("sections serialize to TOML tables")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.to_table()).expect("TOML tables convert to JSON")
    }

    fn validate(&self) -> CliResult<()> {
        match self {
            Self::Ghs(s) => s.validate(),
            Self::RandomLindblad(s) => s.validate(),
            Self::Lemon(s) => s.validate(),
            Self::Diluted(s) => s.validate(),
            Self::Rpqc(s) => s.validate(),
            Self::Csr(s) => s.validate(),
            Self::Spacings(s) => s.validate(),
            Self::Sff(s) => s.validate(),
            Self::Dff(s) => s.validate(),
            Self::Dsff(s) => s.validate(),
            Self::Kerr(s) => s.validate(),
            Self::Symmetry(s) => s.validate(),
        }
    }

    /// Copies the run seed into embedded ensemble specs.
    pub fn set_seed(&mut self, seed: u64) {
        match self {
            Self::Spacings(s) => s.ensemble.seed = seed,
            Self::Sff(s) => s.ensemble.seed = seed,
            Self::Dff(s) => s.ensemble.seed = seed,
            Self::Dsff(s) => s.ensemble.seed = seed,
            _ => {}
        }
    }
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    pub out: PathBuf,
    pub params: Params,
}

impl RunConfig {
    pub fn experiment(&self) -> Experiment {
        self.params.experiment()
    }

    /// Config file text that resolves back to `self`.
    pub fn to_toml(&self) -> String {
        let mut root = Table::new();
        root.insert("experiment".into(), Value::String(self.experiment().name().into()));
        root.insert("seed".into(), Value::Integer(self.seed as i64));
        root.insert("workers".into(), Value::Integer(self.workers as i64));
        root.insert("out".into(), Value::String(self.out.to_string_lossy().into_owned()));
        root.insert(self.experiment().name().into(), Value::Table(self.params.to_table()));
        toml::to_string(&root).expect("config serializes")
    }

    pub fn from_toml(text: &str, origin: &str) -> CliResult<Self> {
        let file = ConfigFile::parse(text, origin)?;
        resolve(&Layers { file: Some(file), ..Layers::default() })
    }
}

/// One parsed config file: global keys plus raw sections.
#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    pub origin: String,
    pub text: String,
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub sections: Table,
}

/// Shape check of the global keys, used only for span-carrying diagnostics.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct Globals {
    experiment: Option<Experiment>,
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
    ghs: Option<GhsSection>,
    #[serde(rename = "random-lindblad")]
    random_lindblad: Option<RandomLindbladSection>,
    lemon: Option<LemonSection>,
    diluted: Option<DilutedSection>,
    rpqc: Option<RpqcSection>,
    csr: Option<CsrSection>,
    spacings: Option<SpacingsSection>,
    sff: Option<SffSection>,
    dff: Option<DffSection>,
    dsff: Option<DsffSection>,
    kerr: Option<KerrSection>,
    symmetry: Option<SymmetrySection>,
}

/// 1-based line and column of byte `offset`.
pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.chars().count(), |p| before[p + 1..].chars().count()) + 1;
    (line, col)
}

fn toml_error(e: &toml::de::Error, text: &str, origin: &str) -> CliError {
    let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
    CliError::Config { origin: origin.into(), line, column, message: e.message().trim().to_string() }
}

/// Position of `key = …` inside `[section]`, if written there.
fn find_key(text: &str, section: &str, key: &str) -> Option<(usize, usize)> {
    let mut inside = false;
    for (i, raw) in text.lines().enumerate() {
        let t = raw.trim_start();
        if t.starts_with('[') {
            inside = t.trim_end().trim_start_matches('[').trim_end_matches(']').trim() == section;
            continue;
        }
        if inside {
            if let Some(rest) = t.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some((i + 1, raw.len() - t.len() + 1));
                }
            }
        }
    }
    None
}

impl ConfigFile {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        toml::from_str::<Globals>(text).map_err(|e| toml_error(&e, text, origin))?;
        let mut root: Table = toml::from_str(text).map_err(|e| toml_error(&e, text, origin))?;
        let take = |root: &mut Table, k: &str| root.remove(k);
        let experiment = take(&mut root, "experiment").and_then(|v| v.as_str().and_then(Experiment::from_name));
        let seed = take(&mut root, "seed").and_then(|v| v.as_integer()).map(|v| v as u64);
        let workers = take(&mut root, "workers").and_then(|v| v.as_integer()).map(|v| v as usize);
        let out = take(&mut root, "out").and_then(|v| v.as_str().map(PathBuf::from));
        Ok(Self { origin: origin.into(), text: text.into(), experiment, seed, workers, out, sections: root })
    }

    fn locate(&self, section: &str, key: &str) -> Option<(usize, usize)> {
        find_key(&self.text, section, key)
    }
}

/// Everything that contributes to a resolved run.
#[derive(Clone, Debug, Default)]
pub struct Layers {
    pub experiment: Option<Experiment>,
    pub preset: Option<crate::presets::Preset>,
    pub file: Option<ConfigFile>,
    pub set: Vec<String>,
    pub flags: Table,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Parses `key=value`; the value is read as a TOML literal and falls back to a bare string.
pub fn parse_assignment(s: &str) -> CliResult<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{s}`")))?;
    let key = k.trim().to_string();
    if key.is_empty() {
        return Err(CliError::Usage(format!("--set expects KEY=VALUE, got `{s}`")));
    }
    let value = toml::from_str::<Table>(&format!("v = {}", v.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(v.trim().to_string()));
    Ok((key, value))
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Overlays `top` on `base`, descending into nested tables.
fn merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Merges the layers into one validated configuration.
pub fn resolve(layers: &Layers) -> CliResult<RunConfig> {
    let file = layers.file.as_ref();
    let experiment = layers
        .experiment
        .or(layers.preset.as_ref().map(|p| p.experiment))
        .or(file.and_then(|f| f.experiment))
        .ok_or_else(|| CliError::Usage("no experiment given; name one, or pass --preset or a config with `experiment`".into()))?;
    if let Some(p) = &layers.preset {
        if p.experiment != experiment {
            return Err(CliError::Usage(format!("preset {} runs {}, not {}", p.name, p.experiment.name(), experiment.name())));
        }
    }
    let name = experiment.name();
    let mut table = match &layers.preset {
        Some(p) => p.params().to_table(),
        None => Params::from_table(experiment, Table::new()).expect("section defaults deserialize").to_table(),
    };
    if let Some(f) = file {
        for (k, v) in &f.sections {
            if k != name && Experiment::from_name(k).is_none() {
                return Err(CliError::Config {
                    origin: f.origin.clone(),
                    line: 1,
                    column: 1,
                    message: format!("unknown section `{k}`"),
                });
            }
            if k == name {
                if let Value::Table(t) = v {
                    merge(&mut table, t.clone());
                }
            }
        }
    }
    for s in &layers.set {
        let (k, v) = parse_assignment(s)?;
        let mut nested = v;
        for part in k.rsplit('.') {
            nested = Value::Table(Table::from_iter([(part.to_string(), nested)]));
        }
        if let Value::Table(t) = nested {
            merge(&mut table, t);
        }
    }
    merge(&mut table, layers.flags.clone());
    let mut params = Params::from_table(experiment, table)
        .map_err(|e| CliError::Usage(format!("[{name}] after overrides: {}", e.message().trim())))?;
    params.validate().map_err(|e| match e {
        CliError::Invalid { key, reason, .. } => match file.and_then(|f| f.locate(name, &key).map(|lc| (f, lc))) {
            Some((f, (line, column))) => CliError::Config {
                origin: f.origin.clone(),
                line,
                column,
                message: format!("invalid value for `{key}`: {reason}"),
            },
            None => CliError::Invalid { origin: "command line".into(), key, reason },
        },
        other => other,
    })?;
    let seed = layers.seed.or(file.and_then(|f| f.seed)).unwrap_or(DEFAULT_SEED);
    if i64::try_from(seed).is_err() {
        return Err(CliError::invalid("seed", format!("{seed} exceeds the config integer range {}", i64::MAX)));
    }
    params.set_seed(seed);
    let workers = layers.workers.or(file.and_then(|f| f.workers)).unwrap_or_else(default_workers);
    if workers == 0 {
        return Err(CliError::invalid("workers", "must be positive"));
    }
    let out = layers.out.clone().or(file.and_then(|f| f.out.clone())).unwrap_or_else(|| {
        let leaf = layers.preset.as_ref().map_or(name, |p| p.name);
        PathBuf::from("dqc-out").join(leaf)
    });
    Ok(RunConfig { seed, workers, out, params })
}
