//! Seeded samplers for the random-matrix and random-channel ensembles.
//!
//! Every sampler draws from a [`ChaCha20Rng`] created by [`rng_for`], so a
//! `(seed, stream)` pair reproduces a realization bit for bit. Ensemble sweeps
//! use the realization index as the stream number.

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{DqcError, Result};
use crate::linalg::{self, CMat};
use crate::opcore::{
    self, dissipator_from_matrix_unit_kossakowski, hamiltonian_superop, BasisKind, HSBasis, KossakowskiMatrix,
    KrausSet, Operator, Role, Superoperator,
};

/// Deterministic generator for realization `stream` of a sweep seeded with `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Goe,
    Gue,
    GinOe,
    GinUe,
    WishartKossakowski,
    RandomLindbladian,
    LemonRmt,
    HaarUnitary,
    RandomCptp,
    DilutedUnitary,
    Rpqc,
}

/// Scale convention for sampled Hamiltonians, enforced exactly per sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum HamiltonianNorm {
    /// `Tr H² = N` (semicircle of radius 2).
    PerDimension,
    /// `Tr H² = 1/N`, the weight used alongside `Tr K = N` dissipators.
    InverseDimension,
    TraceSquared(f64),
    /// No rescaling; off-diagonal entries have unit variance.
    Raw,
}

impl HamiltonianNorm {
    pub fn target(self, n: usize) -> Option<f64> {
        match self {
            Self::PerDimension => Some(n as f64),
            Self::InverseDimension => Some(1.0 / n as f64),
            Self::TraceSquared(t) => Some(t),
            Self::Raw => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CptpRoute {
    /// Truncated Haar unitary on system ⊗ environment.
    Stinespring,
    /// Wishart Choi matrix with the partial-trace condition imposed afterwards.
    Choi,
}

/// Declarative description of a random ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    #[serde(default)]
    pub rank: Option<usize>,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub d: usize,
    #[serde(default)]
    pub tau: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, n: usize, seed: u64) -> Self {
        Self { kind, n, rank: None, alpha: 0.0, p: 0.0, d: 0, tau: 0.0, epsilon: 0.0, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(DqcError::InvalidParameter { name, reason: reason.into() });
        if self.n < 1 {
            return bad("n", "must be positive");
        }
        if self.alpha < 0.0 || !self.alpha.is_finite() {
            return bad("alpha", "must be finite and non-negative");
        }
        if !(0.0..=1.0).contains(&self.p) {
            return bad("p", "must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon", "must lie in [0, 1]");
        }
        if let Some(r) = self.rank {
            if r == 0 || r > self.n * self.n {
                return bad("rank", "must lie in 1..=N²");
            }
        }
        if matches!(self.kind, EnsembleKind::DilutedUnitary) && self.d == 0 {
            return bad("d", "diluted unitaries need at least one dissipative channel");
        }
        Ok(())
    }
}

pub fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Complex Gaussian with `E|z|² = 1`.
pub fn complex_normal(rng: &mut impl Rng) -> c64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    c64::new(normal(rng) * h, normal(rng) * h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Field {
    Real,
    Complex,
}

/// Rows×cols Ginibre matrix with `E|G_ij|² = variance`.
pub fn sample_ginibre(field: Field, rows: usize, cols: usize, variance: f64, rng: &mut impl Rng) -> CMat {
    let s = variance.sqrt();
    let mut g = linalg::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            g[(i, j)] = match field {
                Field::Real => c64::new(normal(rng) * s, 0.0),
                Field::Complex => complex_normal(rng) * s,
            };
        }
    }
    g
}

/// Real Ginibre matrix as `f64` entries.
pub fn sample_ginibre_real(rows: usize, cols: usize, variance: f64, rng: &mut impl Rng) -> Mat<f64> {
    let s = variance.sqrt();
    let mut g = Mat::<f64>::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            g[(i, j)] = normal(rng) * s;
        }
    }
    g
}

/// GOE or GUE Hamiltonian with the requested trace normalization.
pub fn sample_gaussian_hermitian(kind: EnsembleKind, n: usize, norm: HamiltonianNorm, rng: &mut impl Rng) -> Result<Operator> {
    let field = match kind {
        EnsembleKind::Goe => Field::Real,
        EnsembleKind::Gue => Field::Complex,
        _ => {
            return Err(DqcError::InvalidParameter { name: "kind", reason: "expected GOE or GUE".into() });
        }
    };
    let g = sample_ginibre(field, n, n, 1.0, rng);
    let mut h = linalg::hermitize(g.as_ref());
    if let Some(target) = norm.target(n) {
        let tr2 = linalg::frobenius(h.as_ref()).powi(2);
        h = linalg::scale(h.as_ref(), c64::new((target / tr2).sqrt(), 0.0));
    }
    let h = linalg::hermitize(h.as_ref());
    Operator::new(h, Role::Hamiltonian)
}

/// Real symmetric GOE matrix with `Tr C² = target`.
pub fn sample_goe_real(n: usize, target: f64, rng: &mut impl Rng) -> Mat<f64> {
    let g = sample_ginibre_real(n, n, 1.0, rng);
    let mut c = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (g[(i, j)] + g[(j, i)]));
    let tr2: f64 = (0..n).flat_map(|j| (0..n).map(move |i| (i, j))).map(|(i, j)| c[(i, j)] * c[(i, j)]).sum();
    let s = (target / tr2).sqrt();
    for j in 0..n {
        for i in 0..n {
            c[(i, j)] *= s;
        }
    }
    c
}

/// Wishart Kossakowski matrix `K = trace·GG†/Tr(GG†)` with `G ∈ ℂ^{d×R}`.
pub fn sample_kossakowski(d: usize, rank: usize, trace: f64, rng: &mut impl Rng) -> Result<KossakowskiMatrix> {
    if rank == 0 || rank > d {
        return Err(DqcError::InvalidParameter { name: "rank", reason: format!("must lie in 1..={d}") });
    }
    let g = sample_ginibre(Field::Complex, d, rank, 1.0, rng);
    let w = &g * g.adjoint();
    let tr = linalg::trace(w.as_ref()).re;
    let k = linalg::scale(w.as_ref(), c64::new(trace / tr, 0.0));
    Ok(KossakowskiMatrix::new_unchecked(linalg::hermitize(k.as_ref())))
}

/// Parameters of a random Lindbladian `α𝓛_H + 𝓛_D`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LindbladianSpec {
    pub n: usize,
    /// Kossakowski rank; full rank when `None`.
    pub rank: Option<usize>,
    pub alpha: f64,
    pub basis: BasisKind,
    pub hamiltonian_norm: HamiltonianNorm,
}

impl LindbladianSpec {
    pub fn purely_dissipative(n: usize) -> Self {
        Self { n, rank: None, alpha: 0.0, basis: BasisKind::MatrixUnits, hamiltonian_norm: HamiltonianNorm::InverseDimension }
    }
}

/// A sampled Lindbladian together with its ingredients.
#[derive(Clone, Debug)]
pub struct RandomLindbladian {
    pub generator: Superoperator,
    pub kossakowski: KossakowskiMatrix,
    pub basis: HSBasis,
    pub hamiltonian: Option<Operator>,
}

pub fn sample_random_lindbladian(spec: &LindbladianSpec, rng: &mut impl Rng) -> Result<RandomLindbladian> {
    if spec.alpha < 0.0 {
        return Err(DqcError::InvalidParameter { name: "alpha", reason: "must be non-negative".into() });
    }
    let n = spec.n;
    let basis = HSBasis::new(spec.basis, n);
    let d = basis.len();
    let rank = spec.rank.unwrap_or(d).min(d);
    let k = sample_kossakowski(d, rank, n as f64, rng)?;
    let mut generator = match spec.basis {
        BasisKind::MatrixUnits => dissipator_from_matrix_unit_kossakowski(n, k.mat()),
        _ => opcore::dissipator_from_kossakowski(&k, &basis)?,
    };
    let mut hamiltonian = None;
    if spec.alpha > 0.0 {
        let h = sample_gaussian_hermitian(EnsembleKind::Gue, n, spec.hamiltonian_norm, rng)?;
        let lh = hamiltonian_superop(&h)?.scaled(spec.alpha);
        generator = generator.add(&lh)?;
        hamiltonian = Some(h);
    }
    Ok(RandomLindbladian { generator, kossakowski: k, basis, hamiltonian })
}

/// Lemon model `G_R − (W̄⊗1 + 1⊗W)`, `W = C + iαH`, returned as a dense N²×N² matrix.
///
/// `G_R` is real Ginibre with `Tr G G† = N²`, `C` is GOE with `Tr C² = N/4`,
/// `H` is GUE with `Tr H² = N`. At `α = 0` the result is real.
pub fn sample_lemon_rmt(n: usize, alpha: f64, rng: &mut impl Rng) -> Result<CMat> {
    let n2 = n * n;
    let g = sample_ginibre_real(n2, n2, 1.0 / n2 as f64, rng);
    let gn: f64 = (0..n2).flat_map(|j| (0..n2).map(move |i| (i, j))).map(|(i, j)| g[(i, j)] * g[(i, j)]).sum();
    let gs = (n2 as f64 / gn).sqrt();
    let c = sample_goe_real(n, n as f64 / 4.0, rng);
    let mut w = Mat::from_fn(n, n, |i, j| c64::new(c[(i, j)], 0.0));
    if alpha > 0.0 {
        let h = sample_gaussian_hermitian(EnsembleKind::Gue, n, HamiltonianNorm::PerDimension, rng)?;
        w += linalg::scale(h.mat(), c64::new(0.0, alpha));
    }
    let mut out = Mat::from_fn(n2, n2, |i, j| c64::new(g[(i, j)] * gs, 0.0));
    subtract_kron_sum(&mut out, w.as_ref());
    Ok(out)
}

/// Real lemon model at `α = 0`.
pub fn sample_lemon_rmt_real(n: usize, rng: &mut impl Rng) -> Mat<f64> {
    let n2 = n * n;
    let mut g = sample_ginibre_real(n2, n2, 1.0 / n2 as f64, rng);
    let gn: f64 = (0..n2).flat_map(|j| (0..n2).map(move |i| (i, j))).map(|(i, j)| g[(i, j)] * g[(i, j)]).sum();
    let gs = (n2 as f64 / gn).sqrt();
    let c = sample_goe_real(n, n as f64 / 4.0, rng);
    for j in 0..n2 {
        for i in 0..n2 {
            g[(i, j)] *= gs;
        }
    }
    // − (C⊗1 + 1⊗C)
    for a in 0..n {
        for b in 0..n {
            let v = c[(a, b)];
            for k in 0..n {
                g[(a * n + k, b * n + k)] -= v;
                g[(k * n + a, k * n + b)] -= v;
            }
        }
    }
    g
}

fn subtract_kron_sum(out: &mut CMat, w: faer::MatRef<'_, c64>) {
    let n = w.nrows();
    for a in 0..n {
        for b in 0..n {
            let wbar = w[(a, b)].conj();
            let wv = w[(a, b)];
            for k in 0..n {
                out[(a * n + k, b * n + k)] -= wbar;
                out[(k * n + a, k * n + b)] -= wv;
            }
        }
    }
}

/// Haar unitary via QR of a complex Ginibre matrix with the phase fix `R_ii > 0`.
pub fn sample_haar_unitary(n: usize, rng: &mut impl Rng) -> CMat {
    let z = sample_ginibre(Field::Complex, n, n, 1.0, rng);
    let qr = z.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    let mut u = q.clone();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        for i in 0..n {
            u[(i, j)] = q[(i, j)] * ph;
        }
    }
    u
}

/// Random CPTP map with `rank` Kraus operators.
pub fn sample_random_cptp(n: usize, rank: usize, route: CptpRoute, rng: &mut impl Rng) -> Result<KrausSet> {
    if rank == 0 || rank > n * n {
        return Err(DqcError::InvalidParameter { name: "rank", reason: "must lie in 1..=N²".into() });
    }
    match route {
        CptpRoute::Stinespring => {
            // First N columns of a Haar unitary on ℂ^{N·D}; K_μ are the N×N blocks.
            let big = rank * n;
            let z = sample_ginibre(Field::Complex, big, n, 1.0, rng);
            let qr = z.qr();
            let q = qr.compute_thin_Q();
            let r = qr.thin_R();
            let mut ops = Vec::with_capacity(rank);
            for mu in 0..rank {
                let k = CMat::from_fn(n, n, |i, j| {
                    let d = r[(j, j)];
                    let ph = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
                    q[(mu * n + i, j)] * ph
                });
                ops.push(k);
            }
            KrausSet::new(n, ops)
        }
        CptpRoute::Choi => {
            let gs: Vec<CMat> = (0..rank).map(|_| sample_ginibre(Field::Complex, n, n, 1.0, rng)).collect();
            let mut s = linalg::zeros(n, n);
            for g in &gs {
                s += g.adjoint() * g;
            }
            let inv_sqrt = linalg::hermitian_function(s.as_ref(), |x| x.max(f64::MIN_POSITIVE).sqrt().recip())?;
            KrausSet::new(n, gs.into_iter().map(|g| &g * &inv_sqrt).collect())
        }
    }
}

/// Diluted unitary channel `(1−p)U·U† + p Φ_d` with a Haar `U` and a rank-d random channel.
pub fn sample_diluted_unitary(n: usize, d: usize, p: f64, rng: &mut impl Rng) -> Result<KrausSet> {
    if !(0.0..=1.0).contains(&p) {
        return Err(DqcError::InvalidParameter { name: "p", reason: "must lie in [0, 1]".into() });
    }
    let u = sample_haar_unitary(n, rng);
    let phi = sample_random_cptp(n, d, CptpRoute::Stinespring, rng)?;
    let mut ops = Vec::with_capacity(d + 1);
    ops.push(linalg::scale(u.as_ref(), c64::new((1.0 - p).sqrt(), 0.0)));
    for k in phi.ops() {
        ops.push(linalg::scale(k.as_ref(), c64::new(p.sqrt(), 0.0)));
    }
    KrausSet::new(n, ops)
}

/// `Λ(ρ) = (1−ε) e^{−iτH} ρ e^{iτH} + ε Σ_r N_r ρ N_r†` with GUE `H` (`Tr H² = N`) and a
/// rank-`k` Stinespring channel `{N_r}`.
pub fn sample_rpqc(n: usize, k: usize, tau: f64, epsilon: f64, rng: &mut impl Rng) -> Result<KrausSet> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(DqcError::InvalidParameter { name: "epsilon", reason: "must lie in [0, 1]".into() });
    }
    let h = sample_gaussian_hermitian(EnsembleKind::Gue, n, HamiltonianNorm::PerDimension, rng)?;
    let (vals, v) = linalg::eigh(h.mat())?;
    let mut vd = v.clone();
    for (j, &e) in vals.iter().enumerate() {
        let ph = c64::from_polar(1.0, -tau * e);
        for i in 0..n {
            vd[(i, j)] *= ph;
        }
    }
    let u = &vd * v.adjoint();
    let noise = sample_random_cptp(n, k, CptpRoute::Stinespring, rng)?;
    let mut ops = vec![linalg::scale(u.as_ref(), c64::new((1.0 - epsilon).sqrt(), 0.0))];
    for m in noise.ops() {
        ops.push(linalg::scale(m.as_ref(), c64::new(epsilon.sqrt(), 0.0)));
    }
    KrausSet::new(n, ops)
}

/// Uniform points in the unit disk.
pub fn sample_poisson_disk(count: usize, rng: &mut impl Rng) -> Vec<c64> {
    (0..count)
        .map(|_| {
            let r = rng.random::<f64>().sqrt();
            let t = rng.random::<f64>() * std::f64::consts::TAU;
            c64::from_polar(r, t)
        })
        .collect()
}


/// One draw from an [`EnsembleSpec`].
#[derive(Clone, Debug)]
pub enum EnsembleSample {
    Hermitian(Operator),
    Matrix(CMat),
    Kossakowski(KossakowskiMatrix),
    Lindbladian(Box<RandomLindbladian>),
    Channel(KrausSet),
}

impl EnsembleSample {
    /// Eigenvalues of the sampled object; channels and generators act on N² dimensions.
    pub fn spectrum(&self) -> Result<Vec<c64>> {
        use crate::spectra::eigen;
        match self {
            Self::Hermitian(h) => Ok(linalg::eigvalsh(h.mat())?.into_iter().map(|e| c64::new(e, 0.0)).collect()),
            Self::Matrix(m) => eigen::eigenvalues(m.as_ref()),
            Self::Kossakowski(k) => Ok(linalg::eigvalsh(k.mat())?.into_iter().map(|e| c64::new(e, 0.0)).collect()),
            Self::Lindbladian(l) => eigen::superop_eigenvalues(&l.generator),
            Self::Channel(ks) => eigen::superop_eigenvalues(&ks.superoperator()),
        }
    }
}

/// Realization `stream` of `spec`; stream 0 is the canonical sample for its seed.
///
/// `rank` defaults to N² for Kossakowski matrices and Lindbladians, and to N for
/// random channels and the RPQC noise channel.
pub fn sample(spec: &EnsembleSpec, stream: u64) -> Result<EnsembleSample> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = rng_for(spec.seed, stream);
    Ok(match spec.kind {
        EnsembleKind::Goe | EnsembleKind::Gue => {
            EnsembleSample::Hermitian(sample_gaussian_hermitian(spec.kind, n, HamiltonianNorm::PerDimension, &mut rng)?)
        }
        EnsembleKind::GinOe => EnsembleSample::Matrix(sample_ginibre(Field::Real, n, n, 1.0 / n as f64, &mut rng)),
        EnsembleKind::GinUe => EnsembleSample::Matrix(sample_ginibre(Field::Complex, n, n, 1.0 / n as f64, &mut rng)),
        EnsembleKind::WishartKossakowski => {
            EnsembleSample::Kossakowski(sample_kossakowski(n * n, spec.rank.unwrap_or(n * n), n as f64, &mut rng)?)
        }
        EnsembleKind::RandomLindbladian => {
            let ls = LindbladianSpec { rank: spec.rank, alpha: spec.alpha, ..LindbladianSpec::purely_dissipative(n) };
            EnsembleSample::Lindbladian(Box::new(sample_random_lindbladian(&ls, &mut rng)?))
        }
        EnsembleKind::LemonRmt => EnsembleSample::Matrix(sample_lemon_rmt(n, spec.alpha, &mut rng)?),
        EnsembleKind::HaarUnitary => EnsembleSample::Matrix(sample_haar_unitary(n, &mut rng)),
        EnsembleKind::RandomCptp => {
            EnsembleSample::Channel(sample_random_cptp(n, spec.rank.unwrap_or(n), CptpRoute::Stinespring, &mut rng)?)
        }
        EnsembleKind::DilutedUnitary => EnsembleSample::Channel(sample_diluted_unitary(n, spec.d, spec.p, &mut rng)?),
        EnsembleKind::Rpqc => {
            EnsembleSample::Channel(sample_rpqc(n, spec.rank.unwrap_or(n), spec.tau, spec.epsilon, &mut rng)?)
        }
    })
}
