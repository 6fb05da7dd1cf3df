//! Dissipative kicked top: stroboscopic map, parity and fixed-`q` sectors, closed-form eigenvalues,
//! sector-resolved spacing statistics and eigenvalue flow under damping.

use faer::c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DqcError, Result};
use crate::linalg::{self, CMat};
use crate::opcore::{
    dissipator_from_jumps, hamiltonian_superop, sandwich, spin_operators, superop_expm, Operator, Role, SpinOps,
    Superoperator,
};
use crate::spectra::stats::{nn_spacings, EmpiricalCdf, SpacingOptions};
use crate::spectra::{eigen, ComplexSpectrum};
use crate::symmetry::SectorDecomposition;

/// Normalization of the spin-lowering jump.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JumpConvention {
    /// `L = √(Γ/S) J₋`, so the damping exponent is `−(Γ/2S)(a_m + a_n)`.
    #[default]
    Consistent,
    /// `L = (Γ/2S) J₋` taken at face value.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhsParams {
    /// Twice the spin, so half-integer spins are exact.
    pub two_s: usize,
    pub p: f64,
    pub k0: f64,
    pub k1: f64,
    pub gamma: f64,
    #[serde(default)]
    pub jump: JumpConvention,
}

impl GhsParams {
    pub fn new(two_s: usize, p: f64, k0: f64, k1: f64, gamma: f64) -> Self {
        Self { two_s, p, k0, k1, gamma, jump: JumpConvention::Consistent }
    }

    pub fn s(&self) -> f64 {
        self.two_s as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_s + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.two_s == 0 {
            return Err(DqcError::InvalidParameter { name: "S", reason: "must be at least 1/2".into() });
        }
        if !(self.gamma >= 0.0) {
            return Err(DqcError::InvalidParameter { name: "gamma", reason: "must be non-negative".into() });
        }
        for (name, v) in [("p", self.p), ("k0", self.k0), ("k1", self.k1)] {
            if !v.is_finite() {
                return Err(DqcError::InvalidParameter { name, reason: "must be finite".into() });
            }
        }
        Ok(())
    }

    /// Rate `κ` with the jump written as `√κ J₋`.
    pub fn jump_rate(&self) -> f64 {
        let s = self.s();
        match self.jump {
            JumpConvention::Consistent => self.gamma / s,
            JumpConvention::Literal => (self.gamma / (2.0 * s)).powi(2),
        }
    }

    /// `a_m = (S + m)(S − m + 1)`, the diagonal of `J₊J₋`.
    pub fn a(&self, m: f64) -> f64 {
        let s = self.s();
        (s + m) * (s - m + 1.0)
    }
}

fn hamiltonians(params: &GhsParams, spin: &SpinOps) -> Result<(Operator, Operator)> {
    let s = params.s();
    let jz2 = &spin.jz * &spin.jz;
    let h0 = linalg::scale(spin.jz.as_ref(), c64::new(params.p, 0.0))
        + linalg::scale(jz2.as_ref(), c64::new(params.k0 / (2.0 * s), 0.0));
    let jy2 = &spin.jy * &spin.jy;
    let h1 = linalg::scale(jy2.as_ref(), c64::new(params.k1 / (2.0 * s), 0.0));
    Ok((
        Operator::new(linalg::hermitize(h0.as_ref()), Role::Hamiltonian)?,
        Operator::new(linalg::hermitize(h1.as_ref()), Role::Hamiltonian)?,
    ))
}

/// Generator `𝓛_{H₀} + 𝓛_D` acting between kicks.
pub fn ghs_generator(params: &GhsParams) -> Result<Superoperator> {
    params.validate()?;
    let spin = spin_operators(params.two_s)?;
    let (h0, _) = hamiltonians(params, &spin)?;
    let jump = Operator::new(linalg::scale(spin.jminus.as_ref(), c64::new(params.jump_rate().sqrt(), 0.0)), Role::Jump)?;
    hamiltonian_superop(&h0)?.add(&dissipator_from_jumps(params.dim(), &[jump])?)
}

/// Stroboscopic map `e^{𝓛_{H₀}+𝓛_D} e^{𝓛_{H₁}}`, the kick acting first.
pub fn build_ghs_map(params: &GhsParams) -> Result<Superoperator> {
    let spin = spin_operators(params.two_s)?;
    let (_, h1) = hamiltonians(params, &spin)?;
    let relax = superop_expm(&ghs_generator(params)?)?;
    if params.k1 == 0.0 {
        return Ok(relax);
    }
    let u1 = linalg::expm(linalg::scale(h1.mat(), c64::new(0.0, -1.0)).as_ref())?;
    let kick = Superoperator::from_mat(sandwich(u1.as_ref(), linalg::dagger(u1.as_ref()).as_ref()))?;
    relax.compose(&kick)
}

fn unit_basis(n2: usize, idx: &[usize]) -> CMat {
    CMat::from_fn(n2, idx.len(), |r, k| if idx[k] == r { linalg::ONE } else { linalg::ZERO })
}

/// Column-vectorized indices of `|m⟩⟨n|` with `m − n = q`, ordered by decreasing `m`.
pub fn q_sector_indices(params: &GhsParams, q: i64) -> Result<Vec<usize>> {
    let n = params.dim();
    if q.unsigned_abs() as usize > params.two_s {
        return Err(DqcError::InvalidParameter { name: "q", reason: format!("|q| must not exceed 2S = {}", params.two_s) });
    }
    // m_i − m_j = j − i
    Ok((0..n)
        .filter_map(|i| {
            let j = i as i64 + q;
            (0..n as i64).contains(&j).then(|| i + n * j as usize)
        })
        .collect())
}

/// Even (`m − n` even) and odd sectors, as coordinate isometries.
pub fn parity_sectors(params: &GhsParams) -> Result<SectorDecomposition> {
    params.validate()?;
    let n = params.dim();
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if (i + j) % 2 == 0 { &mut even } else { &mut odd }.push(i + n * j);
        }
    }
    Ok(SectorDecomposition {
        phases: vec![0.0, std::f64::consts::PI],
        labels: vec!["even".into(), "odd".into()],
        bases: vec![unit_basis(n * n, &even), unit_basis(n * n, &odd)],
    })
}

/// Fixed-`q` sectors for `q = −2S, …, 2S`, valid when the kick vanishes.
pub fn fixed_q_sectors(params: &GhsParams) -> Result<SectorDecomposition> {
    let n = params.dim();
    let mut out = SectorDecomposition { phases: Vec::new(), labels: Vec::new(), bases: Vec::new() };
    let two_s = params.two_s as i64;
    for q in -two_s..=two_s {
        out.labels.push(format!("q={q}"));
        out.phases.push(q as f64);
        out.bases.push(unit_basis(n * n, &q_sector_indices(params, q)?));
    }
    Ok(out)
}

/// Principal submatrix of a superoperator on coordinate indices.
pub fn sector_block(phi: &Superoperator, idx: &[usize]) -> CMat {
    let m = phi.mat();
    CMat::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

/// Closed-form eigenvalues of the `k₁ = 0` map in sector `q`, labelled by `m`.
pub fn fixed_q_eigenvalues(params: &GhsParams, q: i64) -> Result<ComplexSpectrum> {
    params.validate()?;
    if params.k1 != 0.0 {
        return Err(DqcError::InvalidParameter { name: "k1", reason: "closed form needs k1 = 0".into() });
    }
    if q.unsigned_abs() as usize > params.two_s {
        return Err(DqcError::InvalidParameter { name: "q", reason: format!("|q| must not exceed 2S = {}", params.two_s) });
    }
    let s = params.s();
    let qf = q as f64;
    let kappa = params.jump_rate();
    let (lo, hi) = ((-s).max(-s + qf), s.min(s + qf));
    let count = (hi - lo).round() as usize + 1;
    let mut values = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for k in 0..count {
        let m = hi - k as f64;
        let r = (-0.5 * kappa * (params.a(m) + params.a(m - qf))).exp();
        let theta = -qf * (params.p + params.k0 / (2.0 * s) * (2.0 * m - qf));
        values.push(c64::from_polar(r, theta));
        labels.push(format!("q={q},m={m}"));
    }
    let source = serde_json::json!({ "model": "ghs-closed-form", "params": params, "q": q });
    Ok(ComplexSpectrum { values, labels: Some(labels), source })
}

/// Union of closed-form sector spectra with `m − n` of the given parity.
pub fn parity_union_eigenvalues(params: &GhsParams, even: bool) -> Result<Vec<c64>> {
    let two_s = params.two_s as i64;
    let mut out = Vec::new();
    for q in -two_s..=two_s {
        if (q.rem_euclid(2) == 0) == even {
            out.extend(fixed_q_eigenvalues(params, q)?.values);
        }
    }
    Ok(out)
}

/// `|λ_m − λ_{m'}|` in sector `q` from the polar form.
pub fn pair_distance(m: f64, m2: f64, q: i64, params: &GhsParams) -> f64 {
    let s = params.s();
    let qf = q as f64;
    let kappa = params.jump_rate();
    let r = |m: f64| (-0.5 * kappa * (params.a(m) + params.a(m - qf))).exp();
    let (r1, r2) = (r(m), r(m2));
    let dtheta = -(params.k0 * qf / s) * (m - m2);
    (r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * dtheta.cos()).max(0.0).sqrt()
}

/// Which sector spectra enter the spacing statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectorChoice {
    /// Numerical spectrum of one parity block.
    Parity { even: bool },
    /// Closed-form fixed-`q` spectra, each unfolded on its own.
    FixedQ(Vec<i64>),
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorStatistics {
    pub label: String,
    /// Set for the real-only `q = 0` sector, which is left out of planar statistics.
    pub real_only: bool,
    pub spacings: Vec<f64>,
}

impl SectorStatistics {
    pub fn cdf(&self) -> EmpiricalCdf {
        EmpiricalCdf::new(self.spacings.clone())
    }
}

/// Spacing options shrunk to fit a small sector.
fn fit_options(opts: &SpacingOptions, len: usize) -> SpacingOptions {
    let mut o = *opts;
    if o.unfold {
        o.k_loc = o.k_loc.min(len.saturating_sub(1)).max(1);
    }
    o
}

/// Per-sector pooled spacings over a `k₀` sweep; each sector and `k₀` is unfolded separately.
pub fn sector_spacing_statistics(
    base: &GhsParams,
    choice: &SectorChoice,
    k0_grid: &[f64],
    opts: &SpacingOptions,
) -> Result<Vec<SectorStatistics>> {
    match choice {
        SectorChoice::Parity { even } => {
            let idx = parity_indices(base, *even);
            let per_k0: Vec<Vec<f64>> = k0_grid
                .par_iter()
                .map(|&k0| {
                    let params = GhsParams { k0, ..*base };
                    let phi = build_ghs_map(&params)?;
                    let ev = eigen::eigenvalues(sector_block(&phi, &idx).as_ref())?;
                    Ok(nn_spacings(&ev, opts)?.into_iter().map(|s| s.s).collect())
                })
                .collect::<Result<_>>()?;
            let label = if *even { "even" } else { "odd" }.to_string();
            Ok(vec![SectorStatistics { label, real_only: false, spacings: per_k0.concat() }])
        }
        SectorChoice::FixedQ(qs) => qs
            .iter()
            .map(|&q| {
                let mut spacings = Vec::new();
                if q != 0 {
                    for &k0 in k0_grid {
                        let params = GhsParams { k0, ..*base };
                        let ev = fixed_q_eigenvalues(&params, q)?.values;
                        if ev.len() < 3 {
                            continue;
                        }
                        spacings.extend(nn_spacings(&ev, &fit_options(opts, ev.len()))?.into_iter().map(|s| s.s));
                    }
                }
                Ok(SectorStatistics { label: format!("q={q}"), real_only: q == 0, spacings })
            })
            .collect(),
    }
}

fn parity_indices(params: &GhsParams, even: bool) -> Vec<usize> {
    let n = params.dim();
    (0..n * n).filter(|&r| ((r % n + r / n) % 2 == 0) == even).collect()
}

/// Eigenvalue trajectories of one parity block along a damping grid.
///
/// `flow[k][g]` is the position of trajectory `k` at `gammas[g]`. Neighbouring grids are linked by
/// greedy nearest-neighbour assignment in order of increasing distance, measured from each
/// trajectory's linear extrapolation once it has two points.
pub fn eigenvalue_flow(base: &GhsParams, gammas: &[f64], even: bool) -> Result<Vec<Vec<c64>>> {
    let idx = parity_indices(base, even);
    let spectra: Vec<Vec<c64>> = gammas
        .par_iter()
        .map(|&gamma| {
            let params = GhsParams { gamma, ..*base };
            let phi = build_ghs_map(&params)?;
            eigen::eigenvalues(sector_block(&phi, &idx).as_ref())
        })
        .collect::<Result<_>>()?;
    let Some(first) = spectra.first() else {
        return Ok(Vec::new());
    };
    let mut flow: Vec<Vec<c64>> = first.iter().map(|&z| vec![z]).collect();
    for next in &spectra[1..] {
        let prev: Vec<c64> = flow
            .iter()
            .map(|t| match t.as_slice() {
                [.., a, b] => b * 2.0 - a,
                [.., b] => *b,
                [] => unreachable!("trajectories start non-empty"),
            })
            .collect();
        let assign = greedy_assignment(&prev, next);
        for (t, &j) in flow.iter_mut().zip(&assign) {
            t.push(next[j]);
        }
    }
    Ok(flow)
}

/// Pairs each `a[i]` with a distinct `b[j]`, closest pairs first.
pub fn greedy_assignment(a: &[c64], b: &[c64]) -> Vec<usize> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, za) in a.iter().enumerate() {
        for (j, zb) in b.iter().enumerate() {
            pairs.push(((za - zb).norm(), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut out = vec![usize::MAX; a.len()];
    let mut used = vec![false; b.len()];
    let mut left = a.len().min(b.len());
    for (_, i, j) in pairs {
        if left == 0 {
            break;
        }
        if out[i] == usize::MAX && !used[j] {
            out[i] = j;
            used[j] = true;
            left -= 1;
        }
    }
    out
}
