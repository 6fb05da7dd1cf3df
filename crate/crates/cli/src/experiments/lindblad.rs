use dqc_core::c64;
use dqc_core::ensembles::*;
use dqc_core::opcore::{BasisKind, DynamicsKind};
use dqc_core::spectra::analytic::{inside_lemon, lemon_boundary, LemonScaling};
use dqc_core::spectra::{eigen, spectral_gap, GapKind};
use dqc_core::DqcError;
use rayon::prelude::*;
use serde_json::json;

use super::{density_2d, spectral_checks};
use crate::config::{BasisChoice, LemonSection, NormChoice, RandomLindbladSection, ScalingChoice};
use crate::error::CliResult;
use crate::output::{row, CheckKind, Output};

/// Fraction of rescaled eigenvalues expected inside the dilated boundary.
const INSIDE_TARGET: f64 = 0.98;
const BOUNDARY_POINTS: usize = 400;

/// Streams of the density and random-matrix pools; the single spectrum uses stream 0.
const DENSITY_STREAM: u64 = 1000;
const RMT_STREAM: u64 = 2000;

struct Draw {
    spectrum: Vec<c64>,
    trace_residual: f64,
}

fn draw(spec: &LindbladianSpec, seed: u64, stream: u64) -> Result<Draw, DqcError> {
    let rl = sample_random_lindbladian(spec, &mut rng_for(seed, stream))?;
    let spectrum = eigen::superop_eigenvalues(&rl.generator)?;
    Ok(Draw { spectrum, trace_residual: rl.generator.trace_residual(true) })
}

/// Removes the eigenvalue closest to zero.
fn drop_stationary(ev: &[c64]) -> Vec<c64> {
    let k = (0..ev.len()).min_by(|&a, &b| ev[a].norm().total_cmp(&ev[b].norm()));
    ev.iter().enumerate().filter(|(i, _)| Some(*i) != k).map(|(_, z)| *z).collect()
}

fn inside_fraction(points: &[c64], dilation: f64) -> f64 {
    points.iter().filter(|z| inside_lemon(**z, dilation)).count() as f64 / points.len().max(1) as f64
}

/// Bounding box of the dilated boundary with a margin.
fn lemon_box(boundary: &[c64], dilation: f64) -> ((f64, f64), (f64, f64)) {
    let xr = boundary.iter().map(|z| z.re.abs()).fold(0.0, f64::max) * dilation * 1.2;
    let yr = boundary.iter().map(|z| z.im.abs()).fold(0.0, f64::max) * dilation * 1.2;
    ((-xr, xr), (-yr, yr))
}

fn write_boundary(out: &mut Output, points: usize) -> CliResult<Vec<c64>> {
    let b = lemon_boundary(points)?;
    let rows: Vec<Vec<String>> = b.iter().map(|z| row(&[z.re, z.im])).collect();
    out.table("lemon_boundary.csv", json!({ "curve": "lemon-boundary" }), &["re", "im"], &rows)?;
    Ok(b)
}

fn inside_check(out: &mut Output, name: &str, frac: f64, total: usize, applies: bool) {
    out.result(name, json!({ "inside_fraction": frac, "count": total }));
    if applies {
        out.check(
            name,
            CheckKind::Expectation,
            frac >= INSIDE_TARGET,
            format!("{frac:.4} of {total} rescaled eigenvalues inside the dilated boundary"),
        );
    }
}

pub fn run_random(s: &RandomLindbladSection, seed: u64, out: &mut Output) -> CliResult<()> {
    let basis = match s.basis {
        BasisChoice::MatrixUnits => BasisKind::MatrixUnits,
        BasisChoice::SuN => BasisKind::SuN { include_identity: false },
    };
    let hamiltonian_norm = match s.hamiltonian_norm {
        NormChoice::InverseDimension => HamiltonianNorm::InverseDimension,
        NormChoice::PerDimension => HamiltonianNorm::PerDimension,
        NormChoice::Raw => HamiltonianNorm::Raw,
    };
    let spec = LindbladianSpec { n: s.n, rank: s.rank, alpha: s.alpha, basis, hamiltonian_norm };
    let d = match s.basis {
        BasisChoice::MatrixUnits => s.n * s.n,
        BasisChoice::SuN => s.n * s.n - 1,
    };
    let rank = s.rank.unwrap_or(d);
    let scaling = match s.scaling {
        ScalingChoice::Dimension => LemonScaling::Dimension(s.n),
        ScalingChoice::SqrtRank => LemonScaling::SqrtRank(rank),
    };
    let draws: Vec<Draw> =
        (0..s.realizations as u64).into_par_iter().map(|k| draw(&spec, seed, k)).collect::<Result<_, _>>()?;
    let (mut pooled, mut labels, mut gaps) = (Vec::new(), Vec::new(), Vec::new());
    for (k, dr) in draws.iter().enumerate() {
        spectral_checks(out, &format!("generator_{k}"), dr.trace_residual, &dr.spectrum, DynamicsKind::Lindbladian)?;
        out.spectrum(&format!("spectrum_{k}.csv"), json!({ "spec": spec, "realization": k }), dr.spectrum.clone(), None)?;
        gaps.push(spectral_gap(&dr.spectrum, GapKind::Lindblad)?);
        let mut scaled = scaling.apply(&drop_stationary(&dr.spectrum));
        if s.drop_real {
            scaled.retain(|z| z.im.abs() > 1e-10 * z.norm().max(1.0));
        }
        labels.extend(std::iter::repeat(k.to_string()).take(scaled.len()));
        pooled.extend(scaled);
    }
    out.result("gaps", &gaps);
    let frac = inside_fraction(&pooled, s.dilation);
    let applies = s.alpha == 0.0 && rank == d && s.basis == BasisChoice::MatrixUnits && s.scaling == ScalingChoice::Dimension;
    inside_check(out, "lemon_support", frac, pooled.len(), applies);
    let boundary = write_boundary(out, BOUNDARY_POINTS)?;
    if s.density_bins > 0 {
        let (x, y) = lemon_box(&boundary, s.dilation);
        let rows = density_2d(&pooled, x, y, s.density_bins);
        out.table("density.csv", json!({ "scaling": scaling }), &["re", "im", "density"], &rows)?;
    }
    out.spectrum("rescaled.csv", json!({ "spec": spec, "scaling": scaling, "stationary_dropped": true }), pooled, Some(labels))?;
    Ok(())
}

pub fn run_lemon(s: &LemonSection, seed: u64, out: &mut Output) -> CliResult<()> {
    let boundary = write_boundary(out, s.boundary_points)?;
    let (x, y) = lemon_box(&boundary, s.dilation);

    let single = LindbladianSpec { alpha: s.alpha, ..LindbladianSpec::purely_dissipative(s.n_single) };
    let dr = draw(&single, seed, 0)?;
    spectral_checks(out, "single_generator", dr.trace_residual, &dr.spectrum, DynamicsKind::Lindbladian)?;
    let scaled = LemonScaling::Dimension(s.n_single).apply(&drop_stationary(&dr.spectrum));
    inside_check(out, "single_inside", inside_fraction(&scaled, s.dilation), scaled.len(), s.alpha == 0.0);
    out.spectrum("single_spectrum.csv", json!({ "spec": single, "scaling": LemonScaling::Dimension(s.n_single) }), scaled, None)?;

    let pool = LindbladianSpec { alpha: s.alpha, ..LindbladianSpec::purely_dissipative(s.n_density) };
    let draws: Vec<Draw> = (0..s.density_realizations as u64)
        .into_par_iter()
        .map(|k| draw(&pool, seed, DENSITY_STREAM + k))
        .collect::<Result<_, _>>()?;
    let mut pooled = Vec::new();
    for (k, d) in draws.iter().enumerate() {
        spectral_checks(out, &format!("density_generator_{k}"), d.trace_residual, &d.spectrum, DynamicsKind::Lindbladian)?;
        pooled.extend(LemonScaling::Dimension(s.n_density).apply(&drop_stationary(&d.spectrum)));
    }
    inside_check(out, "density_inside", inside_fraction(&pooled, s.dilation), pooled.len(), s.alpha == 0.0);
    let rows = density_2d(&pooled, x, y, s.bins);
    out.table("density_lindblad.csv", json!({ "spec": pool, "realizations": s.density_realizations }), &["re", "im", "density"], &rows)?;

    let (n, alpha) = (s.rmt_n, s.alpha);
    let rmt: Vec<Vec<c64>> = (0..s.rmt_realizations as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(seed, RMT_STREAM + k);
            if alpha == 0.0 {
                eigen::eigenvalues_real(sample_lemon_rmt_real(n, &mut rng).as_ref())
            } else {
                eigen::eigenvalues(sample_lemon_rmt(n, alpha, &mut rng)?.as_ref())
            }
        })
        .collect::<Result<_, _>>()?;
    if let Some(first) = rmt.first() {
        out.spectrum("rmt_spectrum.csv", json!({ "model": "lemon-rmt", "n": n, "alpha": alpha }), first.clone(), None)?;
    }
    let pooled: Vec<c64> = rmt.concat();
    inside_check(out, "rmt_inside", inside_fraction(&pooled, s.dilation), pooled.len(), alpha == 0.0);
    let rows = density_2d(&pooled, x, y, s.bins);
    out.table("density_rmt.csv", json!({ "model": "lemon-rmt", "n": n, "realizations": rmt.len() }), &["re", "im", "density"], &rows)?;
    Ok(())
}
