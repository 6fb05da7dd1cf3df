use dqc_core::c64;
use dqc_core::ensembles::*;
use dqc_core::linalg::{self, CMat};
use dqc_core::spectra::stats::{complex_spacing_ratios, csr_density_ratio, dedup_points, nn_spacings, summarize_csr, EmpiricalCdf};
use dqc_core::spectra::{dsff, dsff_connected, sff};
use dqc_core::DqcError;
use rayon::prelude::*;
use serde_json::json;

use super::{density_2d, linspace, record_ks, reference_seed, spacing_options, write_is, write_references};
use crate::config::{CsrSection, CsrSource, DsffSection, SffSection, SpacingsSection};
use crate::error::CliResult;
use crate::output::{row, CheckKind, Output};

/// Kramers partners closer than this are collapsed before computing ratios.
const KRAMERS_TOL: f64 = 1e-7;

/// `A + J Aᵀ Jᵀ` with `J = iσ_y ⊗ 1`, so `J Hᵀ Jᵀ = H` and `J J̄ = −1`.
fn aii_dagger(n: usize, rng: &mut impl rand::Rng) -> CMat {
    let a = sample_ginibre(Field::Complex, n, n, 1.0 / n as f64, rng);
    let h = n / 2;
    let j = CMat::from_fn(n, n, |r, c| {
        if r < h && c == r + h {
            linalg::ONE
        } else if r >= h && c + h == r {
            -linalg::ONE
        } else {
            linalg::ZERO
        }
    });
    &a + &j * linalg::transpose(a.as_ref()) * linalg::transpose(j.as_ref())
}

fn source_points(src: CsrSource, s: &CsrSection, seed: u64, stream: u64) -> Result<Vec<c64>, DqcError> {
    let mut rng = rng_for(seed, stream);
    let n = s.n;
    let m = match src {
        CsrSource::Poisson => return Ok(sample_poisson_disk(s.points, &mut rng)),
        CsrSource::GinUe => sample_ginibre(Field::Complex, n, n, 1.0 / n as f64, &mut rng),
        CsrSource::GinOe => sample_ginibre(Field::Real, n, n, 1.0 / n as f64, &mut rng),
        CsrSource::AiDagger => {
            let g = sample_ginibre(Field::Complex, n, n, 0.5 / n as f64, &mut rng);
            &g + linalg::transpose(g.as_ref())
        }
        CsrSource::AiiDagger => aii_dagger(n, &mut rng),
    };
    dqc_core::spectra::eigen::eigenvalues(m.as_ref())
}

pub fn run_csr(s: &CsrSection, seed: u64, out: &mut Output) -> CliResult<()> {
    for (si, &src) in s.sources.iter().enumerate() {
        let sets = if src == CsrSource::Poisson { 1 } else { s.matrices };
        let base = 1000 * si as u64;
        let point_sets: Vec<Vec<c64>> =
            (0..sets as u64).into_par_iter().map(|k| source_points(src, s, seed, base + k)).collect::<Result<_, _>>()?;
        let mut samples = Vec::new();
        let mut kramers = 0;
        for pts in &point_sets {
            let pts = if src == CsrSource::AiiDagger {
                let (kept, removed) = dedup_points(pts, KRAMERS_TOL);
                kramers += removed;
                kept
            } else {
                pts.clone()
            };
            samples.extend(complex_spacing_ratios(&pts)?.0);
        }
        let summary = summarize_csr(&samples, 0);
        let depletion = csr_density_ratio(&samples, s.depletion_radius);
        let name = src.name();
        out.result(
            &format!("csr_{name}"),
            json!({ "summary": summary, "depletion": depletion, "depletion_radius": s.depletion_radius, "kramers_collapsed": kramers }),
        );
        let extra = json!({ "source": name, "n": s.n, "sets": sets });
        let rows: Vec<Vec<String>> = samples.iter().map(|z| row(&[z.z.re, z.z.im])).collect();
        out.table(&format!("csr_{name}.csv"), extra.clone(), &["re", "im"], &rows)?;
        let zs: Vec<c64> = samples.iter().map(|z| z.z).collect();
        out.table(&format!("csr_density_{name}.csv"), extra, &["re", "im", "density"], &density_2d(&zs, (-1.0, 1.0), (-1.0, 1.0), s.bins))?;
        match src {
            CsrSource::Poisson => out.check(
                "csr_poisson",
                CheckKind::Expectation,
                (summary.mean_r - 2.0 / 3.0).abs() <= 0.01 && summary.mean_cos.abs() <= 0.01,
                format!("⟨r⟩ {:.4}, ⟨cos θ⟩ {:+.4}", summary.mean_r, summary.mean_cos),
            ),
            CsrSource::GinUe => out.check(
                "csr_gin_ue",
                CheckKind::Expectation,
                summary.mean_cos < -0.1 && depletion < 0.2,
                format!("⟨cos θ⟩ {:+.4}, density ratio near zero {depletion:.3}", summary.mean_cos),
            ),
            _ => {}
        }
    }
    Ok(())
}

/// Removes the stationary eigenvalue of generators (0) and channels (1).
fn strip_stationary(sample: &EnsembleSample, ev: Vec<c64>) -> Vec<c64> {
    let target = match sample {
        EnsembleSample::Lindbladian(_) => c64::new(0.0, 0.0),
        EnsembleSample::Channel(_) => c64::new(1.0, 0.0),
        _ => return ev,
    };
    let k = (0..ev.len()).min_by(|&a, &b| (ev[a] - target).norm().total_cmp(&(ev[b] - target).norm()));
    ev.into_iter().enumerate().filter(|(i, _)| Some(*i) != k).map(|(_, z)| z).collect()
}

pub fn run_spacings(s: &SpacingsSection, seed: u64, out: &mut Output) -> CliResult<()> {
    let opts = spacing_options(s.unfold, s.k_loc, s.smooth, s.edge_hull, s.near_real);
    let drop = s.drop_stationary;
    let spectra: Vec<Vec<c64>> = (0..s.realizations as u64)
        .into_par_iter()
        .map(|k| {
            let sample = sample(&s.ensemble, k)?;
            let ev = sample.spectrum()?;
            Ok(if drop { strip_stationary(&sample, ev) } else { ev })
        })
        .collect::<Result<_, DqcError>>()?;
    out.spectrum("spectrum_0.csv", json!({ "spec": s.ensemble, "realization": 0, "stationary_dropped": drop }), spectra[0].clone(), None)?;
    let mut pooled = Vec::new();
    for ev in &spectra {
        pooled.extend(nn_spacings(ev, &opts)?.into_iter().map(|x| x.s));
    }
    let cdf = EmpiricalCdf::new(pooled);
    write_is(out, "is.csv", "pooled", &cdf, s.s_max, s.curve_points)?;
    let size = if s.reference_size == 0 { spectra[0].len() } else { s.reference_size };
    let want_ginibre = matches!(s.reference, crate::config::ReferenceChoice::Ginibre | crate::config::ReferenceChoice::Both);
    let ginibre = write_references(
        out,
        &opts,
        want_ginibre.then_some((s.reference_matrices, size, reference_seed(seed))),
        s.s_max,
        s.curve_points,
    )?;
    record_ks(out, "pooled", &cdf, ginibre.as_ref());
    Ok(())
}

pub fn run_sff(s: &SffSection, out: &mut Output) -> CliResult<()> {
    let levels: Vec<Vec<f64>> = (0..s.realizations as u64)
        .into_par_iter()
        .map(|k| Ok(sample(&s.ensemble, k)?.spectrum()?.into_iter().map(|z| z.re).collect()))
        .collect::<Result<_, DqcError>>()?;
    let (a, b) = (s.t_min.ln(), s.t_max.ln());
    let times: Vec<f64> = linspace(a, b, s.points).into_iter().map(f64::exp).collect();
    let curve = sff(&levels, &times);
    let pts: Vec<(f64, f64)> = curve.abscissa.iter().zip(&curve.value).map(|(t, v)| (t.re, *v)).collect();
    out.curve("sff.csv", json!({ "curve": "sff", "ensemble": s.ensemble, "realizations": curve.n_samples }), "t", "sff", &pts)?;
    Ok(())
}

pub fn run_dsff(s: &DsffSection, out: &mut Output) -> CliResult<()> {
    let spectra: Vec<Vec<c64>> = (0..s.realizations as u64)
        .into_par_iter()
        .map(|k| sample(&s.ensemble, k)?.spectrum())
        .collect::<Result<_, DqcError>>()?;
    let eval = |taus: &[c64]| {
        if s.connected {
            dsff_connected(&spectra, taus, s.convention)
        } else {
            dsff(&spectra, taus, s.convention)
        }
    };
    let dir = c64::from_polar(1.0, s.angle);
    let ray: Vec<c64> = linspace(0.0, s.tau_max, s.points).into_iter().map(|r| dir * r).collect();
    let curve = eval(&ray);
    let extra = json!({ "curve": "dsff", "ensemble": s.ensemble, "connected": s.connected, "convention": s.convention, "angle": s.angle });
    let pts: Vec<(c64, f64)> = curve.abscissa.iter().copied().zip(curve.value.iter().copied()).collect();
    out.complex_curve("dsff_ray.csv", extra.clone(), &pts)?;
    if s.grid > 0 {
        let axis = linspace(-s.tau_max, s.tau_max, s.grid);
        let taus: Vec<c64> = axis.iter().flat_map(|&y| axis.iter().map(move |&x| c64::new(x, y))).collect();
        let curve = eval(&taus);
        let pts: Vec<(c64, f64)> = curve.abscissa.iter().copied().zip(curve.value.iter().copied()).collect();
        out.complex_curve("dsff_grid.csv", extra, &pts)?;
    }
    Ok(())
}
