//! Experiment runners. Each writes its CSVs and checks into an [`Output`].

mod ghs;
mod kerr;
mod lindblad;
mod maps;
mod stats;
mod symmetry;

use dqc_core::c64;
use dqc_core::io::fmt_f64;
use dqc_core::opcore::{DynamicsKind, FIXED_POINT_TOL, RE_TOL, TRACE_TOL};
use dqc_core::spectra::analytic::poisson_reference_i;
use dqc_core::spectra::stats::{EdgeFilter, EmpiricalCdf, NearReal, SpacingOptions};
use dqc_core::spectra::ginibre_reference;
use dqc_core::symmetry::{spectrum_reflection_check, SymmetryKind, REFLECTION_TOL};
use serde_json::json;

use crate::config::{Params, RunConfig};
use crate::error::CliResult;
use crate::output::{CheckKind, Output};

pub fn run(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    let seed = cfg.seed;
    match &cfg.params {
        Params::Ghs(s) => ghs::run(s, seed, out),
        Params::RandomLindblad(s) => lindblad::run_random(s, seed, out),
        Params::Lemon(s) => lindblad::run_lemon(s, seed, out),
        Params::Diluted(s) => maps::run_diluted(s, seed, out),
        Params::Rpqc(s) => maps::run_rpqc(s, seed, out),
        Params::Csr(s) => stats::run_csr(s, seed, out),
        Params::Spacings(s) => stats::run_spacings(s, seed, out),
        Params::Sff(s) => stats::run_sff(s, out),
        Params::Dff(s) => maps::run_dff(s, out),
        Params::Dsff(s) => stats::run_dsff(s, out),
        Params::Kerr(s) => kerr::run(s, seed, out),
        Params::Symmetry(s) => symmetry::run(s, seed, out),
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

pub fn spacing_options(unfold: bool, k_loc: usize, smooth: usize, edge_hull: f64, near_real: NearReal) -> SpacingOptions {
    let hull_spacings = (edge_hull > 0.0).then_some(edge_hull);
    SpacingOptions { unfold, k_loc, smooth, edge_filter: EdgeFilter { hull_spacings, near_real } }
}

/// Seed of sampled references, kept apart from the ensembles drawn with the run seed.
pub fn reference_seed(seed: u64) -> u64 {
    seed ^ 0x005e_ed0f_5afe_0000
}

/// Label fragment for a float parameter in a file name.
pub fn tag(x: f64) -> String {
    fmt_f64(x)
}

/// Integrated spacing distribution `I(s)` on `[0, s_max]`.
pub fn write_is(out: &mut Output, name: &str, label: &str, cdf: &EmpiricalCdf, s_max: f64, points: usize) -> CliResult<()> {
    let extra = json!({ "curve": "integrated-spacing", "label": label, "samples": cdf.len() });
    out.curve(name, extra, "s", "I", &cdf.curve(s_max, points))
}

/// Poisson curve in closed form and, when requested, the pooled Ginibre reference.
pub fn write_references(
    out: &mut Output,
    opts: &SpacingOptions,
    ginibre: Option<(usize, usize, u64)>,
    s_max: f64,
    points: usize,
) -> CliResult<Option<EmpiricalCdf>> {
    let poisson: Vec<(f64, f64)> = linspace(0.0, s_max, points).into_iter().map(|s| (s, poisson_reference_i(s))).collect();
    out.curve("reference_poisson.csv", json!({ "curve": "poisson-reference" }), "s", "I", &poisson)?;
    let Some((matrices, size, seed)) = ginibre else {
        return Ok(None);
    };
    let cdf = ginibre_reference(matrices, size, seed, opts)?;
    let extra = json!({ "curve": "ginibre-reference", "matrices": matrices, "size": size, "reference_seed": seed });
    out.curve("reference_ginibre.csv", extra, "s", "I", &cdf.curve(s_max, points))?;
    Ok(Some(cdf))
}

/// KS distances of `cdf` to the references, recorded under `label`.
pub fn record_ks(out: &mut Output, label: &str, cdf: &EmpiricalCdf, ginibre: Option<&EmpiricalCdf>) -> (f64, Option<f64>) {
    let p = cdf.ks_to(poisson_reference_i);
    let g = ginibre.map(|r| cdf.ks_between(r));
    let closer = match g {
        Some(g) if g < p => "ginibre",
        Some(_) => "poisson",
        None => "n/a",
    };
    out.result(
        &format!("ks_{label}"),
        json!({ "samples": cdf.len(), "mean": cdf.mean(), "poisson": p, "ginibre": g, "closer": closer }),
    );
    (p, g)
}

/// Trace residual, spectral bound, fixed point and conjugation closure from a computed spectrum.
pub fn spectral_checks(out: &mut Output, label: &str, trace: f64, ev: &[c64], kind: DynamicsKind) -> CliResult<()> {
    let scale = ev.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let (excess, target) = match kind {
        DynamicsKind::Lindbladian => (ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max), c64::new(0.0, 0.0)),
        DynamicsKind::Map => (ev.iter().map(|z| z.norm()).fold(0.0, f64::max) - 1.0, c64::new(1.0, 0.0)),
    };
    let fixed = ev.iter().map(|z| (z - target).norm()).fold(f64::INFINITY, f64::min);
    let conj = spectrum_reflection_check(ev, SymmetryKind::TPlus, REFLECTION_TOL)?;
    let ok = trace <= TRACE_TOL * scale && excess <= RE_TOL * scale && fixed <= FIXED_POINT_TOL * scale && conj.passed;
    out.check(
        label,
        CheckKind::Invariant,
        ok,
        format!("trace residual {trace:.1e}, spectral excess {excess:.1e}, fixed-point distance {fixed:.1e}, conjugation closed {}", conj.passed),
    );
    Ok(())
}

/// Rows `x, y, density` of a `bins × bins` histogram over a box, normalized to unit integral
/// over the points that fall inside.
pub fn density_2d(points: &[c64], x: (f64, f64), y: (f64, f64), bins: usize) -> Vec<Vec<String>> {
    let (wx, wy) = ((x.1 - x.0) / bins as f64, (y.1 - y.0) / bins as f64);
    let mut counts = vec![0usize; bins * bins];
    let mut inside = 0usize;
    for z in points {
        let (i, j) = (((z.re - x.0) / wx).floor(), ((z.im - y.0) / wy).floor());
        if i >= 0.0 && j >= 0.0 && (i as usize) < bins && (j as usize) < bins {
            counts[i as usize + bins * j as usize] += 1;
            inside += 1;
        }
    }
    let norm = inside.max(1) as f64 * wx * wy;
    let mut rows = Vec::with_capacity(bins * bins);
    for j in 0..bins {
        for i in 0..bins {
            let (cx, cy) = (x.0 + (i as f64 + 0.5) * wx, y.0 + (j as f64 + 0.5) * wy);
            rows.push(crate::output::row(&[cx, cy, counts[i + bins * j] as f64 / norm]));
        }
    }
    rows
}
