use dqc_core::c64;
use dqc_core::ensembles::*;
use dqc_core::opcore::{DynamicsKind, KrausSet};
use dqc_core::spectra::analytic::{diluted_radii, ring_disk_pc};
use dqc_core::spectra::form_factors::{dff_single, trace_of_power};
use dqc_core::spectra::{dff, eigen, spectral_gap, GapKind};
use dqc_core::DqcError;
use rayon::prelude::*;
use serde_json::json;

use super::{linspace, spectral_checks, tag};
use crate::config::{DffSection, DilutedSection, RpqcSection};
use crate::error::{CliError, CliResult};
use crate::output::{row, CheckKind, Output};

/// Relative tolerance of the radius comparison.
const RADIUS_TOL: f64 = 0.1;
/// A hole smaller than this fraction of the outer radius counts as closed.
const HOLE_FRACTION: f64 = 0.2;
const ORACLE_TOL: f64 = 1e-8;

struct MapDraw {
    spectrum: Vec<c64>,
    trace_residual: f64,
}

fn map_draw(ks: KrausSet) -> Result<MapDraw, DqcError> {
    let phi = ks.superoperator();
    Ok(MapDraw { spectrum: eigen::superop_eigenvalues(&phi)?, trace_residual: phi.trace_residual(false) })
}

/// Mean of the `count` smallest and largest moduli, leaving out the stationary eigenvalue.
fn edge_means(ev: &[c64], count: usize) -> (f64, f64) {
    let mut moduli: Vec<f64> = ev.iter().map(|z| z.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    moduli.pop();
    let inner = moduli[..count].iter().sum::<f64>() / count as f64;
    let outer = moduli[moduli.len() - count..].iter().sum::<f64>() / count as f64;
    (inner, outer)
}

pub fn run_diluted(s: &DilutedSection, seed: u64, out: &mut Output) -> CliResult<()> {
    let jobs: Vec<(usize, usize, usize)> = (0..s.d.len())
        .flat_map(|di| (0..s.p.len()).flat_map(move |pi| (0..s.realizations).map(move |r| (di, pi, r))))
        .collect();
    let draws: Vec<MapDraw> = jobs
        .par_iter()
        .map(|&(di, pi, r)| {
            let stream = (di * 1_000_000 + pi * 1000 + r) as u64;
            map_draw(sample_diluted_unitary(s.n, s.d[di], s.p[pi], &mut rng_for(seed, stream))?)
        })
        .collect::<Result<_, _>>()?;
    let mut draws = draws.into_iter();
    for &d in &s.d {
        let mut radii = Vec::new();
        let mut holes = Vec::new();
        for &p in &s.p {
            let (mut values, mut labels) = (Vec::new(), Vec::new());
            let (mut inner, mut outer) = (0.0, 0.0);
            for r in 0..s.realizations {
                let dr = draws.next().expect("one draw per job");
                spectral_checks(out, &format!("map_d_{d}_p_{}_{r}", tag(p)), dr.trace_residual, &dr.spectrum, DynamicsKind::Map)?;
                let (i, o) = edge_means(&dr.spectrum, s.edge_count);
                inner += i / s.realizations as f64;
                outer += o / s.realizations as f64;
                labels.extend(std::iter::repeat(r.to_string()).take(dr.spectrum.len()));
                values.extend(dr.spectrum);
            }
            let extra = json!({ "model": "diluted-unitary", "n": s.n, "d": d, "p": p });
            out.spectrum(&format!("spectrum_d_{d}_p_{}.csv", tag(p)), extra, values, Some(labels))?;
            let th = diluted_radii(p, d);
            let outer_ok = (outer - th.r_plus).abs() <= RADIUS_TOL * th.r_plus;
            let inner_ok = if th.disk { inner <= RADIUS_TOL * th.r_plus } else { (inner - th.r_minus).abs() <= RADIUS_TOL * th.r_minus };
            out.check(
                &format!("radii_d_{d}_p_{}", tag(p)),
                CheckKind::Expectation,
                outer_ok && inner_ok,
                format!("R+ {outer:.4} vs {:.4}, R- {inner:.4} vs {:.4}", th.r_plus, th.r_minus),
            );
            radii.push(row(&[p, inner, outer, th.r_minus, th.r_plus, th.disk as u8 as f64]));
            holes.push((p, inner > HOLE_FRACTION * outer));
        }
        let extra = json!({ "curve": "diluted-radii", "d": d, "edge_count": s.edge_count, "realizations": s.realizations });
        out.table(&format!("radii_d_{d}.csv"), extra, &["p", "r_minus", "r_plus", "r_minus_theory", "r_plus_theory", "disk_theory"], &radii)?;
        let theory: Vec<Vec<String>> = linspace(0.0, 1.0, s.theory_points)
            .into_iter()
            .map(|p| {
                let th = diluted_radii(p, d);
                row(&[p, th.r_minus, th.r_plus])
            })
            .collect();
        out.table(&format!("radii_theory_d_{d}.csv"), json!({ "curve": "diluted-radii-theory", "d": d }), &["p", "r_minus", "r_plus"], &theory)?;
        let last_ring = holes.iter().filter(|h| h.1).map(|h| h.0).fold(None, |a: Option<f64>, p| Some(a.map_or(p, |a| a.max(p))));
        let first_disk = holes.iter().filter(|h| !h.1).map(|h| h.0).fold(None, |a: Option<f64>, p| Some(a.map_or(p, |a| a.min(p))));
        out.result(&format!("crossover_d_{d}"), json!({ "last_ring": last_ring, "first_disk": first_disk, "p_c": ring_disk_pc(d) }));
    }
    Ok(())
}

pub fn run_rpqc(s: &RpqcSection, seed: u64, out: &mut Output) -> CliResult<()> {
    let jobs: Vec<(usize, usize, usize)> = (0..s.tau.len())
        .flat_map(|ti| (0..s.epsilon.len()).flat_map(move |ei| (0..s.realizations).map(move |r| (ti, ei, r))))
        .collect();
    let draws: Vec<MapDraw> = jobs
        .par_iter()
        .map(|&(ti, ei, r)| {
            let stream = (ti * 1_000_000 + ei * 1000 + r) as u64;
            map_draw(sample_rpqc(s.n, s.k, s.tau[ti], s.epsilon[ei], &mut rng_for(seed, stream))?)
        })
        .collect::<Result<_, _>>()?;
    let mut gaps = Vec::new();
    for (&(ti, ei, r), dr) in jobs.iter().zip(draws) {
        let (tau, eps) = (s.tau[ti], s.epsilon[ei]);
        let label = format!("tau_{}_eps_{}_{r}", tag(tau), tag(eps));
        spectral_checks(out, &format!("map_{label}"), dr.trace_residual, &dr.spectrum, DynamicsKind::Map)?;
        let gap = spectral_gap(&dr.spectrum, GapKind::Map)?;
        gaps.push(row(&[tau, eps, r as f64, gap]));
        let extra = json!({ "model": "rpqc", "n": s.n, "k": s.k, "tau": tau, "epsilon": eps, "realization": r });
        out.spectrum(&format!("spectrum_{label}.csv"), extra, dr.spectrum, None)?;
    }
    out.table("gaps.csv", json!({ "curve": "rpqc-gaps" }), &["tau", "epsilon", "realization", "gap"], &gaps)?;
    Ok(())
}

pub fn run_dff(s: &DffSection, out: &mut Output) -> CliResult<()> {
    let results: Vec<(Vec<c64>, f64, f64)> = (0..s.realizations as u64)
        .into_par_iter()
        .map(|k| {
            let EnsembleSample::Channel(ks) = sample(&s.ensemble, k)? else {
                return Err(DqcError::InvalidParameter { name: "ensemble", reason: "not a channel ensemble".into() });
            };
            let phi = ks.superoperator();
            let ev = eigen::superop_eigenvalues(&phi)?;
            let mut worst = 0.0f64;
            for t in 1..=s.oracle_t_max {
                let sum = dff_single(&ev, t);
                let scale = ev.iter().map(|z| z.norm().powi(t as i32)).sum::<f64>().max(1.0);
                worst = worst.max((sum - trace_of_power(phi.mat(), t)).norm() / scale);
            }
            Ok((ev, worst, phi.trace_residual(false)))
        })
        .collect::<Result<_, DqcError>>()
        .map_err(CliError::from)?;
    let mut spectra = Vec::with_capacity(results.len());
    let mut worst = 0.0f64;
    for (k, (ev, w, trace)) in results.into_iter().enumerate() {
        spectral_checks(out, &format!("map_{k}"), trace, &ev, DynamicsKind::Map)?;
        worst = worst.max(w);
        spectra.push(ev);
    }
    if s.oracle_t_max > 0 {
        out.check(
            "dff_oracle",
            CheckKind::Invariant,
            worst <= ORACLE_TOL,
            format!("max relative |Σλ^t − Tr Φ^t| = {worst:.2e} for t ≤ {}", s.oracle_t_max),
        );
    }
    let times: Vec<u32> = (0..=s.t_max).collect();
    let curve = dff(&spectra, &times);
    let pts: Vec<(f64, f64)> = curve.abscissa.iter().zip(&curve.value).map(|(t, v)| (t.re, *v)).collect();
    out.curve("dff.csv", json!({ "curve": "dff", "ensemble": s.ensemble, "realizations": curve.n_samples }), "t", "dff", &pts)?;
    Ok(())
}
