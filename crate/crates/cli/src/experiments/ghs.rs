use dqc_core::ghs::*;
use dqc_core::io::fmt_f64;
use dqc_core::spectra::stats::EmpiricalCdf;
use dqc_core::spectra::{eigen, matching};
use serde_json::json;

use super::{linspace, record_ks, reference_seed, spacing_options, tag, write_is, write_references};
use crate::config::{GhsSection, SectorMode};
use crate::error::{CliError, CliResult};
use crate::output::{CheckKind, Output};

/// Agreement required between the numerical even block and the closed-form union.
const CLOSED_FORM_TOL: f64 = 1e-10;

pub fn run(s: &GhsSection, seed: u64, out: &mut Output) -> CliResult<()> {
    if s.sectors == SectorMode::FixedQ && s.k1.iter().any(|&k| k != 0.0) {
        return Err(CliError::invalid("k1", "fixed-q sectors need k1 = 0"));
    }
    let opts = spacing_options(s.unfold, s.k_loc, s.smooth, s.edge_hull, s.near_real);
    let k0_grid = linspace(s.k0, s.k0_max, s.k0_steps);
    let dim = s.two_s + 1;
    let size = if s.reference_size == 0 { dim * dim } else { s.reference_size };
    let ginibre = if s.statistics {
        write_references(out, &opts, Some((s.reference_matrices, size, reference_seed(seed))), s.s_max, s.curve_points)?
    } else {
        None
    };
    for &k1 in &s.k1 {
        let params = GhsParams { two_s: s.two_s, p: s.p, k0: s.k0, k1, gamma: s.gamma, jump: s.jump };
        params.validate()?;
        let k1t = tag(k1);
        match s.sectors {
            SectorMode::Parity => parity(s, &params, &k0_grid, &opts, ginibre.as_ref(), out)?,
            SectorMode::FixedQ => fixed_q(s, &params, &k0_grid, &opts, ginibre.as_ref(), out)?,
        }
        if s.flow_gamma_step > 0.0 {
            let steps = (s.flow_gamma_max / s.flow_gamma_step).round() as usize;
            let gammas: Vec<f64> = (0..=steps).map(|k| k as f64 * s.flow_gamma_step).collect();
            let flow = eigenvalue_flow(&params, &gammas, true)?;
            let mut rows = Vec::with_capacity(flow.len() * gammas.len());
            for (t, traj) in flow.iter().enumerate() {
                for (g, z) in gammas.iter().zip(traj) {
                    rows.push(vec![t.to_string(), fmt_f64(*g), fmt_f64(z.re), fmt_f64(z.im)]);
                }
            }
            let extra = json!({ "curve": "eigenvalue-flow", "sector": "even", "k1": k1 });
            out.table(&format!("flow_k1_{k1t}.csv"), extra, &["trajectory", "gamma", "re", "im"], &rows)?;
            out.result(&format!("flow_k1_{k1t}"), json!({ "trajectories": flow.len(), "gammas": gammas.len() }));
        }
    }
    Ok(())
}

fn parity(
    s: &GhsSection,
    params: &GhsParams,
    k0_grid: &[f64],
    opts: &dqc_core::spectra::stats::SpacingOptions,
    ginibre: Option<&EmpiricalCdf>,
    out: &mut Output,
) -> CliResult<()> {
    let k1t = tag(params.k1);
    let phi = build_ghs_map(params)?;
    let dec = parity_sectors(params)?;
    let spectra = dec.sector_spectra(phi.mat())?;
    let (mut values, mut labels) = (Vec::new(), Vec::new());
    for (label, ev) in dec.labels.iter().zip(&spectra) {
        values.extend_from_slice(ev);
        labels.extend(std::iter::repeat(label.clone()).take(ev.len()));
    }
    out.spectrum(&format!("spectrum_k1_{k1t}.csv"), json!({ "params": params, "sectors": "parity" }), values, Some(labels))?;
    if params.k1 == 0.0 {
        let even = dec.labels.iter().position(|l| l == "even").expect("parity sectors are labelled");
        let analytic = parity_union_eigenvalues(params, true)?;
        let d = matching::hausdorff(&spectra[even], &analytic);
        let ok = d < CLOSED_FORM_TOL && spectra[even].len() == analytic.len();
        out.check(
            &format!("closed_form_k1_{k1t}"),
            CheckKind::Invariant,
            ok,
            format!("even block vs fixed-q union: Hausdorff {d:.2e} over {} eigenvalues", analytic.len()),
        );
    }
    if !s.statistics {
        return Ok(());
    }
    let mut pooled = Vec::new();
    for even in [true, false] {
        let stats = sector_spacing_statistics(params, &SectorChoice::Parity { even }, k0_grid, opts)?;
        for st in stats {
            let cdf = st.cdf();
            write_is(out, &format!("is_k1_{k1t}_{}.csv", st.label), &st.label, &cdf, s.s_max, s.curve_points)?;
            pooled.extend(st.spacings);
        }
    }
    let cdf = EmpiricalCdf::new(pooled);
    write_is(out, &format!("is_k1_{k1t}.csv"), "pooled", &cdf, s.s_max, s.curve_points)?;
    record_ks(out, &format!("k1_{k1t}"), &cdf, ginibre);
    Ok(())
}

fn fixed_q(
    s: &GhsSection,
    params: &GhsParams,
    k0_grid: &[f64],
    opts: &dqc_core::spectra::stats::SpacingOptions,
    ginibre: Option<&EmpiricalCdf>,
    out: &mut Output,
) -> CliResult<()> {
    // closed form against the numerical sector block at the base k0
    let phi = build_ghs_map(params)?;
    for &q in &s.q {
        let closed = fixed_q_eigenvalues(params, q)?;
        let block = sector_block(&phi, &q_sector_indices(params, q)?);
        let numeric = eigen::eigenvalues(block.as_ref())?;
        let d = matching::hausdorff(&numeric, &closed.values);
        out.check(
            &format!("closed_form_q_{q}"),
            CheckKind::Invariant,
            d < CLOSED_FORM_TOL,
            format!("sector q={q}: Hausdorff {d:.2e} over {} eigenvalues", numeric.len()),
        );
        out.spectrum(
            &format!("spectrum_q_{q}.csv"),
            json!({ "params": params, "sectors": "fixed-q", "q": q }),
            closed.values,
            closed.labels,
        )?;
    }
    if !s.statistics {
        return Ok(());
    }
    for st in sector_spacing_statistics(params, &SectorChoice::FixedQ(s.q.clone()), k0_grid, opts)? {
        if st.real_only {
            continue;
        }
        let cdf = st.cdf();
        let label = st.label.replace('=', "_");
        write_is(out, &format!("is_{label}.csv"), &st.label, &cdf, s.s_max, s.curve_points)?;
        record_ks(out, &label, &cdf, ginibre);
    }
    Ok(())
}

