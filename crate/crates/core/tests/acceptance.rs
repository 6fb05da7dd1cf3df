//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit when any fails.
//!
//! Pass criterion names as arguments to run a subset. Runtime budgets are enforced only on
//! machines with at least four cores; elsewhere the elapsed time is reported.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use dqc_core::c64;
use dqc_core::ensembles::*;
use dqc_core::ghs::*;
use dqc_core::kerr::*;
use dqc_core::linalg;
use dqc_core::opcore::{validate, BasisKind, DynamicsKind};
use dqc_core::spectra::analytic::*;
use dqc_core::spectra::form_factors::trace_of_power;
use dqc_core::spectra::stats::*;
use dqc_core::spectra::{eigen, ginibre_reference, matching};
use rand::Rng;

type Outcome = Result<(bool, String), String>;

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn ghs_analytic() -> Outcome {
    let params = GhsParams::new(20, 2.0, 10.0, 0.0, 0.1);
    let phi = build_ghs_map(&params).map_err(err)?;
    let dec = parity_sectors(&params).map_err(err)?;
    let blocks = dec.blocks(phi.mat());
    let even = dec.labels.iter().position(|l| l == "even").ok_or("no even sector")?;
    let numeric = eigen::eigenvalues(blocks[even].as_ref()).map_err(err)?;
    let analytic = parity_union_eigenvalues(&params, true).map_err(err)?;
    let d = matching::hausdorff(&numeric, &analytic);
    Ok((d < 1e-12 && numeric.len() == analytic.len(), format!("Hausdorff {d:.2e} over {} eigenvalues", numeric.len())))
}

fn lemon_support() -> Outcome {
    let n = 60;
    let spec = LindbladianSpec::purely_dissipative(n);
    let (mut inside, mut total) = (0usize, 0usize);
    for k in 0..20 {
        let mut rng = rng_for(2024, k);
        let rl = sample_random_lindbladian(&spec, &mut rng).map_err(err)?;
        let mut ev = eigen::superop_eigenvalues(&rl.generator).map_err(err)?;
        let stationary = (0..ev.len()).min_by(|&a, &b| ev[a].norm().total_cmp(&ev[b].norm())).unwrap();
        ev.swap_remove(stationary);
        for z in ev {
            let scaled = LemonScaling::Dimension(n).apply(&[z])[0];
            total += 1;
            if inside_lemon(scaled, 1.05) {
                inside += 1;
            }
        }
    }
    let frac = inside as f64 / total as f64;
    Ok((frac >= 0.98, format!("{:.4} of {total} rescaled eigenvalues inside the dilated boundary", frac)))
}

fn rho_delta_checks() -> Outcome {
    let norm = integrate(rho_delta, -4.0, 0.0, 1e-12) + integrate(rho_delta, 0.0, 4.0, 1e-12);
    let at0 = rho_delta(0.0);
    let expected0 = 8.0 / (3.0 * PI * PI);
    let mut diffs = Vec::new();
    for k in 0..10 {
        let mut rng = rng_for(7, k);
        let h = sample_gaussian_hermitian(EnsembleKind::Gue, 400, HamiltonianNorm::PerDimension, &mut rng).map_err(err)?;
        let e = linalg::eigvalsh(h.mat()).map_err(err)?;
        for (i, a) in e.iter().enumerate() {
            for (j, b) in e.iter().enumerate() {
                if i != j {
                    diffs.push(a - b);
                }
            }
        }
    }
    let ks = EmpiricalCdf::new(diffs).ks_to(rho_delta_cdf);
    let ok = (norm - 1.0).abs() <= 1e-6 && (at0 - expected0).abs() <= 1e-8 && ks < 0.03;
    Ok((ok, format!("norm {norm:.9}, ρ(0) − 8/(3π²) = {:.1e}, KS {ks:.4}", at0 - expected0)))
}

fn edge_means(ev: &[c64]) -> (f64, f64) {
    let mut moduli: Vec<f64> = ev.iter().map(|z| z.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    // the stationary eigenvalue 1 is the largest modulus
    moduli.pop();
    let inner = moduli[..10].iter().sum::<f64>() / 10.0;
    let outer = moduli[moduli.len() - 10..].iter().sum::<f64>() / 10.0;
    (inner, outer)
}

fn diluted_radii_check() -> Outcome {
    let (n, d) = (50, 4);
    let mut ok = true;
    let mut lines = Vec::new();
    let spectrum_at = |p: f64, stream: u64| -> Result<(f64, f64), String> {
        let mut rng = rng_for(55, stream);
        let ks = sample_diluted_unitary(n, d, p, &mut rng).map_err(err)?;
        let ev = eigen::superop_eigenvalues(&ks.superoperator()).map_err(err)?;
        Ok(edge_means(&ev))
    };
    for (k, &p) in [0.1, 0.3, 0.5, 0.8].iter().enumerate() {
        let th = diluted_radii(p, d);
        let (inner, outer) = spectrum_at(p, k as u64)?;
        let outer_ok = (outer - th.r_plus).abs() <= 0.1 * th.r_plus;
        let inner_ok = if th.disk { inner <= 0.1 * th.r_plus } else { (inner - th.r_minus).abs() <= 0.1 * th.r_minus };
        ok &= outer_ok && inner_ok;
        lines.push(format!("p={p}: R+ {outer:.3}/{:.3} R- {inner:.3}/{:.3}", th.r_plus, th.r_minus));
    }
    // crossover: last ring and first disk on a finer grid, judged by the emptied hole
    let grid: Vec<f64> = (0..=8).map(|k| 0.45 + 0.05 * k as f64).collect();
    let mut last_ring = None;
    let mut first_disk = None;
    for (k, &p) in grid.iter().enumerate() {
        let (inner, outer) = spectrum_at(p, 100 + k as u64)?;
        if inner > 0.2 * outer {
            last_ring = Some(p);
        } else if first_disk.is_none() {
            first_disk = Some(p);
        }
    }
    let pc = ring_disk_pc(d);
    let bracket_ok = match (last_ring, first_disk) {
        (Some(a), Some(b)) => a <= pc + 0.1 && b >= pc - 0.1 && a < b,
        _ => false,
    };
    ok &= bracket_ok;
    lines.push(format!("crossover bracket ({last_ring:?}, {first_disk:?}) vs p_c {pc:.3}"));
    Ok((ok, lines.join("; ")))
}

fn csr_references() -> Outcome {
    let mut rng = rng_for(9, 0);
    let pts = sample_poisson_disk(100_000, &mut rng);
    let (_, poisson) = complex_spacing_ratios(&pts).map_err(err)?;
    let mut samples = Vec::new();
    for k in 0..10 {
        let mut rng = rng_for(10, k);
        let g = sample_ginibre(Field::Complex, 300, 300, 1.0 / 300.0, &mut rng);
        let ev = eigen::eigenvalues(g.as_ref()).map_err(err)?;
        samples.extend(complex_spacing_ratios(&ev).map_err(err)?.0);
    }
    let gin = summarize_csr(&samples, 0);
    let depletion = csr_density_ratio(&samples, 0.1);
    let ok = (poisson.mean_r - 2.0 / 3.0).abs() <= 0.01
        && poisson.mean_cos.abs() <= 0.01
        && gin.mean_cos < -0.1
        && depletion < 0.2;
    Ok((
        ok,
        format!(
            "Poisson ⟨r⟩ {:.4} ⟨cos θ⟩ {:+.4}; GinUE ⟨cos θ⟩ {:+.4}, density ratio at |z|<0.1 {depletion:.3}",
            poisson.mean_r, poisson.mean_cos, gin.mean_cos
        ),
    ))
}

fn validity_suite() -> Outcome {
    let mut failures = Vec::new();
    let mut worst_path = 0.0f64;
    for k in 0..1000u64 {
        let mut rng = rng_for(31, k);
        let n = 2 + (k % 7) as usize;
        let (op, kind, gap) = match k % 4 {
            0 | 1 => {
                let basis = if k % 4 == 0 { BasisKind::MatrixUnits } else { BasisKind::SuN { include_identity: false } };
                let d = if k % 4 == 0 { n * n } else { n * n - 1 };
                let rank = 1 + rng.random_range(0..d);
                let alpha = if k % 3 == 0 { 0.0 } else { rng.random_range(0.1..5.0) };
                let spec = LindbladianSpec {
                    n,
                    rank: Some(rank),
                    alpha,
                    basis,
                    hamiltonian_norm: HamiltonianNorm::InverseDimension,
                };
                let rl = sample_random_lindbladian(&spec, &mut rng).map_err(err)?;
                let gap = common::lindbladian_path_gap(&rl, alpha);
                (rl.generator, DynamicsKind::Lindbladian, gap)
            }
            2 => {
                let rank = 1 + rng.random_range(0..n * n);
                let route = if k % 8 == 2 { CptpRoute::Stinespring } else { CptpRoute::Choi };
                let ks = sample_random_cptp(n, rank, route, &mut rng).map_err(err)?;
                (ks.superoperator(), DynamicsKind::Map, common::map_path_gap(&ks))
            }
            _ => {
                let ks = if k % 8 == 3 {
                    sample_diluted_unitary(n, 1 + (k as usize % 4), rng.random(), &mut rng).map_err(err)?
                } else {
                    sample_rpqc(n, 1 + (k as usize % 3), rng.random_range(0.1..2.0), rng.random(), &mut rng).map_err(err)?
                };
                (ks.superoperator(), DynamicsKind::Map, common::map_path_gap(&ks))
            }
        };
        worst_path = worst_path.max(gap);
        let report = validate(&op, kind).map_err(err)?;
        if !report.passed || gap > 1e-10 {
            failures.push(format!("#{k} (N={n}, {kind:?}, path gap {gap:.1e})"));
        }
    }
    let detail = format!("{} of 1000 failed; worst path gap {worst_path:.1e} {}", failures.len(), failures.iter().take(3).cloned().collect::<Vec<_>>().join(" "));
    Ok((failures.is_empty(), detail))
}

fn dff_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..50u64 {
        let mut rng = rng_for(41, k);
        let n = 2 + (k % 15) as usize;
        let rank = 1 + rng.random_range(0..n.min(6));
        let phi = sample_random_cptp(n, rank, CptpRoute::Stinespring, &mut rng).map_err(err)?.superoperator();
        let ev = eigen::superop_eigenvalues(&phi).map_err(err)?;
        for t in 1..=20u32 {
            let sum: c64 = ev.iter().map(|z| z.powu(t)).sum();
            let tr = trace_of_power(phi.mat(), t);
            worst = worst.max((sum - tr).norm());
        }
    }
    Ok((worst <= 1e-8, format!("max |Σλ^t − Tr Φ^t| = {worst:.2e}")))
}

fn kerr_engine() -> Outcome {
    let cavity = KerrParams::new(0.0, 0.5, 8.0, 0.5, 30, 11);
    let rho = ensemble_density(&cavity, cavity.period, 500).map_err(err)?;
    let me = common::KerrMasterEquation { chi: 0.0, gamma: cavity.gamma, n: cavity.n_max };
    let exact = me.evolve(&me.vacuum(), cavity.step() / 4.0, 4 * cavity.steps_for(cavity.period), |k| cavity.drive_at_step(k / 4));
    let td = common::trace_distance(&rho, &exact);

    let constant = KerrParams { dt: 0.01, drive: DriveShape::Constant, ..cavity };
    let (rec, _) = unravel_trajectory(&constant, 5000.0, 0).map_err(err)?;
    let ratio = waiting_stats_from_gaps(&rec.waiting_times(50.0)).map_err(err)?.ratio;

    let mut rng = rng_for(5, 0);
    let samples = sample_truncated_power_law(1.5, 50.0, 0.1, 100_000, &mut rng);
    let hist = Histogram::new(&samples, WAITING_BINS, true).map_err(err)?;
    let fit = fit_truncated_power_law(&hist, &FitOptions::default()).map_err(err)?;

    let ok = td < 0.02 && (ratio - 1.0).abs() <= 0.03 && fit.accepted && (fit.alpha - 1.5).abs() <= 0.1;
    Ok((ok, format!("trace distance {td:.4}, click ratio {ratio:.4}, fitted α {:.3} (R² {:.3})", fit.alpha, fit.r2)))
}

fn ghs_statistics() -> Outcome {
    let opts = SpacingOptions { edge_filter: EdgeFilter::FIGURE, ..SpacingOptions::default() };
    let k0_grid: Vec<f64> = (0..20).map(|k| 10.0 + 2.0 * k as f64 / 19.0).collect();
    let pooled = |k1: f64| -> Result<EmpiricalCdf, String> {
        let base = GhsParams::new(20, 2.0, 10.0, k1, 0.1);
        let mut all = Vec::new();
        for even in [true, false] {
            let stats = sector_spacing_statistics(&base, &SectorChoice::Parity { even }, &k0_grid, &opts).map_err(err)?;
            all.extend(stats.into_iter().flat_map(|s| s.spacings));
        }
        Ok(EmpiricalCdf::new(all))
    };
    let reference = ginibre_reference(20, 441, 77, &opts).map_err(err)?;
    let regular = pooled(0.0)?;
    let chaotic = pooled(8.0)?;
    let (rp, rg) = (regular.ks_to(poisson_reference_i), regular.ks_between(&reference));
    let (cp, cg) = (chaotic.ks_to(poisson_reference_i), chaotic.ks_between(&reference));
    let spectral_ok = rp < rg && cg < cp;
    let mut detail = format!("regular KS P {rp:.3} G {rg:.3}; k₁=8 KS P {cp:.3} G {cg:.3}");

    let (grid_ok, grid_detail) = kerr_sign_grid()?;
    detail.push_str("; ");
    detail.push_str(&grid_detail);
    Ok((spectral_ok && grid_ok, detail))
}

/// Mean-field exponents below this count as non-positive.
const MEANFIELD_ZERO: f64 = 1e-3;

fn kerr_sign_grid() -> Outcome {
    let base = KerrParams { dt: 0.01, ..KerrParams::new(0.5, 1.0, 4.0, 0.2, 40, 3) };
    let amplitudes: Vec<f64> = (1..=10).map(|k| 0.3 * k as f64).collect();
    let periods: Vec<f64> = (1..=10).map(|k| 4.0 * k as f64).collect();
    let cfg = SweepConfig { periods: 100.0, transient_periods: 10.0, lyapunov: LyapunovConfig::default(), fit: FitOptions::default() };
    let grid = kerr_grid(&KerrParams { dt: base.dt, ..base }, &amplitudes, &periods, &cfg).map_err(err)?;
    let mut agree = 0;
    let (mut mf_pos, mut q_pos) = (0, 0);
    for cell in &grid {
        let mf = cell.lambda_meanfield > MEANFIELD_ZERO;
        let q = cell.lambda_qle > 2.0 * cell.qle_err;
        mf_pos += mf as usize;
        q_pos += q as usize;
        agree += (mf == q) as usize;
    }
    let frac = agree as f64 / grid.len() as f64;
    let rho = spearman(
        &grid.iter().map(|c| c.lambda_meanfield).collect::<Vec<_>>(),
        &grid.iter().map(|c| c.lambda_qle).collect::<Vec<_>>(),
    );
    Ok((
        frac >= 0.7,
        format!("(A,T) sign agreement {agree}/100 (mean-field positive {mf_pos}, QLE positive {q_pos}, rank correlation {rho:.2})"),
    ))
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            r[k] = 0.5 * (i + j) as f64;
        }
        i = j + 1;
    }
    r
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn main() {
    let criteria = [
        Criterion { name: "ghs-analytic", budget: Duration::from_secs(30), run: ghs_analytic },
        Criterion { name: "lemon-support", budget: Duration::from_secs(300), run: lemon_support },
        Criterion { name: "rho-delta", budget: Duration::from_secs(60), run: rho_delta_checks },
        Criterion { name: "diluted-radii", budget: Duration::from_secs(300), run: diluted_radii_check },
        Criterion { name: "csr-references", budget: Duration::from_secs(180), run: csr_references },
        Criterion { name: "validity-suite", budget: Duration::from_secs(180), run: validity_suite },
        Criterion { name: "dff-oracle", budget: Duration::from_secs(60), run: dff_oracle },
        Criterion { name: "kerr-engine", budget: Duration::from_secs(600), run: kerr_engine },
        Criterion { name: "ghs-statistics", budget: Duration::from_secs(900), run: ghs_statistics },
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let enforce = cores >= 4;
    let mut failed = 0;
    for c in &criteria {
        if !filters.is_empty() && !filters.iter().any(|f| c.name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let over = elapsed > c.budget;
        let timing = if enforce {
            format!("{:.1}s of {}s", elapsed.as_secs_f64(), c.budget.as_secs())
        } else {
            format!("{:.1}s, budget {}s not enforced on {cores} core(s)", elapsed.as_secs_f64(), c.budget.as_secs())
        };
        let (passed, detail) = match outcome {
            Ok((ok, d)) => (ok && !(enforce && over), d),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += (!passed) as usize;
        println!("{} {}: {detail} [{timing}]", if passed { "PASS" } else { "FAIL" }, c.name);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
