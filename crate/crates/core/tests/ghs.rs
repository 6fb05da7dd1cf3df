use std::time::Instant;

use dqc_core::c64;
use dqc_core::ghs::*;
use dqc_core::linalg;
use dqc_core::opcore::{validate, DynamicsKind};
use dqc_core::spectra::{eigen, matching};
use dqc_core::symmetry::block_decompose;

fn regular() -> GhsParams {
    GhsParams::new(20, 2.0, 10.0, 0.0, 0.1)
}

#[test]
fn even_sector_matches_closed_form_union() {
    let p = regular();
    let t = Instant::now();
    let phi = build_ghs_map(&p).unwrap();
    let sectors = parity_sectors(&p).unwrap();
    let even = &sectors.blocks(phi.mat())[0];
    let numeric = eigen::eigenvalues(even.as_ref()).unwrap();
    let analytic = parity_union_eigenvalues(&p, true).unwrap();
    assert_eq!(numeric.len(), analytic.len());
    let d = matching::hausdorff(&numeric, &analytic);
    eprintln!("hausdorff {d:e} in {:?}", t.elapsed());
    assert!(d < 1e-12, "{d:e}");
}

#[test]
fn fixed_q_blocks_are_triangular_with_closed_form_diagonal() {
    let p = regular();
    let phi = build_ghs_map(&p).unwrap();
    for q in [-3i64, 0, 2, 6, 12] {
        let idx = q_sector_indices(&p, q).unwrap();
        let block = sector_block(&phi, &idx);
        let mut upper = 0.0f64;
        for j in 0..block.ncols() {
            for i in 0..j {
                upper = upper.max(block[(i, j)].norm());
            }
        }
        assert!(upper < 1e-10, "q={q}: {upper:e}");
        let ev = fixed_q_eigenvalues(&p, q).unwrap().values;
        for (k, z) in ev.iter().enumerate() {
            assert!((block[(k, k)] - z).norm() < 1e-12, "q={q} k={k}");
        }
    }
}

#[test]
fn q_zero_radii_independent_of_k0() {
    let a = fixed_q_eigenvalues(&regular(), 0).unwrap().values;
    let b = fixed_q_eigenvalues(&GhsParams { k0: 11.3, ..regular() }, 0).unwrap().values;
    assert_eq!(a, b);
    let c = fixed_q_eigenvalues(&GhsParams { k0: 11.3, ..regular() }, 4).unwrap().values;
    let d = fixed_q_eigenvalues(&regular(), 4).unwrap().values;
    for (x, y) in c.iter().zip(&d) {
        assert!((x.norm() - y.norm()).abs() < 1e-15);
    }
}

#[test]
fn pair_distance_matches_subtraction() {
    let p = GhsParams { k0: 10.7, ..regular() };
    for q in [1i64, 5, -7] {
        let spec = fixed_q_eigenvalues(&p, q).unwrap();
        let s = p.s();
        let hi = s.min(s + q as f64);
        for a in 0..spec.values.len() {
            for b in 0..spec.values.len() {
                let (m, m2) = (hi - a as f64, hi - b as f64);
                let direct = (spec.values[a] - spec.values[b]).norm();
                assert!((pair_distance(m, m2, q, &p) - direct).abs() < 1e-12);
            }
        }
        assert_eq!(pair_distance(hi, hi, q, &p), 0.0);
    }
}

#[test]
fn unitary_limit_lies_on_unit_circle() {
    let p = GhsParams::new(6, 2.0, 10.0, 0.0, 0.0);
    let ev = eigen::eigenvalues(build_ghs_map(&p).unwrap().mat()).unwrap();
    assert!(ev.iter().all(|z| (z.norm() - 1.0).abs() < 1e-10));
}

#[test]
fn chaotic_map_is_cptp_and_parity_symmetric() {
    let p = GhsParams::new(8, 2.0, 10.0, 8.0, 0.2);
    let phi = build_ghs_map(&p).unwrap();
    let report = validate(&phi, DynamicsKind::Map).unwrap();
    assert!(report.passed, "{report:?}");
    let spin = dqc_core::opcore::spin_operators(8).unwrap();
    let rz = linalg::expm(linalg::scale(spin.jz.as_ref(), c64::new(0.0, -std::f64::consts::PI)).as_ref()).unwrap();
    let dec = block_decompose(phi.mat(), &rz).unwrap();
    assert_eq!(dec.dims(), vec![41, 40]);
    let full = eigen::eigenvalues(phi.mat()).unwrap();
    let union: Vec<c64> = dec.sector_spectra(phi.mat()).unwrap().concat();
    assert!(matching::hausdorff(&full, &union) < 1e-7);
}

#[test]
fn weak_jz_symmetry_gives_fixed_q_sector_dims() {
    let p = GhsParams::new(6, 2.0, 10.0, 0.0, 0.1);
    let phi = build_ghs_map(&p).unwrap();
    let spin = dqc_core::opcore::spin_operators(6).unwrap();
    let u = linalg::expm(linalg::scale(spin.jz.as_ref(), c64::new(0.0, -0.1)).as_ref()).unwrap();
    let dec = block_decompose(phi.mat(), &u).unwrap();
    let mut dims = dec.dims();
    dims.sort_unstable();
    let mut want: Vec<usize> = (-6i64..=6).map(|q| 7 - q.unsigned_abs() as usize).collect();
    want.sort_unstable();
    assert_eq!(dims, want);
    assert!(dec.projector_residual() < 1e-10);
}

#[test]
fn chaotic_breaks_weak_symmetry() {
    let p = GhsParams::new(6, 2.0, 10.0, 8.0, 0.1);
    let phi = build_ghs_map(&p).unwrap();
    let spin = dqc_core::opcore::spin_operators(6).unwrap();
    let u = linalg::expm(linalg::scale(spin.jz.as_ref(), c64::new(0.0, -0.1)).as_ref()).unwrap();
    assert!(block_decompose(phi.mat(), &u).is_err());
}

#[test]
fn flow_is_continuous_and_clusters() {
    let base = GhsParams::new(6, 2.0, 10.0, 8.0, 0.0);
    let gammas: Vec<f64> = (0..=400).map(|k| k as f64 * 1e-3).collect();
    let flow = eigenvalue_flow(&base, &gammas, true).unwrap();
    assert!(flow.iter().all(|t| (t[0].norm() - 1.0).abs() < 1e-10));
    let mut steps: Vec<f64> = flow.iter().flat_map(|t| t.windows(2).map(|w| (w[1] - w[0]).norm())).collect();
    steps.sort_by(f64::total_cmp);
    let median = steps[steps.len() / 2];
    let max = *steps.last().unwrap();
    assert!(max < 10.0 * median, "median {median:e} max {max:e}");
    // collisions: complex pairs meet on the real axis, so the count of real eigenvalues changes
    let real_count = |g: usize| flow.iter().filter(|t| t[g].im.abs() < 1e-9).count();
    let counts: Vec<usize> = (0..gammas.len()).map(real_count).collect();
    assert!(counts.windows(2).any(|w| w[0] != w[1]), "no collisions");
    // the non-stationary eigenvalues end in a cloud centred on the origin
    let end: Vec<c64> = flow.iter().map(|t| *t.last().unwrap()).filter(|z| (z - 1.0).norm() > 1e-9).collect();
    let mut radii: Vec<f64> = end.iter().map(|z| z.norm()).collect();
    radii.sort_by(f64::total_cmp);
    let centroid = end.iter().sum::<c64>() / end.len() as f64;
    assert!(radii[radii.len() / 2] < 0.4, "median modulus {}", radii[radii.len() / 2]);
    assert!(centroid.norm() < 0.1, "centroid {centroid}");
}
