use dqc_core::c64;
use dqc_core::ensembles::*;
use dqc_core::ghs::{build_ghs_map, GhsParams};
use dqc_core::linalg::{self, CMat};
use dqc_core::opcore::*;
use dqc_core::spectra::{eigen, matching};
use dqc_core::symmetry::*;
use proptest::prelude::*;

fn ginue(n: usize, seed: u64) -> CMat {
    sample_ginibre(Field::Complex, n, n, 1.0, &mut rng_for(seed, 0))
}

/// A unitary with the declared square: `W Wᵀ` (antiunitary, square +1) or a random reflection.
fn unitary_part(kind: SymmetryKind, n: usize, seed: u64) -> CMat {
    let w = sample_haar_unitary(n, &mut rng_for(seed, 1));
    if kind.is_antiunitary() {
        &w * linalg::transpose(w.as_ref())
    } else {
        let d = CMat::from_fn(n, n, |i, j| if i != j { linalg::ZERO } else if i % 2 == 0 { linalg::ONE } else { -linalg::ONE });
        &w * d * w.adjoint()
    }
}

const ALL: [SymmetryKind; 7] = [
    SymmetryKind::TPlus,
    SymmetryKind::TMinus,
    SymmetryKind::CPlus,
    SymmetryKind::CMinus,
    SymmetryKind::P,
    SymmetryKind::QPlus,
    SymmetryKind::QMinus,
];

#[test]
fn real_matrix_has_t_plus() {
    let g = sample_ginibre(Field::Real, 6, 6, 1.0, &mut rng_for(1, 0));
    let t = SymmetryOp::new(SymmetryKind::TPlus, linalg::identity(6), 1).unwrap();
    let r = check_symmetry(g.as_ref(), &t, SYMMETRY_TOL).unwrap();
    assert!(r.passed && r.residual == 0.0);
    assert!(check_symmetry(linalg::identity(3).as_ref(), &t, SYMMETRY_TOL).is_err());
}

#[test]
fn ghs_map_commutes_with_parity() {
    let p = GhsParams::new(8, 2.0, 10.0, 8.0, 0.2);
    let phi = build_ghs_map(&p).unwrap();
    let spin = spin_operators(8).unwrap();
    let rz = linalg::expm(linalg::scale(spin.jz.as_ref(), c64::new(0.0, -std::f64::consts::PI)).as_ref()).unwrap();
    let induced = linalg::kron(linalg::conj(rz.as_ref()).as_ref(), rz.as_ref());
    let parity = SymmetryOp::new(SymmetryKind::P, induced, 1).unwrap();
    let r = check_symmetry(phi.mat(), &parity, SYMMETRY_TOL).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn ginue_has_no_symmetry() {
    let m = ginue(20, 2);
    for (k, kind) in ALL.into_iter().enumerate() {
        let op = SymmetryOp::new(kind, unitary_part(kind, 20, 3 + k as u64), 1).unwrap();
        let r = check_symmetry(m.as_ref(), &op, SYMMETRY_TOL).unwrap();
        assert!(!r.passed && r.residual > 0.5, "{kind:?}: {}", r.residual);
    }
}

#[test]
fn invalid_symmetry_operators_are_rejected() {
    let nonunitary = linalg::scale(linalg::identity(3).as_ref(), c64::new(2.0, 0.0));
    assert!(SymmetryOp::new(SymmetryKind::P, nonunitary, 1).is_err());
    let (_, c) = c_minus_example(&ginue(4, 4), -1).unwrap();
    assert!(SymmetryOp::new(SymmetryKind::CMinus, c.unitary().clone(), 1).is_err());
    assert!(c_minus_example(&ginue(3, 4), -1).is_err());
}

#[test]
fn reflection_checks() {
    let imag: Vec<c64> = [1.0, -1.0, 2.5, -2.5, 0.0].iter().map(|&y| c64::new(0.0, y)).collect();
    for kind in [SymmetryKind::TPlus, SymmetryKind::TMinus] {
        assert!(spectrum_reflection_check(&imag, kind, REFLECTION_TOL).unwrap().passed);
    }
    let cloud = sample_poisson_disk(40, &mut rng_for(5, 0));
    for kind in [SymmetryKind::TPlus, SymmetryKind::TMinus, SymmetryKind::CMinus] {
        assert!(!spectrum_reflection_check(&cloud, kind, REFLECTION_TOL).unwrap().passed);
    }
    assert!(spectrum_reflection_check(&cloud, SymmetryKind::P, REFLECTION_TOL).is_err());
}

#[test]
fn c_minus_overlaps_carry_the_square() {
    for square in [1i8, -1] {
        let (m, op) = c_minus_example(&ginue(8, 6), square).unwrap();
        assert!(check_symmetry(m.as_ref(), &op, SYMMETRY_TOL).unwrap().passed);
        let ev = eigen::eigenvalues(m.as_ref()).unwrap();
        assert!(spectrum_reflection_check(&ev, SymmetryKind::CMinus, REFLECTION_TOL).unwrap().passed);
        let dec = eigen::eigen(m.as_ref()).unwrap();
        for (a, b, o) in paired_overlaps(&dec, |z| -z) {
            assert_ne!(a, b);
            assert!(o.im.abs() < 1e-8 * o.norm(), "overlap {o}");
            assert_eq!(o.re.signum(), square as f64, "square {square}: overlap {o}");
        }
    }
}

#[test]
fn overlap_matrix_examples() {
    let u = sample_haar_unitary(6, &mut rng_for(7, 0));
    let o = eigen::eigen(u.as_ref()).unwrap().overlaps();
    assert!(linalg::max_abs_diff(o.as_ref(), linalg::identity(6).as_ref()) < 1e-10);
    // upper triangular [[a, b], [0, c]]: O₁₁ = O₂₂ = 1 + |b|²/|a − c|², O₁₂ = −|b|²/|a − c|²
    let (a, b, c) = (c64::new(0.5, 0.2), c64::new(1.5, -0.7), c64::new(-0.3, 0.1));
    let m = CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => a,
        (0, 1) => b,
        (1, 1) => c,
        _ => linalg::ZERO,
    });
    let o = eigen::eigen(m.as_ref()).unwrap().overlaps();
    let x = b.norm_sqr() / (a - c).norm_sqr();
    for i in 0..2 {
        assert!((o[(i, i)] - c64::new(1.0 + x, 0.0)).norm() < 1e-10);
        assert!((o[(i, 1 - i)] - c64::new(-x, 0.0)).norm() < 1e-10);
    }
}

fn block_diag(n: usize, a: &CMat, b: &CMat) -> CMat {
    let h = a.nrows();
    CMat::from_fn(n, n, |i, j| match (i < h, j < h) {
        (true, true) => a[(i, j)],
        (false, false) => b[(i - h, j - h)],
        _ => linalg::ZERO,
    })
}

#[test]
fn sectors_of_a_constructed_lindbladian() {
    let n = 4;
    let u = block_diag(n, &linalg::identity(2), &linalg::scale(linalg::identity(2).as_ref(), -linalg::ONE));
    let mut rng = rng_for(8, 0);
    let h = {
        let a = sample_ginibre(Field::Complex, 2, 2, 1.0, &mut rng);
        let b = sample_ginibre(Field::Complex, 2, 2, 1.0, &mut rng);
        linalg::hermitize(block_diag(n, &a, &b).as_ref())
    };
    let even = block_diag(n, &sample_ginibre(Field::Complex, 2, 2, 1.0, &mut rng), &sample_ginibre(Field::Complex, 2, 2, 1.0, &mut rng));
    // an operator odd under U still leaves the dissipator invariant
    let g = sample_ginibre(Field::Complex, n, n, 1.0, &mut rng);
    let odd = linalg::scale((&g - &u * &g * &u).as_ref(), c64::new(0.5, 0.0));
    let jumps = [Operator::generic(even).unwrap(), Operator::generic(odd).unwrap()];
    let l = hamiltonian_superop(&Operator::new(h, Role::Hamiltonian).unwrap())
        .unwrap()
        .add(&dissipator_from_jumps(n, &jumps).unwrap())
        .unwrap();
    let dec = block_decompose(l.mat(), &u).unwrap();
    assert_eq!(dec.dims(), vec![8, 8]);
    assert!(dec.projector_residual() < 1e-10);
    let full = eigen::eigenvalues(l.mat()).unwrap();
    let union: Vec<c64> = dec.sector_spectra(l.mat()).unwrap().concat();
    assert!(matching::hausdorff(&full, &union) < 1e-7);
    assert!(matching::match_within(&full, &union, 1e-7).is_some());
    let single = block_decompose(l.mat(), &linalg::identity(n)).unwrap();
    assert_eq!(single.dims(), vec![16]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn residual_is_basis_independent(seed in any::<u64>(), k in 0usize..7) {
        let kind = ALL[k];
        let n = 4;
        let m = ginue(n, seed);
        let u = unitary_part(kind, n, seed ^ 0x5a5a);
        let v = sample_haar_unitary(n, &mut rng_for(seed, 9));
        // U ↦ V U Vᵀ for antiunitary kinds, V U V† otherwise
        let u2 = if kind.is_antiunitary() { &v * &u * linalg::transpose(v.as_ref()) } else { &v * &u * v.adjoint() };
        let m2 = &v * &m * v.adjoint();
        let r1 = check_symmetry(m.as_ref(), &SymmetryOp::new(kind, u, 1).unwrap(), SYMMETRY_TOL).unwrap().residual;
        let r2 = check_symmetry(m2.as_ref(), &SymmetryOp::new(kind, u2, 1).unwrap(), SYMMETRY_TOL).unwrap().residual;
        prop_assert!((r1 - r2).abs() < 1e-10 * r1.max(1.0));
    }

    #[test]
    fn hermiticity_preserving_spectra_are_conjugation_closed(seed in any::<u64>(), n in 2usize..5, map in any::<bool>()) {
        let ev = if map {
            let ks = sample_random_cptp(n, 2, CptpRoute::Stinespring, &mut rng_for(seed, 0)).unwrap();
            eigen::superop_eigenvalues(&ks.superoperator()).unwrap()
        } else {
            let spec = LindbladianSpec { alpha: 1.0, ..LindbladianSpec::purely_dissipative(n) };
            let l = sample_random_lindbladian(&spec, &mut rng_for(seed, 0)).unwrap();
            eigen::superop_eigenvalues(&l.generator).unwrap()
        };
        prop_assert!(spectrum_reflection_check(&ev, SymmetryKind::TPlus, REFLECTION_TOL).unwrap().passed);
    }
}
