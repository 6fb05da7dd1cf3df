mod common;

use dqc_core::c64;
use dqc_core::ensembles::*;
use dqc_core::linalg::{self, CMat};
use dqc_core::opcore::*;
use dqc_core::spectra::{eigen, matching};
use proptest::prelude::*;

fn random_mat(n: usize, seed: u64) -> CMat {
    let mut rng = rng_for(seed, 0);
    sample_ginibre(Field::Complex, n, n, 1.0, &mut rng)
}

fn sigma_minus() -> CMat {
    let mut s = linalg::zeros(2, 2);
    s[(0, 1)] = c64::new(1.0, 0.0);
    s
}

fn sorted(mut v: Vec<c64>) -> Vec<c64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

fn assert_spectrum(got: Vec<c64>, want: &[c64], tol: f64) {
    assert!(matching::match_within(&got, want, tol).is_some(), "{:?} vs {want:?}", sorted(got.clone()));
}

#[test]
fn identity_vectorizes_to_unit_diagonal() {
    let v = vectorize(linalg::identity(2).as_ref());
    assert_eq!(v, vec![c64::new(1.0, 0.0), c64::new(0.0, 0.0), c64::new(0.0, 0.0), c64::new(1.0, 0.0)]);
}

#[test]
fn diagonal_hamiltonian_superoperator_spectrum() {
    let mut h = linalg::zeros(2, 2);
    h[(1, 1)] = c64::new(1.0, 0.0);
    let l = hamiltonian_superop(&Operator::new(h, Role::Hamiltonian).unwrap()).unwrap();
    let want = [c64::new(0.0, 0.0), c64::new(0.0, 0.0), c64::new(0.0, -1.0), c64::new(0.0, 1.0)];
    assert_spectrum(eigen::eigenvalues(l.mat()).unwrap(), &want, 1e-12);
}

#[test]
fn gue_superoperator_spectrum_is_difference_set() {
    let mut rng = rng_for(1, 0);
    let h = sample_gaussian_hermitian(EnsembleKind::Gue, 6, HamiltonianNorm::PerDimension, &mut rng).unwrap();
    let e = linalg::eigvalsh(h.mat()).unwrap();
    let want: Vec<c64> = e.iter().flat_map(|a| e.iter().map(move |b| c64::new(0.0, -(a - b)))).collect();
    let got = eigen::eigenvalues(hamiltonian_superop(&h).unwrap().mat()).unwrap();
    assert_spectrum(got.clone(), &want, 1e-10);
    assert_eq!(got.iter().filter(|z| z.norm() < 1e-10).count(), 6);
}

#[test]
fn zero_jump_gives_zero_dissipator() {
    let l = Operator::new(linalg::zeros(3, 3), Role::Jump).unwrap();
    let d = dissipator_from_jumps(3, &[l]).unwrap();
    assert_eq!(linalg::max_abs(d.mat()), 0.0);
}

#[test]
fn decay_dissipator_spectrum() {
    let l = Operator::new(sigma_minus(), Role::Jump).unwrap();
    let d = dissipator_from_jumps(2, &[l]).unwrap();
    let want = [c64::new(0.0, 0.0), c64::new(-0.5, 0.0), c64::new(-0.5, 0.0), c64::new(-1.0, 0.0)];
    assert_spectrum(eigen::eigenvalues(d.mat()).unwrap(), &want, 1e-12);
}

#[test]
fn zero_kossakowski_gives_zero_dissipator() {
    let basis = HSBasis::new(BasisKind::SuN { include_identity: false }, 3);
    let k = KossakowskiMatrix::new(linalg::zeros(8, 8)).unwrap();
    let d = dissipator_from_kossakowski(&k, &basis).unwrap();
    assert_eq!(linalg::max_abs(d.mat()), 0.0);
    assert!(kossakowski_to_jumps(&k, &basis).unwrap().is_empty());
}

#[test]
fn rank_one_kossakowski_is_single_jump() {
    for kind in [BasisKind::MatrixUnits, BasisKind::SuN { include_identity: true }] {
        let basis = HSBasis::new(kind, 3);
        let m = 4;
        let mut k = linalg::zeros(9, 9);
        k[(m, m)] = c64::new(2.5, 0.0);
        let d = dissipator_from_kossakowski(&KossakowskiMatrix::new(k).unwrap(), &basis).unwrap();
        let l = linalg::scale(basis.elements()[m].mat(), c64::new(2.5f64.sqrt(), 0.0));
        let want = dissipator_from_jumps(3, &[Operator::new(l, Role::Jump).unwrap()]).unwrap();
        assert!(linalg::max_abs_diff(d.mat(), want.mat()) < 1e-12);
    }
}

#[test]
fn rank_three_paths_agree() {
    for (seed, kind) in [(3u64, BasisKind::MatrixUnits), (4, BasisKind::SuN { include_identity: false })] {
        let spec = LindbladianSpec { rank: Some(3), basis: kind, ..LindbladianSpec::purely_dissipative(4) };
        let rl = sample_random_lindbladian(&spec, &mut rng_for(seed, 0)).unwrap();
        assert!(common::lindbladian_path_gap(&rl, 0.0) < 1e-10);
        assert_eq!(kossakowski_to_jumps(&rl.kossakowski, &rl.basis).unwrap().len(), 3);
    }
}

#[test]
fn jumps_rebuild_kossakowski_matrix() {
    let basis = HSBasis::new(BasisKind::SuN { include_identity: false }, 4);
    let k = sample_kossakowski(basis.len(), 5, 4.0, &mut rng_for(5, 0)).unwrap();
    let jumps = kossakowski_to_jumps(&k, &basis).unwrap();
    assert_eq!(jumps.len(), 5);
    let d = basis.len();
    let mut rebuilt = linalg::zeros(d, d);
    for l in &jumps {
        // y_m = Tr(F_m† L)
        let y: Vec<c64> = basis.elements().iter().map(|f| linalg::trace((f.mat().adjoint() * l.mat()).as_ref())).collect();
        for a in 0..d {
            for b in 0..d {
                rebuilt[(a, b)] += y[a] * y[b].conj();
            }
        }
    }
    assert!(linalg::max_abs_diff(rebuilt.as_ref(), k.mat()) < 1e-10);
}

#[test]
fn trace_preserving_cp_map_gives_shifted_map() {
    let ks = sample_random_cptp(3, 4, CptpRoute::Stinespring, &mut rng_for(6, 0)).unwrap();
    let phi = ks.superoperator();
    let d = dissipator_from_cp_map(&phi).unwrap();
    let shifted = phi.add(&Superoperator::identity(3).scaled(-1.0)).unwrap();
    assert!(linalg::max_abs_diff(d.mat(), shifted.mat()) < 1e-12);
    let zero = dissipator_from_cp_map(&Superoperator::zeros(3)).unwrap();
    assert_eq!(linalg::max_abs(zero.mat()), 0.0);
}

#[test]
fn single_kraus_cp_map_matches_jump_form() {
    let l = random_mat(3, 7);
    let psi = Superoperator::from_mat(sandwich(l.as_ref(), linalg::dagger(l.as_ref()).as_ref())).unwrap();
    let a = dissipator_from_cp_map(&psi).unwrap();
    let b = dissipator_from_jumps(3, &[Operator::new(l, Role::Jump).unwrap()]).unwrap();
    assert!(linalg::max_abs_diff(a.mat(), b.mat()) < 1e-12);
}

#[test]
fn unitary_channel_spectrum_on_unit_circle() {
    let u = sample_haar_unitary(5, &mut rng_for(8, 0));
    let phi = cptp_from_kraus(&KrausSet::new(5, vec![u]).unwrap()).unwrap();
    for z in eigen::eigenvalues(phi.mat()).unwrap() {
        assert!((z.norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn exponential_of_zero_is_identity() {
    let e = superop_expm(&Superoperator::zeros(3)).unwrap();
    assert!(linalg::max_abs_diff(e.mat(), Superoperator::identity(3).mat()) < 1e-15);
}

#[test]
fn exponential_of_hamiltonian_part_is_conjugation() {
    let mut rng = rng_for(9, 0);
    let h = sample_gaussian_hermitian(EnsembleKind::Gue, 4, HamiltonianNorm::PerDimension, &mut rng).unwrap();
    let (vals, v) = linalg::eigh(h.mat()).unwrap();
    let mut vd = v.clone();
    for (j, &e) in vals.iter().enumerate() {
        for i in 0..4 {
            vd[(i, j)] *= c64::from_polar(1.0, -e);
        }
    }
    let u = &vd * v.adjoint();
    let want = sandwich(u.as_ref(), linalg::dagger(u.as_ref()).as_ref());
    let got = superop_expm(&hamiltonian_superop(&h).unwrap()).unwrap();
    assert!(linalg::max_abs_diff(got.mat(), want.as_ref()) < 1e-12);
}

#[test]
fn exponential_of_decay_matches_damping_channel() {
    let gamma: f64 = 0.7;
    let l = linalg::scale(sigma_minus().as_ref(), c64::new(gamma.sqrt(), 0.0));
    let e = superop_expm(&dissipator_from_jumps(2, &[Operator::new(l, Role::Jump).unwrap()]).unwrap()).unwrap();
    let rho = {
        let mut r = linalg::zeros(2, 2);
        r[(0, 0)] = c64::new(0.3, 0.0);
        r[(1, 1)] = c64::new(0.7, 0.0);
        r[(0, 1)] = c64::new(0.2, -0.1);
        r[(1, 0)] = c64::new(0.2, 0.1);
        r
    };
    let out = e.apply(rho.as_ref()).unwrap();
    let decay = (-gamma).exp();
    assert!((out[(1, 1)].re - 0.7 * decay).abs() < 1e-13);
    assert!((out[(0, 0)].re - (0.3 + 0.7 * (1.0 - decay))).abs() < 1e-13);
    assert!((out[(0, 1)] - c64::new(0.2, -0.1) * (-gamma / 2.0).exp()).norm() < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sandwich_matches_direct_product(seed in 0u64..10_000) {
        let (a, rho, b) = (random_mat(3, seed), random_mat(3, seed + 1), random_mat(3, seed + 2));
        let direct = vectorize((&a * &rho * &b).as_ref());
        let via = linalg::matvec(sandwich(a.as_ref(), b.as_ref()).as_ref(), &vectorize(rho.as_ref()));
        for (x, y) in direct.iter().zip(&via) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn devectorize_inverts_vectorize(seed in 0u64..10_000, n in 1usize..6) {
        let rho = linalg::hermitize(random_mat(n, seed).as_ref());
        let back = devectorize(&vectorize(rho.as_ref())).unwrap();
        prop_assert_eq!(linalg::max_abs_diff(back.as_ref(), rho.as_ref()), 0.0);
    }

    #[test]
    fn dissipator_annihilates_trace(seed in 0u64..10_000, n in 2usize..6, count in 1usize..4) {
        let jumps: Vec<Operator> = (0..count).map(|k| Operator::new(random_mat(n, seed * 7 + k as u64), Role::Jump).unwrap()).collect();
        let d = dissipator_from_jumps(n, &jumps).unwrap();
        let one = vectorize(linalg::identity(n).as_ref());
        let scale = linalg::max_abs(d.mat()).max(1.0);
        for c in 0..n * n {
            let s: c64 = (0..n * n).map(|r| one[r] * d.mat()[(r, c)]).sum();
            prop_assert!(s.norm() < 1e-12 * scale);
        }
    }

    #[test]
    fn construction_paths_agree(seed in 0u64..10_000, n in 2usize..=6, su in any::<bool>(), alpha in 0.0f64..3.0) {
        let basis = if su { BasisKind::SuN { include_identity: false } } else { BasisKind::MatrixUnits };
        let mut rng = rng_for(seed, 1);
        let d = if su { n * n - 1 } else { n * n };
        let rank = 1 + (seed as usize) % d;
        let spec = LindbladianSpec { n, rank: Some(rank), alpha, basis, hamiltonian_norm: HamiltonianNorm::InverseDimension };
        let rl = sample_random_lindbladian(&spec, &mut rng).unwrap();
        prop_assert!(common::lindbladian_path_gap(&rl, alpha) < 1e-10);
    }

    #[test]
    fn random_generators_and_maps_are_valid(seed in 0u64..10_000, n in 2usize..=6, rank in 1usize..8) {
        let mut rng = rng_for(seed, 2);
        let spec = LindbladianSpec { rank: Some(rank), alpha: 1.0, ..LindbladianSpec::purely_dissipative(n) };
        let rl = sample_random_lindbladian(&spec, &mut rng).unwrap();
        prop_assert!(validate(&rl.generator, DynamicsKind::Lindbladian).unwrap().passed);
        let ks = sample_random_cptp(n, rank.min(n * n), CptpRoute::Choi, &mut rng).unwrap();
        let report = validate(&ks.superoperator(), DynamicsKind::Map).unwrap();
        prop_assert!(report.passed);
        prop_assert!(report.fixed_point_distance < 1e-10);
        prop_assert!(common::map_path_gap(&ks) < 1e-10);
    }
}
