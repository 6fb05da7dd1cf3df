//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use dqc_core::c64;
use dqc_core::linalg::{self, CMat};

/// Trace distance `½‖a − b‖₁` of two Hermitian matrices.
pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    let d = a - b;
    let ev = linalg::eigvalsh(linalg::hermitize(d.as_ref()).as_ref()).unwrap();
    0.5 * ev.iter().map(|x| x.abs()).sum::<f64>()
}

/// Driven Kerr master equation in the Fock basis, integrated with dense classical RK4 on `ρ`.
pub struct KerrMasterEquation {
    pub chi: f64,
    pub gamma: f64,
    pub n: usize,
}

impl KerrMasterEquation {
    fn hamiltonian(&self, f: f64) -> CMat {
        let mut h = linalg::zeros(self.n, self.n);
        for k in 0..self.n {
            h[(k, k)] = c64::new(0.5 * self.chi * (k as f64) * (k as f64 - 1.0), 0.0);
            if k + 1 < self.n {
                // iF(a† − a): ⟨k+1|a†|k⟩ = √(k+1)
                let s = ((k + 1) as f64).sqrt();
                h[(k + 1, k)] = c64::new(0.0, f * s);
                h[(k, k + 1)] = c64::new(0.0, -f * s);
            }
        }
        h
    }

    fn lowering(&self) -> CMat {
        let mut a = linalg::zeros(self.n, self.n);
        for k in 1..self.n {
            a[(k - 1, k)] = c64::new((k as f64).sqrt(), 0.0);
        }
        a
    }

    fn rhs(&self, h: &CMat, a: &CMat, rho: &CMat) -> CMat {
        let i = c64::new(0.0, 1.0);
        let ad = linalg::dagger(a.as_ref());
        let nn = &ad * a;
        let comm = h * rho - rho * h;
        let jump = a * rho * &ad;
        let anti = &nn * rho + rho * &nn;
        let mut out = linalg::scale(comm.as_ref(), -i);
        out += linalg::scale(jump.as_ref(), c64::new(self.gamma, 0.0));
        out -= linalg::scale(anti.as_ref(), c64::new(0.5 * self.gamma, 0.0));
        out
    }

    /// Evolves `ρ` over `steps` steps of length `dt`, with drive `drive(k)` on step `k`.
    pub fn evolve(&self, rho0: &CMat, dt: f64, steps: u64, drive: impl Fn(u64) -> f64) -> CMat {
        let a = self.lowering();
        let mut rho = rho0.clone();
        for k in 0..steps {
            let h = self.hamiltonian(drive(k));
            let k1 = self.rhs(&h, &a, &rho);
            let k2 = self.rhs(&h, &a, &(&rho + linalg::scale(k1.as_ref(), c64::new(0.5 * dt, 0.0))));
            let k3 = self.rhs(&h, &a, &(&rho + linalg::scale(k2.as_ref(), c64::new(0.5 * dt, 0.0))));
            let k4 = self.rhs(&h, &a, &(&rho + linalg::scale(k3.as_ref(), c64::new(dt, 0.0))));
            let sum = k1 + linalg::scale(k2.as_ref(), c64::new(2.0, 0.0)) + linalg::scale(k3.as_ref(), c64::new(2.0, 0.0)) + k4;
            rho += linalg::scale(sum.as_ref(), c64::new(dt / 6.0, 0.0));
        }
        rho
    }

    pub fn vacuum(&self) -> CMat {
        let mut rho = linalg::zeros(self.n, self.n);
        rho[(0, 0)] = c64::new(1.0, 0.0);
        rho
    }
}

use dqc_core::ensembles::RandomLindbladian;
use dqc_core::opcore::{
    dissipator_from_cp_map, dissipator_from_jumps, dissipator_from_kossakowski, hamiltonian_superop,
    kossakowski_to_jumps, kraus_of_choi, map_of_choi, choi_of_map, sandwich, KrausSet, Superoperator,
};

/// Largest entrywise gap between the sampled generator and the jump-form and CP-map-form
/// reconstructions, relative to the generator scale.
pub fn lindbladian_path_gap(rl: &RandomLindbladian, alpha: f64) -> f64 {
    let n = rl.generator.dim();
    let jumps = kossakowski_to_jumps(&rl.kossakowski, &rl.basis).unwrap();
    let mut psi = linalg::zeros(n * n, n * n);
    for l in &jumps {
        psi += sandwich(l.mat(), linalg::dagger(l.mat()).as_ref());
    }
    let psi = Superoperator::from_mat(psi).unwrap();
    let mut routes = vec![
        dissipator_from_jumps(n, &jumps).unwrap(),
        dissipator_from_kossakowski(&rl.kossakowski, &rl.basis).unwrap(),
        dissipator_from_cp_map(&psi).unwrap(),
    ];
    if let Some(h) = &rl.hamiltonian {
        let lh = hamiltonian_superop(h).unwrap().scaled(alpha);
        routes = routes.into_iter().map(|r| r.add(&lh).unwrap()).collect();
    }
    let scale = linalg::max_abs(rl.generator.mat()).max(1.0);
    routes.iter().map(|r| linalg::max_abs_diff(r.mat(), rl.generator.mat())).fold(0.0, f64::max) / scale
}

/// Largest gap between the Kraus superoperator and its Choi and Choi-to-Kraus round trips.
pub fn map_path_gap(ks: &KrausSet) -> f64 {
    let phi = ks.superoperator();
    let choi = choi_of_map(&phi);
    let back = map_of_choi(choi.as_ref()).unwrap();
    let again = kraus_of_choi(choi.as_ref(), 1e-12).unwrap().superoperator();
    let scale = linalg::max_abs(phi.mat()).max(1.0);
    linalg::max_abs_diff(back.mat(), phi.mat()).max(linalg::max_abs_diff(again.mat(), phi.mat())) / scale
}
