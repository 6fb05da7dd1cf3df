//! Named parameter sets for the figure recipes, sized to finish on a laptop-class machine.

use crate::config::*;

#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub experiment: Experiment,
    pub description: &'static str,
    /// Expected wall time on a four-core laptop.
    pub budget: &'static str,
    build: fn() -> Params,
}

impl Preset {
    pub fn params(&self) -> Params {
        (self.build)()
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn fig2a() -> Params {
    Params::Ghs(GhsSection {
        two_s: 12,
        p: 2.0,
        k0: 10.0,
        k0_max: 10.0,
        k0_steps: 1,
        k1: vec![8.0],
        statistics: false,
        flow_gamma_max: 0.4,
        flow_gamma_step: 1e-4,
        ..GhsSection::default()
    })
}

fn fig2b() -> Params {
    Params::Ghs(GhsSection {
        two_s: 20,
        p: 2.0,
        gamma: 0.1,
        k0: 10.0,
        k0_max: 12.0,
        k0_steps: 100,
        k1: vec![0.0, 8.0],
        ..GhsSection::default()
    })
}

fn fig3() -> Params {
    Params::Lemon(LemonSection { n_single: 50, n_density: 30, density_realizations: 20, ..LemonSection::default() })
}

fn fig4() -> Params {
    Params::Csr(CsrSection::default())
}

fn fig5() -> Params {
    Params::Diluted(DilutedSection {
        n: 50,
        d: vec![4],
        p: linspace(0.05, 0.95, 19).into_iter().map(|p| (p * 100.0).round() / 100.0).collect(),
        ..DilutedSection::default()
    })
}

fn fig6() -> Params {
    Params::Kerr(KerrSection::default())
}

fn fig7() -> Params {
    Params::Ghs(GhsSection {
        two_s: 20,
        p: 2.0,
        gamma: 0.1,
        k0: 10.0,
        k0_max: 12.0,
        k0_steps: 100,
        k1: vec![0.0],
        sectors: SectorMode::FixedQ,
        q: vec![2, 6, 12],
        ..GhsSection::default()
    })
}

pub const PRESETS: [Preset; 8] = [
    Preset {
        name: "fig2a",
        experiment: Experiment::Ghs,
        description: "spin map S=6, p=2, k0=10, k1=8: even-sector eigenvalue flow for gamma in [0, 0.4], step 1e-4",
        budget: "10 min",
        build: fig2a,
    },
    Preset {
        name: "fig2b",
        experiment: Experiment::Ghs,
        description: "spin map S=10, gamma=0.1, p=2: pooled I(s) over 100 k0 values in [10, 12] for k1=0 and k1=8",
        budget: "15 min",
        build: fig2b,
    },
    Preset {
        name: "fig3",
        experiment: Experiment::Lemon,
        description: "random Lindbladians: one N=50 spectrum, N=30 densities and the random-matrix model against the lemon boundary",
        budget: "10 min",
        build: fig3,
    },
    Preset {
        name: "fig3a",
        experiment: Experiment::Lemon,
        description: "alias of fig3",
        budget: "10 min",
        build: fig3,
    },
    Preset {
        name: "fig4",
        experiment: Experiment::Csr,
        description: "complex spacing ratios: 2D Poisson, AI-dagger, GinUE and AII-dagger, N=300, 10 matrices",
        budget: "3 min",
        build: fig4,
    },
    Preset {
        name: "fig5",
        experiment: Experiment::Diluted,
        description: "diluted unitaries N=50, d=4: spectra and radii for p in [0.05, 0.95]",
        budget: "15 min",
        build: fig5,
    },
    Preset {
        name: "fig6",
        experiment: Experiment::Kerr,
        description: "driven Kerr cavity: 10x10 (A, T) grid of mean-field and quantum Lyapunov exponents with waiting-time fits",
        budget: "2 h",
        build: fig6,
    },
    Preset {
        name: "fig7",
        experiment: Experiment::Ghs,
        description: "spin map S=10, k1=0: fixed-q sector spectra and I(s) for q=2, 6, 12 over 100 k0 values in [10, 12]",
        budget: "1 min",
        build: fig7,
    },
];

pub fn find(name: &str) -> Option<Preset> {
    PRESETS.iter().copied().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for p in PRESETS {
            let layers = Layers { preset: Some(p), ..Layers::default() };
            let cfg = resolve(&layers).unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(cfg.experiment(), p.experiment);
        }
    }

    #[test]
    fn quoted_parameters() {
        let Params::Ghs(a) = find("fig2a").unwrap().params() else { panic!() };
        assert_eq!((a.two_s, a.p, a.k0, a.k1.as_slice(), a.flow_gamma_step), (12, 2.0, 10.0, &[8.0][..], 1e-4));
        let Params::Lemon(l) = find("fig3a").unwrap().params() else { panic!() };
        assert_eq!(l.n_single, 50);
        let Params::Ghs(g) = find("fig7").unwrap().params() else { panic!() };
        assert_eq!((g.two_s, g.k0, g.k0_max, g.k0_steps), (20, 10.0, 12.0, 100));
        let Params::Ghs(b) = find("fig2b").unwrap().params() else { panic!() };
        assert_eq!((b.two_s, b.gamma, b.k0_steps, b.k1.as_slice()), (20, 0.1, 100, &[0.0, 8.0][..]));
    }
}
