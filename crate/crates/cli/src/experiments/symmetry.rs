use dqc_core::c64;
use dqc_core::ensembles::*;
use dqc_core::ghs::{build_ghs_map, GhsParams};
use dqc_core::linalg;
use dqc_core::opcore::spin_operators;
use dqc_core::spectra::{eigen, matching};
use dqc_core::symmetry::*;
use serde_json::{json, Value};

use crate::config::{SymmetryModel, SymmetrySection};
use crate::error::CliResult;
use crate::output::{row, CheckKind, Output};

/// Agreement between the full spectrum and the union of sector spectra.
const SECTOR_TOL: f64 = 1e-7;

pub fn run(s: &SymmetrySection, seed: u64, out: &mut Output) -> CliResult<()> {
    let mut records: Vec<Value> = Vec::new();
    match s.model {
        SymmetryModel::Ghs => {
            let params = GhsParams::new(s.two_s, s.p, s.k0, s.k1, s.gamma);
            let phi = build_ghs_map(&params)?;
            let spin = spin_operators(s.two_s)?;
            // parity exp(−iπJz) and its induced action on vectorized operators
            let rz = linalg::expm(linalg::scale(spin.jz.as_ref(), c64::new(0.0, -std::f64::consts::PI)).as_ref())?;
            let induced = linalg::kron(linalg::conj(rz.as_ref()).as_ref(), rz.as_ref());
            let report = check_symmetry(phi.mat(), &SymmetryOp::new(SymmetryKind::P, induced, 1)?, s.tol)?;
            out.check("parity", CheckKind::Invariant, report.passed, format!("residual {:.2e}", report.residual));
            records.push(json!({ "check": "parity", "report": report }));
            let dec = block_decompose(phi.mat(), &rz)?;
            let spectra = dec.sector_spectra(phi.mat())?;
            let full = eigen::superop_eigenvalues(&phi)?;
            let union: Vec<c64> = spectra.concat();
            let d = matching::hausdorff(&full, &union);
            let residual = dec.projector_residual();
            out.check(
                "sector_union",
                CheckKind::Invariant,
                d < SECTOR_TOL && union.len() == full.len() && residual < SECTOR_TOL,
                format!("sectors {:?}: Hausdorff {d:.2e}, projector residual {residual:.2e}", dec.dims()),
            );
            records.push(json!({ "check": "sectors", "labels": dec.labels, "dims": dec.dims(), "phases": dec.phases, "hausdorff": d }));
            let mut labels = Vec::new();
            for (label, ev) in dec.labels.iter().zip(&spectra) {
                labels.extend(std::iter::repeat(label.clone()).take(ev.len()));
            }
            out.spectrum("sector_spectra.csv", json!({ "params": params }), union, Some(labels))?;
        }
        SymmetryModel::CMinus => {
            let a = sample_ginibre(Field::Complex, s.n, s.n, 1.0 / s.n as f64, &mut rng_for(seed, 0));
            let (m, op) = c_minus_example(&a, s.square)?;
            let report = check_symmetry(m.as_ref(), &op, s.tol)?;
            out.check("c_minus", CheckKind::Invariant, report.passed, format!("residual {:.2e}", report.residual));
            records.push(json!({ "check": "c_minus", "report": report }));
            let dec = eigen::eigen(m.as_ref())?;
            let refl = spectrum_reflection_check(&dec.values, SymmetryKind::CMinus, REFLECTION_TOL)?;
            out.check("c_minus_reflection", CheckKind::Invariant, refl.passed, refl.max_distance.map_or("no paired eigenvalues".into(), |d| format!("max distance {d:.2e}")));
            records.push(json!({ "check": "c_minus_reflection", "report": refl }));
            let pairs = paired_overlaps(&dec, |z| -z);
            let signed = pairs.iter().all(|(_, _, o)| o.im.abs() < 1e-8 * o.norm() && o.re.signum() == s.square as f64);
            out.check(
                "overlap_sign",
                CheckKind::Invariant,
                signed,
                format!("{} paired overlaps real with the sign of the square {}", pairs.len(), s.square),
            );
            let rows: Vec<Vec<String>> =
                pairs.iter().map(|&(a, b, o)| row(&[a as f64, b as f64, o.re, o.im])).collect();
            out.table("overlaps.csv", json!({ "model": "c-minus", "n": s.n, "square": s.square }), &["alpha", "beta", "re", "im"], &rows)?;
            out.spectrum("spectrum.csv", json!({ "model": "c-minus", "n": s.n, "square": s.square }), dec.values, None)?;
        }
        SymmetryModel::RandomLindblad => {
            let spec = LindbladianSpec { alpha: 1.0, ..LindbladianSpec::purely_dissipative(s.n) };
            let rl = sample_random_lindbladian(&spec, &mut rng_for(seed, 0))?;
            let ev = eigen::superop_eigenvalues(&rl.generator)?;
            let refl = spectrum_reflection_check(&ev, SymmetryKind::TPlus, REFLECTION_TOL)?;
            out.check("conjugation_closed", CheckKind::Invariant, refl.passed, refl.max_distance.map_or("no paired eigenvalues".into(), |d| format!("max distance {d:.2e}")));
            records.push(json!({ "check": "conjugation_closed", "report": refl }));
            out.spectrum("spectrum.csv", json!({ "spec": spec }), ev, None)?;
        }
    }
    out.json("symmetry.json", &Value::Array(records))
}
