use dqc_core::kerr::*;
use serde_json::json;

use super::linspace;
use crate::config::KerrSection;
use crate::error::CliResult;
use crate::output::{row, CheckKind, Output};

/// Fraction of cells on which the mean-field and quantum exponents must agree in sign.
const SIGN_AGREEMENT: f64 = 0.7;
/// Click records draw from streams above the sweep's.
const CLICK_STREAM: u64 = 1 << 40;

pub fn run(s: &KerrSection, seed: u64, out: &mut Output) -> CliResult<()> {
    let base = KerrParams {
        chi: s.chi,
        amplitude: s.amplitude_min,
        period: s.period_min,
        gamma: s.gamma,
        n_max: s.n_max,
        dt: s.dt,
        seed,
        drive: s.drive,
    };
    let lyapunov = LyapunovConfig { observable: s.observable, delta_max: s.delta_max, delta_0: s.delta_0, transient: 0.0, sampling: s.sampling };
    let fit = FitOptions { min_count: s.fit_min_count, start_widths: s.fit_start_widths, r2_threshold: s.fit_r2 };

    for (i, &[amplitude, period]) in s.click_points.iter().enumerate() {
        let p = KerrParams { amplitude, period, dt: s.dt.min(period / 100.0), ..base };
        let (record, _) = unravel_trajectory(&p, s.click_periods * period, CLICK_STREAM + i as u64)?;
        let extra = json!({ "params": p, "duration": record.duration, "truncation_warning": record.truncation_warning });
        let rows: Vec<Vec<String>> = record.times.iter().map(|&t| row(&[t])).collect();
        out.table(&format!("clicks_{i}.csv"), extra.clone(), &["t"], &rows)?;
        let gaps = record.waiting_times(s.transient_periods * period);
        match waiting_stats_from_gaps(&gaps) {
            Ok(w) => {
                let centers = w.histogram.centers(true);
                let rows: Vec<Vec<String>> = (0..centers.len())
                    .map(|k| row(&[centers[k], w.histogram.density[k], w.histogram.counts[k] as f64]))
                    .collect();
                out.table(&format!("waiting_histogram_{i}.csv"), extra, &["tau", "density", "count"], &rows)?;
                let f = fit_truncated_power_law(&w.histogram, &fit).ok();
                out.result(
                    &format!("waiting_{i}"),
                    json!({ "amplitude": amplitude, "period": period, "count": w.count, "mean": w.mean, "std": w.std, "ratio": w.ratio, "fit": f }),
                );
            }
            Err(e) => out.result(&format!("waiting_{i}"), json!({ "amplitude": amplitude, "period": period, "error": e.to_string() })),
        }
    }

    let amplitudes = linspace(s.amplitude_min, s.amplitude_max, s.amplitude_steps);
    let periods = linspace(s.period_min, s.period_max, s.period_steps);
    let cfg = SweepConfig { periods: s.duration_periods, transient_periods: s.transient_periods, lyapunov, fit };
    let grid = kerr_grid(&base, &amplitudes, &periods, &cfg)?;
    let rows: Vec<Vec<String>> = grid
        .iter()
        .map(|c| row(&[c.amplitude, c.period, c.lambda_meanfield, c.lambda_qle, c.qle_err, c.alpha_fit, c.reject as u8 as f64]))
        .collect();
    out.table(
        "lambda_map.csv",
        json!({ "base": base, "sweep": cfg }),
        &["A", "T", "lambda_meanfield", "lambda_qle", "qle_err", "alpha_fit", "reject"],
        &rows,
    )?;
    let agree = grid
        .iter()
        .filter(|c| (c.lambda_meanfield > s.meanfield_zero) == (c.lambda_qle > 2.0 * c.qle_err))
        .count();
    let frac = agree as f64 / grid.len().max(1) as f64;
    out.result("sign_agreement", json!({ "agree": agree, "cells": grid.len(), "fraction": frac }));
    out.check(
        "sign_agreement",
        CheckKind::Expectation,
        frac >= SIGN_AGREEMENT,
        format!("mean-field and QLE signs agree on {agree} of {} cells", grid.len()),
    );
    Ok(())
}
