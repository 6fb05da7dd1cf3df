//! Statistics of any spectrum file, computed with the same routines as the experiments.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use dqc_core::c64;
use dqc_core::io;
use dqc_core::spectra::stats::{complex_spacing_ratios, nn_spacings, EmpiricalCdf, NearReal};
use dqc_core::spectra::{dff, dsff, spectral_gap, DsffConvention, GapKind};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};
use crate::experiments::{linspace, record_ks, reference_seed, spacing_options, write_is, write_references};
use crate::output::{row, Check, Output};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceArg {
    None,
    Poisson,
    Ginibre,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum NearRealArg {
    Keep,
    Drop,
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GapArg {
    Lindblad,
    Map,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionArg {
    Half,
    Sum,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Spectrum CSV (`re,im[,label]` with optional `#` header lines).
    pub spectrum: PathBuf,
    /// Complex spacing ratios and their summary.
    #[arg(long)]
    pub csr: bool,
    /// Nearest-neighbour spacing distribution I(s).
    #[arg(long)]
    pub spacings: bool,
    /// Disables local-density unfolding.
    #[arg(long)]
    pub no_unfold: bool,
    #[arg(long, default_value_t = 10)]
    pub k_loc: usize,
    #[arg(long, default_value_t = 20)]
    pub smooth: usize,
    /// Hull distance in mean spacings for the edge filter; 0 disables it.
    #[arg(long, default_value_t = 0.0)]
    pub edge_hull: f64,
    #[arg(long, value_enum, default_value_t = NearRealArg::Keep)]
    pub near_real: NearRealArg,
    #[arg(long, value_enum, default_value_t = ReferenceArg::Poisson)]
    pub reference: ReferenceArg,
    /// Ginibre reference size; 0 uses the spectrum size.
    #[arg(long, default_value_t = 0)]
    pub reference_size: usize,
    #[arg(long, default_value_t = 10)]
    pub reference_matrices: usize,
    #[arg(long, default_value_t = 3.0)]
    pub s_max: f64,
    #[arg(long, default_value_t = 301)]
    pub curve_points: usize,
    /// Dissipative form factor for t = 0..=T (the spectrum of one map).
    #[arg(long, value_name = "T")]
    pub dff_t_max: Option<u32>,
    /// DSFF along a ray up to this |τ|.
    #[arg(long, value_name = "TAU")]
    pub dsff: Option<f64>,
    #[arg(long, default_value_t = 150)]
    pub dsff_points: usize,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    pub dsff_angle: f64,
    #[arg(long, value_enum, default_value_t = ConventionArg::Half)]
    pub dsff_convention: ConventionArg,
    /// Spectral gap of a generator or a map.
    #[arg(long, value_enum)]
    pub gap: Option<GapArg>,
    /// Drops the eigenvalues nearest to `re,im` before any statistic.
    #[arg(long, value_name = "RE,IM")]
    pub drop_nearest: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub drop_count: usize,
}

fn parse_complex(s: &str) -> CliResult<c64> {
    let bad = || CliError::Usage(format!("--drop-nearest expects RE,IM, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let re = a.trim().parse::<f64>().map_err(|_| bad())?;
    let im = b.trim().parse::<f64>().map_err(|_| bad())?;
    Ok(c64::new(re, im))
}

/// Runs the selected statistics on `args.spectrum` and writes them to `out_dir`.
pub fn analyze(args: &AnalyzeArgs, out_dir: &Path, seed: u64) -> CliResult<Vec<Check>> {
    if !(args.csr || args.spacings || args.dff_t_max.is_some() || args.dsff.is_some() || args.gap.is_some()) {
        return Err(CliError::Usage("select at least one of --csr, --spacings, --dff-t-max, --dsff, --gap".into()));
    }
    let path = &args.spectrum;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let spec = io::parse_spectrum(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if spec.values.is_empty() {
        return Err(CliError::Usage(format!("{}: no eigenvalue rows", path.display())));
    }
    if !spec.is_finite() {
        return Err(CliError::invalid("spectrum", "contains non-finite values"));
    }
    let values = match &args.drop_nearest {
        Some(s) => spec.without_nearest(parse_complex(s)?, args.drop_count),
        None => spec.values.clone(),
    };
    let provenance = json!({ "analyzed": args.spectrum.display().to_string(), "source": spec.source, "seed": seed });
    let mut out = Output::new(out_dir, provenance)?;
    out.result("count", values.len());
    if args.csr {
        let (samples, summary) = complex_spacing_ratios(&values)?;
        let rows: Vec<Vec<String>> = samples.iter().map(|z| row(&[z.z.re, z.z.im])).collect();
        out.table("csr.csv", json!({ "statistic": "csr" }), &["re", "im"], &rows)?;
        out.result("csr", summary);
    }
    if args.spacings {
        let near_real = match args.near_real {
            NearRealArg::Keep => NearReal::Keep,
            NearRealArg::Drop => NearReal::Drop,
            NearRealArg::Auto => NearReal::Auto,
        };
        let opts = spacing_options(!args.no_unfold, args.k_loc, args.smooth, args.edge_hull, near_real);
        let samples = nn_spacings(&values, &opts)?;
        let rows: Vec<Vec<String>> = samples.iter().map(|x| row(&[x.s, x.position.re, x.position.im])).collect();
        out.table("spacings.csv", json!({ "statistic": "spacings", "options": opts }), &["s", "re", "im"], &rows)?;
        let cdf = EmpiricalCdf::new(samples.into_iter().map(|x| x.s).collect());
        write_is(&mut out, "is.csv", "spectrum", &cdf, args.s_max, args.curve_points)?;
        let size = if args.reference_size == 0 { values.len() } else { args.reference_size };
        let ginibre = match args.reference {
            ReferenceArg::None => None,
            ReferenceArg::Poisson => write_references(&mut out, &opts, None, args.s_max, args.curve_points)?,
            ReferenceArg::Ginibre | ReferenceArg::Both => write_references(
                &mut out,
                &opts,
                Some((args.reference_matrices, size, reference_seed(seed))),
                args.s_max,
                args.curve_points,
            )?,
        };
        record_ks(&mut out, "spectrum", &cdf, ginibre.as_ref());
    }
    let spectra = [values.clone()];
    if let Some(t_max) = args.dff_t_max {
        let times: Vec<u32> = (0..=t_max).collect();
        let curve = dff(&spectra, &times);
        let pts: Vec<(f64, f64)> = curve.abscissa.iter().zip(&curve.value).map(|(t, v)| (t.re, *v)).collect();
        out.curve("dff.csv", json!({ "curve": "dff" }), "t", "dff", &pts)?;
    }
    if let Some(tau_max) = args.dsff {
        let convention = match args.dsff_convention {
            ConventionArg::Half => DsffConvention::Half,
            ConventionArg::Sum => DsffConvention::Sum,
        };
        let dir = c64::from_polar(1.0, args.dsff_angle);
        let taus: Vec<c64> = linspace(0.0, tau_max, args.dsff_points).into_iter().map(|r| dir * r).collect();
        let curve = dsff(&spectra, &taus, convention);
        let pts: Vec<(c64, f64)> = curve.abscissa.iter().copied().zip(curve.value.iter().copied()).collect();
        out.complex_curve("dsff_ray.csv", json!({ "curve": "dsff", "convention": convention, "connected": false }), &pts)?;
    }
    if let Some(g) = args.gap {
        let kind = match g {
            GapArg::Lindblad => GapKind::Lindblad,
            GapArg::Map => GapKind::Map,
        };
        out.result("gap", json!({ "kind": kind, "value": spectral_gap(&values, kind)? }));
    }
    let mut manifest = Map::new();
    manifest.insert("command".into(), json!("analyze"));
    manifest.insert("seed".into(), json!(seed));
    manifest.insert("arguments".into(), serde_json::to_value(args).unwrap_or(Value::Null));
    out.finish(manifest)
}
