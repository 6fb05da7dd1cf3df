//! Nearest-neighbour spacings, spacing ratios and distribution distances.

use faer::c64;
use serde::{Deserialize, Serialize};

use super::spatial::{convex_hull, distance_to_polygon, PointIndex};
use crate::error::{DqcError, Result};

/// Points closer than this are treated as one eigenvalue.
pub const DUPLICATE_TOL: f64 = 1e-13;

/// Removes near-coincident points (distance < `tol`), keeping the first of each group.
pub fn dedup_points(points: &[c64], tol: f64) -> (Vec<c64>, usize) {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].re.total_cmp(&points[b].re).then(a.cmp(&b)));
    let mut keep = vec![true; points.len()];
    for (pos, &i) in order.iter().enumerate() {
        if !keep[i] {
            continue;
        }
        for &j in &order[pos + 1..] {
            if points[j].re - points[i].re >= tol {
                break;
            }
            if keep[j] && (points[j] - points[i]).norm() < tol {
                keep[j] = false;
            }
        }
    }
    let out: Vec<c64> = points.iter().zip(&keep).filter(|(_, &k)| k).map(|(p, _)| *p).collect();
    let removed = points.len() - out.len();
    if removed > 0 {
        log::info!("collapsed {removed} duplicate eigenvalue(s)");
    }
    (out, removed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NearReal {
    #[default]
    Keep,
    Drop,
    /// Drop only when the cloud carries a crest of exactly real points.
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeFilter {
    /// Drop points closer than this many mean spacings to the convex hull.
    pub hull_spacings: Option<f64>,
    pub near_real: NearReal,
}

impl EdgeFilter {
    pub const OFF: EdgeFilter = EdgeFilter { hull_spacings: None, near_real: NearReal::Keep };
    /// The setting used by figure recipes.
    pub const FIGURE: EdgeFilter = EdgeFilter { hull_spacings: Some(2.0), near_real: NearReal::Auto };
}

impl Default for EdgeFilter {
    fn default() -> Self {
        Self::OFF
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacingOptions {
    pub unfold: bool,
    /// Neighbour rank used for the local density estimate.
    pub k_loc: usize,
    /// Number of nearest neighbours whose density estimates are averaged with the point's own.
    #[serde(default = "default_smooth")]
    pub smooth: usize,
    pub edge_filter: EdgeFilter,
}

fn default_smooth() -> usize {
    20
}

impl Default for SpacingOptions {
    fn default() -> Self {
        Self { unfold: true, k_loc: 10, smooth: default_smooth(), edge_filter: EdgeFilter::OFF }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpacingSample {
    pub s: f64,
    pub position: c64,
}

/// Nearest-neighbour spacings in the plane.
///
/// With unfolding, each spacing is multiplied by `√ρ̂` where `ρ̂` is `k_loc / (π r_k²)`, built from the
/// distance `r_k` to the `k_loc`-th neighbour and averaged over the point and its `smooth` nearest
/// neighbours. The result is scaled to unit mean.
pub fn nn_spacings(points: &[c64], opts: &SpacingOptions) -> Result<Vec<SpacingSample>> {
    let (pts, _) = dedup_points(points, DUPLICATE_TOL);
    let need = if opts.unfold { opts.k_loc.max(1) + 1 } else { 3 }.max(3);
    if pts.len() < need {
        return Err(DqcError::TooFewPoints { needed: need, got: pts.len() });
    }
    let index = PointIndex::new(&pts);
    let k = if opts.unfold { opts.k_loc.max(1) } else { 1 };
    let reach = if opts.unfold { k.max(opts.smooth) } else { 1 }.min(pts.len() - 1);
    let neighbours: Vec<Vec<(usize, f64)>> = (0..pts.len()).map(|i| index.knn(i, reach)).collect();
    let raw: Vec<(f64, f64)> = if opts.unfold {
        let local: Vec<f64> = neighbours.iter().map(|nb| k as f64 / (std::f64::consts::PI * nb[k - 1].1.powi(2))).collect();
        let m = opts.smooth.min(reach);
        neighbours
            .iter()
            .enumerate()
            .map(|(i, nb)| {
                let rho = (local[i] + nb[..m].iter().map(|&(j, _)| local[j]).sum::<f64>()) / (m + 1) as f64;
                (nb[0].1, nb[0].1 * rho.sqrt())
            })
            .collect()
    } else {
        neighbours.iter().map(|nb| (nb[0].1, nb[0].1)).collect()
    };
    let mean_raw = raw.iter().map(|r| r.0).sum::<f64>() / raw.len() as f64;
    let keep = edge_mask(&pts, mean_raw, &opts.edge_filter);
    let mut out: Vec<SpacingSample> = pts
        .iter()
        .zip(&raw)
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|((p, r), _)| SpacingSample { s: r.1, position: *p })
        .collect();
    if out.is_empty() {
        return Err(DqcError::TooFewPoints { needed: 1, got: 0 });
    }
    if opts.unfold {
        let mean = out.iter().map(|x| x.s).sum::<f64>() / out.len() as f64;
        for x in &mut out {
            x.s /= mean;
        }
    }
    Ok(out)
}

fn edge_mask(pts: &[c64], mean_spacing: f64, filter: &EdgeFilter) -> Vec<bool> {
    let mut keep = vec![true; pts.len()];
    if let Some(m) = filter.hull_spacings {
        let hull = convex_hull(pts);
        for (k, p) in keep.iter_mut().zip(pts) {
            if distance_to_polygon(*p, &hull) < m * mean_spacing {
                *k = false;
            }
        }
    }
    let drop_real = match filter.near_real {
        NearReal::Keep => false,
        NearReal::Drop => true,
        NearReal::Auto => {
            let scale = pts.iter().map(|p| p.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            pts.iter().filter(|p| p.im.abs() <= 1e-10 * scale).count() >= 5
        }
    };
    if drop_real {
        for (k, p) in keep.iter_mut().zip(pts) {
            if p.im.abs() < mean_spacing {
                *k = false;
            }
        }
    }
    keep
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CsrSample {
    pub z: c64,
}

impl CsrSample {
    pub fn r(&self) -> f64 {
        self.z.norm()
    }

    pub fn theta(&self) -> f64 {
        self.z.arg()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CsrSummary {
    pub mean_r: f64,
    pub mean_cos: f64,
    pub count: usize,
    pub duplicates: usize,
}

/// Complex spacing ratios `z_k = (λ_NN − λ_k)/(λ_NNN − λ_k)`.
pub fn complex_spacing_ratios(points: &[c64]) -> Result<(Vec<CsrSample>, CsrSummary)> {
    let (pts, duplicates) = dedup_points(points, DUPLICATE_TOL);
    if pts.len() < 3 {
        return Err(DqcError::TooFewPoints { needed: 3, got: pts.len() });
    }
    let index = PointIndex::new(&pts);
    let mut out = Vec::with_capacity(pts.len());
    for (i, &p) in pts.iter().enumerate() {
        let nb = index.knn(i, 2);
        let z = (pts[nb[0].0] - p) / (pts[nb[1].0] - p);
        out.push(CsrSample { z });
    }
    let summary = summarize_csr(&out, duplicates);
    Ok((out, summary))
}

pub fn summarize_csr(samples: &[CsrSample], duplicates: usize) -> CsrSummary {
    let n = samples.len().max(1) as f64;
    CsrSummary {
        mean_r: samples.iter().map(|s| s.r()).sum::<f64>() / n,
        mean_cos: samples.iter().map(|s| s.z.re / s.r().max(f64::MIN_POSITIVE)).sum::<f64>() / n,
        count: samples.len(),
        duplicates,
    }
}

/// Fraction of CSR samples with `|z| < radius`, relative to a flat density on the unit disk.
pub fn csr_density_ratio(samples: &[CsrSample], radius: f64) -> f64 {
    let inside = samples.iter().filter(|s| s.r() < radius).count() as f64;
    inside / (samples.len() as f64 * radius * radius)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HermitianRatios {
    pub r: Vec<f64>,
    pub r_tilde: Vec<f64>,
    pub mean_r_tilde: f64,
}

/// Consecutive-gap ratios of a real spectrum.
pub fn hermitian_spacing_ratios(levels: &[f64]) -> Result<HermitianRatios> {
    if levels.len() < 3 {
        return Err(DqcError::TooFewPoints { needed: 3, got: levels.len() });
    }
    let mut e = levels.to_vec();
    e.sort_by(f64::total_cmp);
    let gaps: Vec<f64> = e.windows(2).map(|w| w[1] - w[0]).collect();
    let mut r = Vec::with_capacity(gaps.len() - 1);
    let mut rt = Vec::with_capacity(gaps.len() - 1);
    for w in gaps.windows(2) {
        let (prev, next) = (w[0], w[1]);
        r.push(if prev > 0.0 { next / prev } else { f64::INFINITY });
        let (lo, hi) = if prev < next { (prev, next) } else { (next, prev) };
        rt.push(if hi > 0.0 { lo / hi } else { 1.0 });
    }
    let mean = rt.iter().sum::<f64>() / rt.len() as f64;
    Ok(HermitianRatios { r, r_tilde: rt, mean_r_tilde: mean })
}

/// Sorted sample with a right-continuous empirical CDF.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.retain(|v| v.is_finite());
        values.sort_by(f64::total_cmp);
        Self { sorted: values }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len().max(1) as f64
    }

    /// `(x, F(x))` on a uniform grid over `[0, x_max]`.
    pub fn curve(&self, x_max: f64, points: usize) -> Vec<(f64, f64)> {
        (0..points)
            .map(|i| {
                let x = x_max * i as f64 / (points.max(2) - 1) as f64;
                (x, self.eval(x))
            })
            .collect()
    }

    /// Kolmogorov–Smirnov distance to a continuous CDF.
    pub fn ks_to(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let n = self.sorted.len() as f64;
        let mut d = 0.0f64;
        for (i, &x) in self.sorted.iter().enumerate() {
            let f = cdf(x);
            d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
        }
        d
    }

    /// Two-sample Kolmogorov–Smirnov distance.
    pub fn ks_between(&self, other: &EmpiricalCdf) -> f64 {
        let (a, b) = (&self.sorted, &other.sorted);
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let (mut i, mut j) = (0usize, 0usize);
        let mut d = 0.0f64;
        while i < a.len() && j < b.len() {
            let x = a[i].min(b[j]);
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            d = d.max((i as f64 / na - j as f64 / nb).abs());
        }
        d
    }
}

/// Two-sample KS p-value from the asymptotic Kolmogorov distribution.
pub fn ks_p_value(d: f64, n1: usize, n2: usize) -> f64 {
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = 2.0 * (-1f64).powi(k - 1) * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}
