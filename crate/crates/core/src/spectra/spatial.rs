//! Uniform-grid neighbour search and convex hulls for planar point clouds.

use faer::c64;

pub struct PointIndex<'a> {
    pts: &'a [c64],
    x0: f64,
    y0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl<'a> PointIndex<'a> {
    pub fn new(pts: &'a [c64]) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in pts {
            x0 = x0.min(p.re);
            x1 = x1.max(p.re);
            y0 = y0.min(p.im);
            y1 = y1.max(p.im);
        }
        let n = pts.len().max(1);
        let w = (x1 - x0).max(0.0);
        let h = (y1 - y0).max(0.0);
        let extent = w.max(h).max(f64::MIN_POSITIVE);
        // about two points per cell; thin clouds fall back to the long side
        let area = (w * h).max(extent * extent / n as f64);
        let mut cell = (2.0 * area / n as f64).sqrt();
        if !(cell.is_finite() && cell > 0.0) {
            cell = 1.0;
        }
        let nx = ((w / cell).floor() as usize + 1).min(1 << 16);
        let ny = ((h / cell).floor() as usize + 1).min(1 << 16);
        let mut cells = vec![Vec::new(); nx * ny];
        let mut idx = Self { pts, x0, y0, cell, nx, ny, cells: Vec::new() };
        for (i, p) in pts.iter().enumerate() {
            let (cx, cy) = idx.cell_of(*p);
            cells[cy * nx + cx].push(i as u32);
        }
        idx.cells = cells;
        idx
    }

    fn cell_of(&self, p: c64) -> (usize, usize) {
        let cx = (((p.re - self.x0) / self.cell).floor().max(0.0) as usize).min(self.nx - 1);
        let cy = (((p.im - self.y0) / self.cell).floor().max(0.0) as usize).min(self.ny - 1);
        (cx, cy)
    }

    /// The `k` nearest other points of point `i`, sorted by distance then index.
    pub fn knn(&self, i: usize, k: usize) -> Vec<(usize, f64)> {
        let p = self.pts[i];
        let k = k.min(self.pts.len().saturating_sub(1));
        let (cx, cy) = self.cell_of(p);
        let mut found: Vec<(usize, f64)> = Vec::new();
        let max_ring = self.nx.max(self.ny);
        for ring in 0..=max_ring {
            let (x_lo, x_hi) = (cx.saturating_sub(ring), (cx + ring).min(self.nx - 1));
            let (y_lo, y_hi) = (cy.saturating_sub(ring), (cy + ring).min(self.ny - 1));
            for gy in y_lo..=y_hi {
                for gx in x_lo..=x_hi {
                    if gx.abs_diff(cx).max(gy.abs_diff(cy)) != ring {
                        continue;
                    }
                    for &j in &self.cells[gy * self.nx + gx] {
                        let j = j as usize;
                        if j != i {
                            found.push((j, (self.pts[j] - p).norm()));
                        }
                    }
                }
            }
            if found.len() >= k {
                found.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
                let reach = ring as f64 * self.cell;
                if k == 0 || found[k - 1].1 <= reach {
                    found.truncate(k);
                    return found;
                }
            }
        }
        found.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        found.truncate(k);
        found
    }
}

/// Convex hull, counter-clockwise, by the monotone chain.
pub fn convex_hull(pts: &[c64]) -> Vec<c64> {
    let mut p: Vec<c64> = pts.to_vec();
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: c64, a: c64, b: c64| (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re);
    let mut hull: Vec<c64> = Vec::with_capacity(2 * p.len());
    for &q in &p {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
            hull.pop();
        }
        hull.push(q);
    }
    let lower = hull.len() + 1;
    for &q in p.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
            hull.pop();
        }
        hull.push(q);
    }
    hull.pop();
    hull
}

/// Distance from `q` to the nearest edge of a closed polygon.
pub fn distance_to_polygon(q: c64, poly: &[c64]) -> f64 {
    if poly.is_empty() {
        return f64::INFINITY;
    }
    if poly.len() == 1 {
        return (q - poly[0]).norm();
    }
    let mut best = f64::INFINITY;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let ab = b - a;
        let l2 = ab.norm_sqr();
        let t = if l2 > 0.0 { (((q - a) * ab.conj()).re / l2).clamp(0.0, 1.0) } else { 0.0 };
        best = best.min((a + ab * t - q).norm());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(pts: &[c64], i: usize, k: usize) -> Vec<(usize, f64)> {
        let mut v: Vec<(usize, f64)> = (0..pts.len()).filter(|&j| j != i).map(|j| (j, (pts[j] - pts[i]).norm())).collect();
        v.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        v.truncate(k);
        v
    }

    #[test]
    fn knn_matches_brute_force() {
        let mut s = 12345u64;
        let mut rnd = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        let pts: Vec<c64> = (0..500).map(|_| c64::new(rnd() * 3.0, rnd() * 0.5 + (rnd() > 0.9) as u8 as f64 * 5.0)).collect();
        let idx = PointIndex::new(&pts);
        for i in (0..500).step_by(7) {
            assert_eq!(idx.knn(i, 10), brute(&pts, i, 10), "point {i}");
        }
    }

    #[test]
    fn knn_on_collinear_points() {
        let pts: Vec<c64> = (0..50).map(|i| c64::new(i as f64, 0.0)).collect();
        let idx = PointIndex::new(&pts);
        let nn = idx.knn(10, 2);
        assert_eq!(nn[0].0, 9);
        assert_eq!(nn[1].0, 11);
    }

    #[test]
    fn hull_of_square() {
        let mut pts = vec![c64::new(0.0, 0.0), c64::new(1.0, 0.0), c64::new(1.0, 1.0), c64::new(0.0, 1.0)];
        pts.push(c64::new(0.5, 0.5));
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert!((distance_to_polygon(c64::new(0.5, 0.5), &h) - 0.5).abs() < 1e-15);
        assert!((distance_to_polygon(c64::new(0.9, 0.5), &h) - 0.1).abs() < 1e-15);
    }
}
