//! Set and multiset distances between complex point clouds.

use faer::c64;

/// Symmetric Hausdorff distance.
pub fn hausdorff(a: &[c64], b: &[c64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    directed(a, b).max(directed(b, a))
}

fn directed(a: &[c64], b: &[c64]) -> f64 {
    let mut sorted: Vec<c64> = b.to_vec();
    sorted.sort_by(|x, y| x.re.total_cmp(&y.re));
    let mut worst = 0.0f64;
    for &p in a {
        worst = worst.max(nearest_sorted(&sorted, p));
    }
    worst
}

/// Distance from `p` to the closest point of a cloud sorted by real part.
fn nearest_sorted(sorted: &[c64], p: c64) -> f64 {
    let start = sorted.partition_point(|q| q.re < p.re);
    let mut best = f64::INFINITY;
    for q in sorted[start..].iter() {
        if q.re - p.re > best {
            break;
        }
        best = best.min((q - p).norm());
    }
    for q in sorted[..start].iter().rev() {
        if p.re - q.re > best {
            break;
        }
        best = best.min((q - p).norm());
    }
    best
}

/// Bottleneck matching restricted to pairs closer than `tol`.
///
/// Returns the largest matched distance when a perfect matching exists.
pub fn match_within(a: &[c64], b: &[c64], tol: f64) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let n = a.len();
    if n == 0 {
        return Some(0.0);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| b[x].re.total_cmp(&b[y].re));
    let res: Vec<f64> = order.iter().map(|&j| b[j].re).collect();
    let mut adj: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for &p in a {
        let lo = res.partition_point(|&r| r < p.re - tol);
        let hi = res.partition_point(|&r| r <= p.re + tol);
        let mut edges: Vec<(usize, f64)> = order[lo..hi]
            .iter()
            .filter_map(|&j| {
                let d = (b[j] - p).norm();
                (d <= tol).then_some((j, d))
            })
            .collect();
        if edges.is_empty() {
            return None;
        }
        edges.sort_by(|x, y| x.1.total_cmp(&y.1));
        adj.push(edges);
    }
    let pairs = hopcroft_karp(n, &adj)?;
    Some(pairs.iter().enumerate().map(|(i, &j)| (a[i] - b[j]).norm()).fold(0.0, f64::max))
}

/// Perfect matching of the left vertices, or `None`.
fn hopcroft_karp(n: usize, adj: &[Vec<(usize, f64)>]) -> Option<Vec<usize>> {
    const FREE: usize = usize::MAX;
    let mut match_l = vec![FREE; n];
    let mut match_r = vec![FREE; n];
    let mut dist = vec![0usize; n];
    let mut queue = Vec::with_capacity(n);
    loop {
        queue.clear();
        let mut found = false;
        for u in 0..n {
            if match_l[u] == FREE {
                dist[u] = 0;
                queue.push(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for &(v, _) in &adj[u] {
                let w = match_r[v];
                if w == FREE {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push(w);
                }
            }
        }
        if !found {
            break;
        }
        let mut it = vec![0usize; n];
        for u in 0..n {
            if match_l[u] == FREE {
                augment(u, adj, &mut match_l, &mut match_r, &mut dist, &mut it);
            }
        }
    }
    match_l.iter().all(|&v| v != FREE).then_some(match_l)
}

fn augment(
    root: usize,
    adj: &[Vec<(usize, f64)>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    dist: &mut [usize],
    it: &mut [usize],
) -> bool {
    const FREE: usize = usize::MAX;
    // iterative DFS along the layered graph
    let mut stack = vec![root];
    while let Some(&u) = stack.last() {
        if it[u] >= adj[u].len() {
            dist[u] = usize::MAX;
            stack.pop();
            continue;
        }
        let v = adj[u][it[u]].0;
        it[u] += 1;
        let w = match_r[v];
        if w == FREE {
            // flip the path
            let mut v = v;
            for &x in stack.iter().rev() {
                let prev = match_l[x];
                match_l[x] = v;
                match_r[v] = x;
                v = prev;
            }
            return true;
        }
        if dist[w] == dist[u].wrapping_add(1) {
            stack.push(w);
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hausdorff_basic() {
        let a = [c64::new(0.0, 0.0), c64::new(1.0, 0.0)];
        let b = [c64::new(0.0, 0.1), c64::new(1.0, 0.0), c64::new(3.0, 0.0)];
        assert!((hausdorff(&a, &b) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn multiset_matching_respects_multiplicity() {
        let a = [c64::new(0.0, 0.0), c64::new(0.0, 0.0), c64::new(1.0, 0.0)];
        let b = [c64::new(0.0, 0.0), c64::new(1.0, 0.0), c64::new(1.0, 0.0)];
        assert!(match_within(&a, &b, 1e-9).is_none());
        let c = [c64::new(1.0, 1e-12), c64::new(0.0, 0.0), c64::new(0.0, -1e-12)];
        assert!(match_within(&a, &c, 1e-9).unwrap() <= 1e-12);
    }

    #[test]
    fn matching_needs_augmenting_paths() {
        // greedy by nearest would fail here
        let a = [c64::new(0.0, 0.0), c64::new(0.5, 0.0)];
        let b = [c64::new(0.4, 0.0), c64::new(-0.3, 0.0)];
        let d = match_within(&a, &b, 0.35).unwrap();
        assert!((d - 0.3).abs() < 1e-15);
    }
}
