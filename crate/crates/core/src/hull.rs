//! Point-in-convex-hull queries for finite point sets.
//!
//! Points are first reduced to coordinates in their affine hull. Hulls of
//! affine dimension 1 and 2 are tested geometrically (interval, convex
//! polygon); higher dimensions solve a phase-1 simplex for barycentric
//! weights λ ≥ 0 with Σλ = 1 and Σλᵢpᵢ = q.

/// Membership oracle for conv{p₀, …, p_{m−1}} ⊂ ℝ^D.
#[derive(Debug, Clone)]
pub struct HullTester {
    dim: usize,
    origin: Vec<f64>,
    basis: Vec<Vec<f64>>,
    tol: f64,
    shape: Shape,
}

#[derive(Debug, Clone)]
enum Shape {
    Point,
    Segment { lo: f64, hi: f64 },
    /// Counter-clockwise polygon vertices in reduced coordinates.
    Polygon(Vec<[f64; 2]>),
    /// Reduced coordinates of every point, row-major.
    General { coords: Vec<f64> },
}

impl HullTester {
    /// `points` holds `dim`-tuples row-major. Panics on an empty set.
    pub fn new(points: &[f64], dim: usize) -> Self {
        assert!(dim > 0 && !points.is_empty() && points.len().is_multiple_of(dim), "empty or ragged point set");
        let origin = points[..dim].to_vec();
        let diffs: Vec<Vec<f64>> = points
            .chunks(dim)
            .map(|p| p.iter().zip(&origin).map(|(a, b)| a - b).collect())
            .collect();
        let scale = diffs.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let tol = 1e-9 * scale;

        // modified Gram–Schmidt over the difference vectors
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for v in &diffs {
            let mut r = v.clone();
            for b in &basis {
                let c = dot(&r, b);
                r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= c * bi);
            }
            let norm = dot(&r, &r).sqrt();
            if norm > tol {
                r.iter_mut().for_each(|ri| *ri /= norm);
                basis.push(r);
            }
            if basis.len() == dim {
                break;
            }
        }

        let reduced: Vec<Vec<f64>> = diffs.iter().map(|v| basis.iter().map(|b| dot(v, b)).collect()).collect();
        let shape = match basis.len() {
            0 => Shape::Point,
            1 => {
                let (lo, hi) = reduced.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c[0]), hi.max(c[0])));
                Shape::Segment { lo, hi }
            }
            2 => Shape::Polygon(monotone_chain(reduced.iter().map(|c| [c[0], c[1]]).collect(), tol)),
            _ => Shape::General { coords: reduced.into_iter().flatten().collect() },
        };
        HullTester { dim, origin, basis, tol, shape }
    }

    /// Dimension of the affine hull.
    pub fn affine_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        debug_assert_eq!(q.len(), self.dim);
        let w: Vec<f64> = q.iter().zip(&self.origin).map(|(a, b)| a - b).collect();
        let c: Vec<f64> = self.basis.iter().map(|b| dot(&w, b)).collect();
        // distance to the affine hull
        let mut r = w.clone();
        for (ci, b) in c.iter().zip(&self.basis) {
            r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= ci * bi);
        }
        if dot(&r, &r).sqrt() > self.tol {
            return false;
        }
        match &self.shape {
            Shape::Point => true,
            Shape::Segment { lo, hi } => c[0] >= lo - self.tol && c[0] <= hi + self.tol,
            Shape::Polygon(v) => in_convex_polygon(v, [c[0], c[1]], self.tol),
            Shape::General { coords } => barycentric_feasible(coords, self.basis.len(), &c, self.tol),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; returns the hull counter-clockwise without
/// collinear vertices.
fn monotone_chain(mut pts: Vec<[f64; 2]>, tol: f64) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let eps = tol * tol;
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= eps {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= eps {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn in_convex_polygon(v: &[[f64; 2]], q: [f64; 2], tol: f64) -> bool {
    let n = v.len();
    (0..n).all(|i| {
        let a = v[i];
        let b = v[(i + 1) % n];
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        // signed distance of q to the left of edge a→b
        cross(a, b, q) >= -tol * len
    })
}

/// Phase-1 simplex (Bland's rule) for λ ≥ 0, Σλ = 1, Σλᵢcᵢ = q.
fn barycentric_feasible(coords: &[f64], k: usize, q: &[f64], tol: f64) -> bool {
    let m = coords.len() / k;
    let rows = k + 1;
    let cols = m + rows + 1;
    let rhs = cols - 1;
    let mut t = vec![0.0; rows * cols];
    for r in 0..rows {
        let b = if r < k { q[r] } else { 1.0 };
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        for j in 0..m {
            let a = if r < k { coords[j * k + r] } else { 1.0 };
            t[r * cols + j] = sign * a;
        }
        t[r * cols + m + r] = 1.0;
        t[r * cols + rhs] = sign * b;
    }
    let mut basis: Vec<usize> = (m..m + rows).collect();
    // reduced costs of min Σ artificials
    let mut cost = vec![0.0; cols];
    for r in 0..rows {
        for j in 0..cols {
            if !(m..m + rows).contains(&j) {
                cost[j] -= t[r * cols + j];
            }
        }
    }
    let eps = 1e-12;
    for _ in 0..50 * (m + rows) {
        let Some(enter) = (0..m + rows).find(|&j| cost[j] < -eps) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..rows {
            let a = t[r * cols + enter];
            if a > eps {
                let ratio = t[r * cols + rhs] / a;
                let better = match leave {
                    None => true,
                    Some((lr, best)) => ratio < best - eps || (ratio <= best + eps && basis[r] < basis[lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((pr, _)) = leave else {
            break;
        };
        let piv = t[pr * cols + enter];
        for j in 0..cols {
            t[pr * cols + j] /= piv;
        }
        for r in 0..rows {
            if r != pr {
                let f = t[r * cols + enter];
                if f != 0.0 {
                    for j in 0..cols {
                        t[r * cols + j] -= f * t[pr * cols + j];
                    }
                }
            }
        }
        let f = cost[enter];
        for j in 0..cols {
            cost[j] -= f * t[pr * cols + j];
        }
        basis[pr] = enter;
    }
    let infeasibility: f64 = (0..rows).filter(|&r| basis[r] >= m).map(|r| t[r * cols + rhs]).sum();
    infeasibility <= tol
}
