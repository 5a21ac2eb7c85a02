//! Canonical representations of a monotone operator T: the Fenchel–Young
//! function, the Fitzpatrick function φ_T and σ_T = cl-conv(π + δ_T), plus
//! the membership check for H(T).

use serde::{Deserialize, Serialize};

use crate::closed_form::ClosedFormConvexFunction;
use crate::conjugation::clconv;
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::function::{dot, pi_bifunction, Bifunction};
use crate::graph::{check_monotone, indicator_of_graph, OperatorGraph};
use crate::grid::{Grid, DEFAULT_SNAP_TOL};
use crate::par;

pub const DEFAULT_EQ_TOL: f64 = 1e-6;
/// Allowed undershoot of h below π.
pub const MINORIZE_TOL: f64 = 1e-9;
/// Relative slack of the midpoint convexity test.
pub const CONVEXITY_TOL: f64 = 1e-9;

/// h_FY(x, x*) = f(x) + f*(x*), with f* in closed form.
pub fn fenchel_young(f: &ClosedFormConvexFunction, xgrid: &Grid, sgrid: &Grid) -> Result<Bifunction> {
    f.validate()?;
    for g in [xgrid, sgrid] {
        if g.dim() != f.dim() {
            return Err(Error::DimensionMismatch { expected: f.dim(), got: g.dim() });
        }
    }
    let fx: Vec<f64> = (0..xgrid.len()).map(|i| f.eval(&xgrid.point(i))).collect::<Result<_>>()?;
    let fs: Vec<f64> = (0..sgrid.len()).map(|j| f.conjugate_at(&sgrid.point(j))).collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(fx.len() * fs.len());
    for a in &fx {
        for b in &fs {
            values.push(a + b);
        }
    }
    let h = Bifunction::new(xgrid.clone(), sgrid.clone(), values)?;
    if !h.is_proper() {
        return Err(Error::ImproperFunction);
    }
    Ok(h)
}

/// max over (y, y*) ∈ T of ⟨x, y*⟩ + ⟨y, x*⟩ − ⟨y, y*⟩.
pub(crate) fn fitzpatrick_at(t: &OperatorGraph, x: &[f64], s: &[f64]) -> f64 {
    t.iter().map(|(y, ys)| dot(x, ys) + dot(y, s) - dot(y, ys)).fold(f64::NEG_INFINITY, f64::max)
}

/// The Fitzpatrick function φ_T on X×X*, the smallest member of H(T).
pub fn fitzpatrick(t: &OperatorGraph, xgrid: &Grid, sgrid: &Grid) -> Result<Bifunction> {
    check_grids(t, xgrid, sgrid)?;
    let violations = check_monotone(t);
    if !violations.is_empty() {
        return Err(Error::NotMonotone { violations });
    }
    let d = t.dim();
    let xs = xgrid.point_table();
    let ss = sgrid.point_table();
    let ns = sgrid.len();
    let values = par::map_range(xgrid.len() * ns, |idx| {
        let (ix, is) = (idx / ns, idx % ns);
        fitzpatrick_at(t, &xs[ix * d..(ix + 1) * d], &ss[is * d..(is + 1) * d])
    });
    Bifunction::new(xgrid.clone(), sgrid.clone(), values)
}

/// σ_T = cl-conv(π + δ_T), the biggest member of H(T). `+∞` off the convex
/// hull of the graph.
pub fn sigma(t: &OperatorGraph, xgrid: &Grid, sgrid: &Grid) -> Result<Bifunction> {
    check_grids(t, xgrid, sgrid)?;
    let snapped = t.snap(xgrid, sgrid, DEFAULT_SNAP_TOL)?;
    if let Some(index) = snapped.iter().position(Option::is_none) {
        return Err(Error::GraphPointOffGrid { index });
    }
    let violations = check_monotone(t);
    if !violations.is_empty() {
        return Err(Error::NotMonotone { violations });
    }
    let base = pi_bifunction(xgrid, sgrid)?.zip_with(&indicator_of_graph(t, xgrid, sgrid, DEFAULT_SNAP_TOL)?, |p, d| p + d)?;
    clconv(&base)
}

fn check_grids(t: &OperatorGraph, xgrid: &Grid, sgrid: &Grid) -> Result<()> {
    for g in [xgrid, sgrid] {
        if g.dim() != t.dim() {
            return Err(Error::DimensionMismatch { expected: t.dim(), got: g.dim() });
        }
    }
    Ok(())
}

/// A node of X×X*.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeWitness {
    pub x: Vec<f64>,
    pub xstar: Vec<f64>,
}

impl NodeWitness {
    pub fn of(h: &Bifunction, idx: usize) -> Self {
        let (x, xstar) = h.node(idx);
        NodeWitness { x, xstar }
    }
}

/// Outcome of one node-wise check with its worst value and where it occurs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub passed: bool,
    pub worst: ExtReal,
    pub witness: Option<NodeWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualitySetSummary {
    /// Nodes with |h − π| ≤ eq_tol.
    pub equal_nodes: usize,
    /// Distinct snapped graph nodes.
    pub graph_nodes: usize,
    pub graph_points_off_grid: usize,
    /// Graph nodes outside the equality set.
    pub missing: usize,
    /// Equality-set nodes not monotonically related to all of T.
    pub extra: usize,
    pub witness: Option<NodeWitness>,
}

/// Verdict on h ∈ H(T) for a sampled h.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub is_convex_on_grid: bool,
    /// Worst second difference h(n−v) + h(n+v) − 2h(n).
    pub convexity: CheckSummary,
    pub minorizes_pi: bool,
    /// Worst h − π.
    pub minorization: CheckSummary,
    pub equals_pi_on_t: bool,
    /// Worst |h − π| over graph nodes.
    pub equality_on_t: CheckSummary,
    pub equality_set_matches_t: bool,
    pub equality_set: EqualitySetSummary,
    pub verdict: bool,
    pub eq_tol: f64,
}

/// Runs the four checks for h ∈ H(T):
///
/// * midpoint convexity along every product-grid axis and both diagonals of
///   every pair of axes;
/// * h ≥ π − 1e-9;
/// * |h − π| ≤ eq_tol at snapped graph nodes;
/// * the set E = {|h − π| ≤ eq_tol} contains the snapped graph and lies in
///   the nodes monotonically related to all of T (slack eq_tol), which is
///   how maximality is read on a grid.
pub fn membership_report(h: &Bifunction, t: &OperatorGraph, eq_tol: f64) -> Result<MembershipReport> {
    check_grids(t, h.xgrid(), h.sgrid())?;
    let pi = pi_bifunction(h.xgrid(), h.sgrid())?;

    let convexity = convexity_check(h)?;

    let gap: Vec<f64> = h.values().iter().zip(pi.values()).map(|(a, p)| a - p).collect();
    let minorization = {
        let (idx, worst) = argmin(&gap);
        CheckSummary { passed: worst >= -MINORIZE_TOL, worst: ExtReal::from_f64(worst), witness: Some(NodeWitness::of(h, idx)) }
    };

    let snapped = t.snap(h.xgrid(), h.sgrid(), DEFAULT_SNAP_TOL)?;
    let off_grid = snapped.iter().filter(|s| s.is_none()).count();
    let mut on_graph = vec![false; h.len()];
    for idx in snapped.iter().flatten() {
        on_graph[*idx] = true;
    }
    let equality_on_t = {
        let mut worst = 0.0_f64;
        let mut witness = None;
        for idx in (0..h.len()).filter(|&i| on_graph[i]) {
            let dev = gap[idx].abs();
            if witness.is_none() || dev > worst || dev.is_nan() {
                worst = if dev.is_nan() { f64::INFINITY } else { dev };
                witness = Some(NodeWitness::of(h, idx));
            }
        }
        CheckSummary { passed: worst <= eq_tol, worst: ExtReal::from_f64(worst), witness }
    };

    let related = t.monotone_related_mask(h.xgrid(), h.sgrid(), eq_tol)?;
    let equal: Vec<bool> = gap.iter().map(|g| g.abs() <= eq_tol).collect();
    let mut missing = 0;
    let mut extra = 0;
    let mut witness = None;
    for idx in 0..h.len() {
        let bad_missing = on_graph[idx] && !equal[idx];
        let bad_extra = equal[idx] && !related[idx];
        missing += bad_missing as usize;
        extra += bad_extra as usize;
        if (bad_missing || bad_extra) && witness.is_none() {
            witness = Some(NodeWitness::of(h, idx));
        }
    }
    let equality_set = EqualitySetSummary {
        equal_nodes: equal.iter().filter(|&&e| e).count(),
        graph_nodes: on_graph.iter().filter(|&&g| g).count(),
        graph_points_off_grid: off_grid,
        missing,
        extra,
        witness,
    };

    let is_convex_on_grid = convexity.passed;
    let minorizes_pi = minorization.passed;
    let equals_pi_on_t = equality_on_t.passed;
    let equality_set_matches_t = missing == 0 && extra == 0;
    Ok(MembershipReport {
        is_convex_on_grid,
        convexity,
        minorizes_pi,
        minorization,
        equals_pi_on_t,
        equality_on_t,
        equality_set_matches_t,
        equality_set,
        verdict: is_convex_on_grid && minorizes_pi && equals_pi_on_t && equality_set_matches_t,
        eq_tol,
    })
}

/// Lowest index attaining the minimum; `+∞` entries count as `+∞`.
fn argmin(v: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, &x) in v.iter().enumerate() {
        if x < best.1 {
            best = (i, x);
        }
    }
    best
}

/// Midpoint test: h(n−v) + h(n+v) ≥ 2h(n) − tol wherever both ends are
/// finite. A `+∞` midpoint between finite ends is a violation (non-convex
/// domain) with margin `-∞`.
fn convexity_check(h: &Bifunction) -> Result<CheckSummary> {
    let grid = Grid::product(h.xgrid(), h.sgrid())?;
    let shape = grid.shape();
    let dim = shape.len();
    let mut dirs: Vec<Vec<i64>> = Vec::new();
    for k in 0..dim {
        let mut v = vec![0; dim];
        v[k] = 1;
        dirs.push(v);
        for l in k + 1..dim {
            for sign in [1, -1] {
                let mut v = vec![0; dim];
                v[k] = 1;
                v[l] = sign;
                dirs.push(v);
            }
        }
    }
    let vals = h.values();
    let per_node = par::map_range(vals.len(), |idx| {
        let m = grid.multi_index(idx);
        let mut worst = (f64::INFINITY, true);
        let b = vals[idx];
        for v in &dirs {
            let (Some(lo), Some(hi)) = (offset(&m, v, -1, &shape), offset(&m, v, 1, &shape)) else { continue };
            let (a, c) = (vals[grid.flat_index(&lo)], vals[grid.flat_index(&hi)]);
            if !a.is_finite() || !c.is_finite() {
                continue;
            }
            let (margin, ok) = if b.is_finite() {
                let margin = a + c - 2.0 * b;
                let tol = CONVEXITY_TOL * a.abs().max(b.abs()).max(c.abs()).max(1.0);
                (margin, margin >= -tol)
            } else {
                (f64::NEG_INFINITY, false)
            };
            if margin < worst.0 {
                worst.0 = margin;
            }
            worst.1 &= ok;
        }
        worst
    });
    let mut passed = true;
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for (idx, &(margin, ok)) in per_node.iter().enumerate() {
        passed &= ok;
        if margin < worst {
            worst = margin;
            witness = Some(idx);
        }
    }
    Ok(CheckSummary { passed, worst: ExtReal::from_f64(worst), witness: witness.map(|i| NodeWitness::of(h, i)) })
}

fn offset(m: &[usize], v: &[i64], sign: i64, shape: &[usize]) -> Option<Vec<usize>> {
    m.iter()
        .zip(v)
        .zip(shape)
        .map(|((&i, &d), &n)| {
            let j = i as i64 + sign * d;
            (0..n as i64).contains(&j).then_some(j as usize)
        })
        .collect()
}
