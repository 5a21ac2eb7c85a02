//! Order structure on H(T): the set H_a(T) = {h ≥ Jh}, the sets
//! L(h) = {g ∈ H(T) | h ≥ g ≥ Jg}, the construction ĥ = max(h, Jh), the
//! fixed-point residual |h − Jh| and a heuristic search for small residuals.

use serde::{Deserialize, Serialize};

use crate::conjugation::{clconv, j};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::function::{pi_bifunction, Bifunction};
use crate::graph::OperatorGraph;
use crate::grid::DEFAULT_SNAP_TOL;
use crate::representations::{membership_report, DEFAULT_EQ_TOL};

pub const DEFAULT_HA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// max |h − Jh| over nodes where both are finite (0 if there are none).
    pub sup_abs_diff: ExtReal,
    /// Nodes where exactly one of h, Jh is `+∞`.
    pub finite_domain_mismatch: usize,
    pub is_in_ha: bool,
}

/// h(n) ≥ g(n) − tol with `+∞` on the left always passing.
fn dominates(h: &[f64], g: &[f64], tol: f64) -> bool {
    h.iter().zip(g).all(|(&a, &b)| a == f64::INFINITY || a >= b - tol)
}

/// h ∈ H_a up to `tol`: h ≥ Jh − tol at every node.
pub fn is_in_ha(h: &Bifunction, tol: f64) -> Result<bool> {
    Ok(dominates(h.values(), j(h)?.values(), tol))
}

pub fn residual(h: &Bifunction) -> Result<ResidualReport> {
    residual_with_tol(h, DEFAULT_HA_TOL)
}

pub fn residual_with_tol(h: &Bifunction, tol: f64) -> Result<ResidualReport> {
    let jh = j(h)?;
    Ok(residual_against(h, &jh, tol))
}

fn residual_against(h: &Bifunction, jh: &Bifunction, tol: f64) -> ResidualReport {
    let mut sup = 0.0_f64;
    let mut mismatch = 0;
    for (&a, &b) in h.values().iter().zip(jh.values()) {
        match (a.is_finite(), b.is_finite()) {
            (true, true) => sup = sup.max((a - b).abs()),
            (false, false) => {}
            _ => mismatch += 1,
        }
    }
    ResidualReport {
        sup_abs_diff: ExtReal::from_f64(sup),
        finite_domain_mismatch: mismatch,
        is_in_ha: dominates(h.values(), jh.values(), tol),
    }
}

/// ĥ = max(h, Jh). For h ∈ H(T) the result lies in H_a(T).
pub fn hat(h: &Bifunction) -> Result<Bifunction> {
    h.pointwise_max(&j(h)?)
}

/// g ∈ L(h): h ≥ g − tol, g ≥ Jg − tol and g ∈ H(T).
pub fn in_l(h: &Bifunction, g: &Bifunction, t: &OperatorGraph, tol: f64) -> Result<bool> {
    if !h.same_grids(g) {
        return Err(Error::GridMismatch("h and g live on different grids".into()));
    }
    if !dominates(h.values(), g.values(), tol) || !is_in_ha(g, tol)? {
        return Ok(false);
    }
    Ok(membership_report(g, t, DEFAULT_EQ_TOL)?.verdict)
}

/// Iterates g ← cl-conv((g + Jg)/2), then raises g to π at the graph nodes.
///
/// Not a convergent scheme: the only contracts are that every iterate is
/// checked for membership in H(T) and reported. Stops after `max_iters`
/// steps or once the residual is below `stop_tol` with no finite-domain
/// mismatch. The trace starts with the report for `h0`.
pub fn heuristic_fixed_point(
    h0: &Bifunction,
    t: &OperatorGraph,
    max_iters: usize,
    stop_tol: f64,
) -> Result<(Bifunction, Vec<ResidualReport>)> {
    if !membership_report(h0, t, DEFAULT_EQ_TOL)?.verdict {
        return Err(Error::Precondition("h0 does not pass the membership check".into()));
    }
    let first = residual(h0)?;
    if !first.is_in_ha {
        return Err(Error::Precondition("h0 is not above its J-transform".into()));
    }
    let pi = pi_bifunction(h0.xgrid(), h0.sgrid())?;
    let graph_nodes: Vec<usize> = t.snap(h0.xgrid(), h0.sgrid(), DEFAULT_SNAP_TOL)?.into_iter().flatten().collect();

    let converged = |r: &ResidualReport| r.sup_abs_diff.to_f64() <= stop_tol && r.finite_domain_mismatch == 0;
    let mut g = h0.clone();
    let mut trace = vec![first];
    for iteration in 1..=max_iters {
        if converged(trace.last().expect("nonempty")) {
            break;
        }
        let jg = j(&g)?;
        let avg = g.zip_with(&jg, |a, b| 0.5 * a + 0.5 * b)?;
        let mut values = clconv(&avg)?.into_values();
        for &idx in &graph_nodes {
            values[idx] = values[idx].max(pi.values()[idx]);
        }
        g = g.with_values(values)?;
        if !membership_report(&g, t, DEFAULT_EQ_TOL)?.verdict {
            return Err(Error::MembershipLost { iteration });
        }
        trace.push(residual(&g)?);
    }
    Ok((g, trace))
}

/// One JSON object per line.
pub fn trace_to_jsonl(trace: &[ResidualReport]) -> Result<String> {
    let mut out = String::new();
    for r in trace {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}
