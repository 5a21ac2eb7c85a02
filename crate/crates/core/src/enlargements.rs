//! ε-enlargements: ∂_ε f, T^ε and sublevel sets of representations, the
//! transportation formula, and randomized additivity audits.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form::ClosedFormConvexFunction;
use crate::error::{Error, Result};
use crate::function::{dot, Bifunction};
use crate::graph::OperatorGraph;
use crate::grid::{Grid, DEFAULT_SNAP_TOL};
use crate::par;

/// Slack on the defining inequalities of the set queries.
pub const QUERY_SLACK: f64 = 1e-9;

/// Grid points x* of an enlargement at x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnlargementSet {
    pub x: Vec<f64>,
    pub eps: f64,
    pub members: Vec<Vec<f64>>,
    /// Row-major indices of the members in the dual grid.
    pub member_indices: Vec<usize>,
    /// `(lo, hi)` when the set is one-dimensional and contiguous on the grid.
    pub interval: Option<(f64, f64)>,
    /// Grid resolution; interval endpoints are uncertain by this much.
    pub step: f64,
}

impl EnlargementSet {
    fn collect(x: &[f64], eps: f64, sgrid: &Grid, keep: impl Fn(usize) -> bool + Sync + Send) -> Self {
        let flags = par::map_range(sgrid.len(), keep);
        let member_indices: Vec<usize> = (0..sgrid.len()).filter(|&j| flags[j]).collect();
        let members: Vec<Vec<f64>> = member_indices.iter().map(|&j| sgrid.point(j)).collect();
        let contiguous = member_indices.windows(2).all(|w| w[1] == w[0] + 1);
        let interval = (sgrid.dim() == 1 && !members.is_empty() && contiguous)
            .then(|| (members[0][0], members[members.len() - 1][0]));
        EnlargementSet { x: x.to_vec(), eps, members, member_indices, interval, step: sgrid.max_step() }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains_index(&self, j: usize) -> bool {
        self.member_indices.binary_search(&j).is_ok()
    }

    pub fn is_subset_of(&self, other: &EnlargementSet) -> bool {
        self.member_indices.iter().all(|&j| other.contains_index(j))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeEpsilon(eps))
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// x* ∈ ∂_ε f(x) iff f(x) + f*(x*) − ⟨x, x*⟩ ≤ ε (+ slack).
pub fn in_eps_subdifferential(f: &ClosedFormConvexFunction, x: &[f64], xstar: &[f64], eps: f64, slack: f64) -> Result<bool> {
    Ok(f.fenchel_young_value(x, xstar)? - dot(x, xstar) <= eps + slack)
}

/// ∂_ε f(x) restricted to the nodes of `sgrid`.
pub fn eps_subdifferential(f: &ClosedFormConvexFunction, x: &[f64], eps: f64, sgrid: &Grid) -> Result<EnlargementSet> {
    eps_subdifferential_with_slack(f, x, eps, sgrid, QUERY_SLACK)
}

pub fn eps_subdifferential_with_slack(
    f: &ClosedFormConvexFunction,
    x: &[f64],
    eps: f64,
    sgrid: &Grid,
    slack: f64,
) -> Result<EnlargementSet> {
    check_eps(eps)?;
    f.validate()?;
    check_dim(f.dim(), x.len())?;
    check_dim(f.dim(), sgrid.dim())?;
    let fx = f.eval(x)?;
    Ok(EnlargementSet::collect(x, eps, sgrid, |j| {
        let s = sgrid.point(j);
        let fs = f.conjugate_at(&s).expect("dimension checked");
        fx + fs - dot(x, &s) <= eps + slack
    }))
}

/// x* ∈ T^ε(x) iff ⟨x − y, x* − y*⟩ ≥ −ε (− slack) for every (y, y*) ∈ T.
pub fn in_t_eps(t: &OperatorGraph, x: &[f64], xstar: &[f64], eps: f64, slack: f64) -> bool {
    t.min_monotone_gap(x, xstar) >= -eps - slack
}

/// T^ε(x) restricted to the nodes of `sgrid`.
pub fn t_eps(t: &OperatorGraph, x: &[f64], eps: f64, sgrid: &Grid) -> Result<EnlargementSet> {
    t_eps_with_slack(t, x, eps, sgrid, QUERY_SLACK)
}

pub fn t_eps_with_slack(t: &OperatorGraph, x: &[f64], eps: f64, sgrid: &Grid, slack: f64) -> Result<EnlargementSet> {
    check_eps(eps)?;
    check_dim(t.dim(), x.len())?;
    check_dim(t.dim(), sgrid.dim())?;
    Ok(EnlargementSet::collect(x, eps, sgrid, |j| in_t_eps(t, x, &sgrid.point(j), eps, slack)))
}

/// {x* : h(x, x*) ≤ ⟨x, x*⟩ + ε} on h's dual grid; x must be a node of h's
/// primal grid.
pub fn enlargement_from_h(h: &Bifunction, x: &[f64], eps: f64) -> Result<EnlargementSet> {
    check_eps(eps)?;
    check_dim(h.dim(), x.len())?;
    let ix = h.xgrid().snap(x, DEFAULT_SNAP_TOL).ok_or_else(|| Error::PointOffGrid(x.to_vec()))?;
    let xnode = h.xgrid().point(ix);
    let sgrid = h.sgrid();
    Ok(EnlargementSet::collect(&xnode, eps, sgrid, |j| {
        h.values()[h.index(ix, j)] - dot(&xnode, &sgrid.point(j)) <= eps + QUERY_SLACK
    }))
}

/// Graph of ∂f used for T^ε queries against `sgrid`: abscissae and slopes on
/// `sgrid` refined by two, so midpoints of dual nodes are graph points.
pub fn query_graph(f: &ClosedFormConvexFunction, sgrid: &Grid) -> Result<OperatorGraph> {
    let fine = sgrid.refined(2);
    f.subdifferential_graph(&fine, &fine)
}

/// A point (x, x*) tagged with the ε of the enlargement it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnlargementSample {
    pub x: Vec<f64>,
    pub xstar: Vec<f64>,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportResult {
    pub xbar: Vec<f64>,
    pub xsbar: Vec<f64>,
    pub epsbar: f64,
}

/// Convex combination of two enlargement elements:
/// x̄ = p x₁ + q x₂, x̄* = p x₁* + q x₂*,
/// ε̄ = p ε₁ + q ε₂ + p q ⟨x₁ − x₂, x₁* − x₂*⟩.
pub fn transport(p1: &EnlargementSample, p2: &EnlargementSample, p: f64, q: f64) -> Result<TransportResult> {
    if !(p >= 0.0 && q >= 0.0 && (p + q - 1.0).abs() <= 1e-12) {
        return Err(Error::InvalidWeights { p, q });
    }
    check_eps(p1.eps)?;
    check_eps(p2.eps)?;
    let d = p1.x.len();
    for v in [&p1.xstar, &p2.x, &p2.xstar] {
        check_dim(d, v.len())?;
    }
    let comb = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(u, v)| p * u + q * v).collect() };
    let dx: Vec<f64> = p1.x.iter().zip(&p2.x).map(|(a, b)| a - b).collect();
    let ds: Vec<f64> = p1.xstar.iter().zip(&p2.xstar).map(|(a, b)| a - b).collect();
    Ok(TransportResult {
        xbar: comb(&p1.x, &p2.x),
        xsbar: comb(&p1.xstar, &p2.xstar),
        epsbar: p * p1.eps + q * p2.eps + p * q * dot(&dx, &ds),
    })
}

/// Transport of two ∂_ε f elements together with the closure checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportCheck {
    pub result: TransportResult,
    /// Both inputs satisfy their defining inequality exactly.
    pub inputs_verified: bool,
    /// ε̄ ≥ −1e-12.
    pub epsbar_nonnegative: bool,
    /// f(x̄) + f*(x̄*) ≤ ⟨x̄, x̄*⟩ + ε̄ + 1e-9.
    pub output_member: bool,
}

impl TransportCheck {
    pub fn passed(&self) -> bool {
        !self.inputs_verified || (self.epsbar_nonnegative && self.output_member)
    }
}

pub fn transport_checked(
    f: &ClosedFormConvexFunction,
    p1: &EnlargementSample,
    p2: &EnlargementSample,
    p: f64,
    q: f64,
) -> Result<TransportCheck> {
    let result = transport(p1, p2, p, q)?;
    let inputs_verified = in_eps_subdifferential(f, &p1.x, &p1.xstar, p1.eps, 0.0)?
        && in_eps_subdifferential(f, &p2.x, &p2.xstar, p2.eps, 0.0)?;
    let epsbar_nonnegative = result.epsbar >= -1e-12;
    let output_member = in_eps_subdifferential(f, &result.xbar, &result.xsbar, result.epsbar, QUERY_SLACK)?;
    Ok(TransportCheck { result, inputs_verified, epsbar_nonnegative, output_member })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditResult {
    pub property: String,
    pub n_samples: usize,
    /// min over pairs of ⟨x₁ − x₂, x₁* − x₂*⟩ + bound(ε₁, ε₂); `+∞` with
    /// fewer than two samples.
    #[serde(with = "crate::ext::f64_serde")]
    pub worst_margin: f64,
    pub witness_pair: Option<(EnlargementSample, EnlargementSample)>,
}

fn pair_audit(property: &str, samples: &[EnlargementSample], bound: impl Fn(f64, f64) -> f64 + Sync + Send) -> AuditResult {
    let n = samples.len();
    let per_row = par::map_range(n, |i| {
        let a = &samples[i];
        let mut best = (f64::INFINITY, usize::MAX);
        for (j, b) in samples.iter().enumerate().skip(i + 1) {
            let pair: f64 = a.x.iter().zip(&b.x).zip(a.xstar.iter().zip(&b.xstar)).map(|((x1, x2), (s1, s2))| (x1 - x2) * (s1 - s2)).sum();
            let margin = pair + bound(a.eps, b.eps);
            if margin < best.0 {
                best = (margin, j);
            }
        }
        best
    });
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for (i, &(m, j)) in per_row.iter().enumerate() {
        if m < worst {
            worst = m;
            witness = Some((samples[i].clone(), samples[j].clone()));
        }
    }
    AuditResult { property: property.to_string(), n_samples: n, worst_margin: worst, witness_pair: witness }
}

/// Worst margin of ⟨x₁ − x₂, x₁* − x₂*⟩ ≥ −(ε₁ + ε₂) over all unordered pairs.
pub fn additivity_audit(samples: &[EnlargementSample]) -> AuditResult {
    pair_audit("additivity", samples, |e1, e2| e1 + e2)
}

/// Worst margin of ⟨x₁ − x₂, x₁* − x₂*⟩ ≥ −(√ε₁ + √ε₂)².
pub fn weak_additivity_audit(samples: &[EnlargementSample]) -> AuditResult {
    pair_audit("weak-additivity", samples, |e1, e2| (e1.sqrt() + e2.sqrt()).powi(2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionAudit {
    /// ∂_ε f(x) ⊆ (∂f)^ε(x) on the grid.
    pub subset: bool,
    /// (∂f)^ε(x) has grid points outside ∂_ε f(x).
    pub strict: bool,
    pub eps_subdifferential: EnlargementSet,
    pub t_eps: EnlargementSet,
    /// Points of (∂f)^ε(x) outside ∂_ε f(x).
    pub witnesses: Vec<Vec<f64>>,
    /// Points of ∂_ε f(x) outside (∂f)^ε(x); empty when `subset`.
    pub missing: Vec<Vec<f64>>,
}

/// Compares ∂_ε f(x) with (∂f)^ε(x), the latter against [`query_graph`].
pub fn inclusion_audit(f: &ClosedFormConvexFunction, x: &[f64], eps: f64, sgrid: &Grid) -> Result<InclusionAudit> {
    let small = eps_subdifferential(f, x, eps, sgrid)?;
    let big = t_eps(&query_graph(f, sgrid)?, x, eps, sgrid)?;
    let missing: Vec<Vec<f64>> = small.member_indices.iter().filter(|&&j| !big.contains_index(j)).map(|&j| sgrid.point(j)).collect();
    let witnesses: Vec<Vec<f64>> = big.member_indices.iter().filter(|&&j| !small.contains_index(j)).map(|&j| sgrid.point(j)).collect();
    Ok(InclusionAudit { subset: missing.is_empty(), strict: !witnesses.is_empty(), eps_subdifferential: small, t_eps: big, witnesses, missing })
}

/// Generator for stream `stream` of the experiment seeded with `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const MAX_REJECTIONS_PER_SAMPLE: usize = 10_000;

fn rejection_sample(
    n: usize,
    rng: &mut ChaCha8Rng,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> EnlargementSample,
    accept: impl Fn(&EnlargementSample) -> Result<bool>,
) -> Result<Vec<EnlargementSample>> {
    let mut out = Vec::with_capacity(n);
    let mut tries = 0;
    while out.len() < n {
        tries += 1;
        if tries > MAX_REJECTIONS_PER_SAMPLE * n.max(1) {
            return Err(Error::Precondition(format!("sampler accepted only {} of {n} points", out.len())));
        }
        let s = draw(rng);
        if accept(&s)? {
            out.push(s);
        }
    }
    Ok(out)
}

/// Verified elements of ∂_ε f for a scalar f: x uniform on `x_box`, x*
/// uniform on `s_box`, ε uniform on `eps_range`; kept when the defining
/// inequality holds with no slack.
pub fn sample_eps_subdifferential(
    f: &ClosedFormConvexFunction,
    x_box: (f64, f64),
    s_box: (f64, f64),
    eps_range: (f64, f64),
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<EnlargementSample>> {
    check_eps(eps_range.0)?;
    check_dim(f.dim(), 1)?;
    rejection_sample(
        n,
        rng,
        |r| EnlargementSample {
            x: vec![r.gen_range(x_box.0..=x_box.1)],
            xstar: vec![r.gen_range(s_box.0..=s_box.1)],
            eps: r.gen_range(eps_range.0..=eps_range.1),
        },
        |s| in_eps_subdifferential(f, &s.x, &s.xstar, s.eps, 0.0),
    )
}

/// Verified elements of T^ε: x and x* drawn uniformly from the nodes of
/// `nodes`, ε uniform on `eps_range`; kept when the defining inequality holds
/// against every point of `t` with no slack.
pub fn sample_t_eps(
    t: &OperatorGraph,
    nodes: &Grid,
    eps_range: (f64, f64),
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<EnlargementSample>> {
    check_eps(eps_range.0)?;
    check_dim(t.dim(), nodes.dim())?;
    rejection_sample(
        n,
        rng,
        |r| EnlargementSample {
            x: nodes.point(r.gen_range(0..nodes.len())),
            xstar: nodes.point(r.gen_range(0..nodes.len())),
            eps: r.gen_range(eps_range.0..=eps_range.1),
        },
        |s| Ok(in_t_eps(t, &s.x, &s.xstar, s.eps, 0.0)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::ClosedFormConvexFunction as Cf;
    use crate::representations::{fenchel_young, fitzpatrick, sigma};
    use proptest::prelude::*;
    use rand::Rng;

    fn line(lo: f64, hi: f64, n: usize) -> Grid {
        Grid::line(lo, hi, n).unwrap()
    }

    fn sample(x: f64, s: f64, eps: f64) -> EnlargementSample {
        EnlargementSample { x: vec![x], xstar: vec![s], eps }
    }

    #[test]
    fn eps_subdifferential_examples() {
        let sg = line(-4.0, 4.0, 801);
        let e = eps_subdifferential(&Cf::half_square(), &[0.0], 0.5, &sg).unwrap();
        assert_eq!(e.interval, Some((-1.0, 1.0)));
        assert_eq!(e.step, 0.01);
        let e0 = eps_subdifferential(&Cf::half_square(), &[1.0], 0.0, &sg).unwrap();
        assert_eq!(e0.members, vec![vec![1.0]]);
        let a = eps_subdifferential(&Cf::AbsValue, &[0.0], 0.0, &sg).unwrap();
        assert_eq!(a.interval, Some((-1.0, 1.0)));
        assert!(matches!(eps_subdifferential(&Cf::AbsValue, &[0.0], -0.1, &sg), Err(Error::NegativeEpsilon(_))));
    }

    #[test]
    fn t_eps_examples() {
        let g = line(-4.0, 4.0, 801);
        let id = OperatorGraph::identity(&g).unwrap();
        let e = t_eps(&id, &[0.0], 0.5, &g).unwrap();
        let (lo, hi) = e.interval.unwrap();
        assert!((lo + 2f64.sqrt()).abs() <= 0.01 && (hi - 2f64.sqrt()).abs() <= 0.01);
        // s = 1.41 passes: the nearest graph points to s/2 sit at 0.70 and 0.71
        assert_eq!((lo, hi), (-1.41, 1.41));

        let coarse = line(-4.0, 4.0, 81);
        let fine = OperatorGraph::identity(&coarse.refined(2)).unwrap();
        let e0 = t_eps(&fine, &[1.5], 0.0, &coarse).unwrap();
        assert_eq!(e0.members, vec![vec![1.5]]);

        let origin = OperatorGraph::new(vec![(vec![0.0], vec![0.0])]).unwrap();
        let half = t_eps(&origin, &[1.0], 0.0, &coarse).unwrap();
        assert_eq!(half.interval, Some((0.0, 4.0)));
        assert!(matches!(t_eps(&origin, &[1.0], -1.0, &coarse), Err(Error::NegativeEpsilon(_))));
    }

    #[test]
    fn sublevel_sets_of_representations() {
        let g = line(-4.0, 4.0, 81);
        let id = OperatorGraph::identity(&g).unwrap();
        let fy = fenchel_young(&Cf::half_square(), &g, &g).unwrap();
        let phi = fitzpatrick(&id, &g, &g).unwrap();
        let sig = sigma(&id, &g, &g).unwrap();
        for (x, eps) in [(0.0, 0.5), (1.3, 0.0), (-2.0, 1.7), (4.0, 0.25)] {
            assert_eq!(enlargement_from_h(&fy, &[x], eps).unwrap(), eps_subdifferential(&Cf::half_square(), &[x], eps, &g).unwrap());
            assert_eq!(enlargement_from_h(&phi, &[x], eps).unwrap(), t_eps(&id, &[x], eps, &g).unwrap());
            assert_eq!(enlargement_from_h(&sig, &[x], eps).unwrap().members, vec![vec![x]]);
        }
        assert!(matches!(enlargement_from_h(&fy, &[0.05], 0.1), Err(Error::PointOffGrid(_))));
    }

    #[test]
    fn transport_examples() {
        let a = sample(0.3, -0.7, 0.2);
        let b = sample(1.0, 2.0, 0.1);
        let r = transport(&a, &b, 1.0, 0.0).unwrap();
        assert_eq!((r.xbar, r.xsbar, r.epsbar), (a.x.clone(), a.xstar.clone(), a.eps));

        let c = transport_checked(&Cf::half_square(), &sample(0.0, 0.0, 0.0), &sample(2.0, 2.0, 0.0), 0.5, 0.5).unwrap();
        assert_eq!(c.result, TransportResult { xbar: vec![1.0], xsbar: vec![1.0], epsbar: 1.0 });
        assert!(c.inputs_verified && c.passed());
        let e = eps_subdifferential(&Cf::half_square(), &[1.0], 1.0, &line(-4.0, 4.0, 81)).unwrap();
        assert!(e.members.contains(&vec![1.0]));

        assert!(matches!(transport(&a, &b, 0.7, 0.7), Err(Error::InvalidWeights { .. })));
        assert!(matches!(transport(&a, &b, -0.5, 1.5), Err(Error::InvalidWeights { .. })));
        assert!(matches!(transport(&sample(0.0, 0.0, -1.0), &b, 0.5, 0.5), Err(Error::NegativeEpsilon(_))));
    }

    #[test]
    fn transport_closure_for_abs() {
        let f = Cf::AbsValue;
        let mut rng = rng_for(3, 0);
        let s = sample_eps_subdifferential(&f, (-2.0, 2.0), (-1.0, 1.0), (0.0, 1.0), 2000, &mut rng).unwrap();
        for pair in s.chunks(2) {
            let p = rng.gen_range(0.0..=1.0);
            let c = transport_checked(&f, &pair[0], &pair[1], p, 1.0 - p).unwrap();
            assert!(c.inputs_verified && c.passed(), "{c:?}");
        }
    }

    #[test]
    fn additivity_audit_examples() {
        let f = Cf::half_square();
        let s = sample_eps_subdifferential(&f, (-2.0, 2.0), (-4.0, 4.0), (0.0, 1.0), 500, &mut rng_for(1, 0)).unwrap();
        assert!(additivity_audit(&s).worst_margin >= -1e-12);

        let pair = [sample(0.0, 2.0, 1.0), sample(0.0, -2.0, 1.0)];
        assert_eq!(additivity_audit(&pair).worst_margin, 2.0);

        let g = line(-4.0, 4.0, 81);
        let fine = OperatorGraph::identity(&g.refined(2)).unwrap();
        let s = sample_t_eps(&fine, &g, (1.0, 1.0), 500, &mut rng_for(2, 0)).unwrap();
        let strong = additivity_audit(&s);
        assert!(strong.worst_margin < -1e-6, "{strong:?}");
        let (a, b) = strong.witness_pair.clone().unwrap();
        assert!(weak_additivity_audit(&[a, b]).worst_margin >= -1e-12);
        assert!(weak_additivity_audit(&s).worst_margin >= -1e-12);

        let hand = [sample(1.0, -1.0, 1.0), sample(-1.0, 1.0, 1.0)];
        assert!(hand.iter().all(|p| in_t_eps(&fine, &p.x, &p.xstar, p.eps, 0.0)));
        assert_eq!(additivity_audit(&hand).worst_margin, -2.0);
        assert_eq!(weak_additivity_audit(&hand).worst_margin, 0.0);

        let mono = [sample(-1.0, -1.0, 0.0), sample(2.0, 2.0, 0.0)];
        assert!(additivity_audit(&mono).worst_margin >= 0.0);
        assert!(weak_additivity_audit(&mono).worst_margin >= 0.0);
        assert_eq!(additivity_audit(&mono[..1]).worst_margin, f64::INFINITY);
    }

    #[test]
    fn audit_json_round_trip() {
        let a = additivity_audit(&[sample(1.0, -1.0, 1.0), sample(-1.0, 1.0, 1.0)]);
        let back: AuditResult = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(back, a);
        let empty = additivity_audit(&[]);
        let json = serde_json::to_string(&empty).unwrap();
        assert!(json.contains("\"inf\""));
        assert_eq!(serde_json::from_str::<AuditResult>(&json).unwrap(), empty);
    }

    #[test]
    fn inclusion_examples() {
        let sg = line(-4.0, 4.0, 801);
        let r = inclusion_audit(&Cf::half_square(), &[0.0], 0.5, &sg).unwrap();
        assert!(r.subset && r.strict);
        assert!(r.witnesses.contains(&vec![1.2]));
        let (lo, hi) = r.t_eps.interval.unwrap();
        assert!((hi - 2f64.sqrt()).abs() <= 0.01 && (lo + 2f64.sqrt()).abs() <= 0.01);

        let r0 = inclusion_audit(&Cf::half_square(), &[0.0], 0.0, &sg).unwrap();
        assert!(r0.subset && !r0.strict);
        assert_eq!(r0.t_eps.members, vec![vec![0.0]]);

        // the continuum sets coincide at [0.9, 1]; the box-limited graph of
        // ∂|·| lets slopes slightly above 1 through
        let r = inclusion_audit(&Cf::AbsValue, &[1.0], 0.1, &sg).unwrap();
        assert!(r.subset);
        assert_eq!(r.eps_subdifferential.interval, Some((0.9, 1.0)));
        assert!(r.strict);
        assert!(r.witnesses.iter().all(|w| w[0] > 1.0 && w[0] < 1.04));
    }

    #[test]
    fn samplers_are_deterministic_per_seed() {
        let f = Cf::half_square();
        let a = sample_eps_subdifferential(&f, (-1.0, 1.0), (-2.0, 2.0), (0.0, 1.0), 50, &mut rng_for(9, 4)).unwrap();
        let b = sample_eps_subdifferential(&f, (-1.0, 1.0), (-2.0, 2.0), (0.0, 1.0), 50, &mut rng_for(9, 4)).unwrap();
        let c = sample_eps_subdifferential(&f, (-1.0, 1.0), (-2.0, 2.0), (0.0, 1.0), 50, &mut rng_for(9, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn a3_members_are_eps_monotone_against_the_graph() {
        let sg = line(-3.0, 3.0, 121);
        for f in [Cf::half_square(), Cf::AbsValue, Cf::quadratic(2.0, -1.0, 0.5).unwrap()] {
            let graph = f.subdifferential_graph(&sg, &sg).unwrap();
            for (x, eps) in [(0.0, 0.3), (1.0, 0.1), (-2.5, 1.0)] {
                let e = eps_subdifferential(&f, &[x], eps, &sg).unwrap();
                for s in &e.members {
                    assert!(graph.min_monotone_gap(&[x], s) >= -eps - 1e-9);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn queries_grow_with_eps(xi in 0usize..81, e1 in 0.0f64..2.0, de in 0.0f64..2.0, abs in any::<bool>()) {
            let g = line(-4.0, 4.0, 81);
            let x = g.point(xi);
            let e2 = e1 + de;
            let f = if abs { Cf::AbsValue } else { Cf::half_square() };
            let graph = query_graph(&f, &g).unwrap();
            let fy = fenchel_young(&f, &g, &g).unwrap();
            let a1 = eps_subdifferential(&f, &x, e1, &g).unwrap();
            let a2 = eps_subdifferential(&f, &x, e2, &g).unwrap();
            prop_assert!(a1.is_subset_of(&a2));
            prop_assert!(eps_subdifferential(&f, &x, 0.0, &g).unwrap().is_subset_of(&a1));
            let b1 = t_eps(&graph, &x, e1, &g).unwrap();
            prop_assert!(b1.is_subset_of(&t_eps(&graph, &x, e2, &g).unwrap()));
            prop_assert!(t_eps(&graph, &x, 0.0, &g).unwrap().is_subset_of(&b1));
            prop_assert!(a1.is_subset_of(&b1));
            let c1 = enlargement_from_h(&fy, &x, e1).unwrap();
            prop_assert!(c1.is_subset_of(&enlargement_from_h(&fy, &x, e2).unwrap()));
            prop_assert_eq!(c1, a1);
        }

        #[test]
        fn exact_membership_survives_slack(x in -2.0f64..2.0, s in -2.0f64..2.0, eps in 0.0f64..1.0) {
            for f in [Cf::half_square(), Cf::AbsValue] {
                if in_eps_subdifferential(&f, &[x], &[s], eps, 0.0).unwrap() {
                    prop_assert!(in_eps_subdifferential(&f, &[x], &[s], eps, 1e-9).unwrap());
                }
            }
        }
    }
}
