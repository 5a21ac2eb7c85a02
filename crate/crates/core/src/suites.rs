//! Named, seeded experiment suites. Each suite computes a set of metrics and
//! checks them against fixed tolerances.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form::{sample_function, ClosedFormConvexFunction as Cf};
use crate::conjugation::{clconv, conjugate_bruteforce, conjugate_fast, j, outside_domain_hull};
use crate::enlargements::{
    additivity_audit, inclusion_audit, rng_for, sample_eps_subdifferential, sample_t_eps, transport_checked,
    weak_additivity_audit,
};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::fixedpoint::{hat, heuristic_fixed_point, is_in_ha, residual};
use crate::function::{Bifunction, GridFunction};
use crate::graph::OperatorGraph;
use crate::grid::Grid;
use crate::io::bifunction_csv;
use crate::representations::{fenchel_young, fitzpatrick, membership_report, sigma, DEFAULT_EQ_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteInfo {
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, ExtReal>,
    /// Extra files (name, contents) for the caller to write.
    #[serde(skip)]
    pub artifacts: Vec<(String, String)>,
}

impl SuiteOutcome {
    fn new(suite: &str, seed: u64) -> Self {
        SuiteOutcome { suite: suite.into(), seed, passed: true, checks: Vec::new(), metrics: BTreeMap::new(), artifacts: Vec::new() }
    }

    fn metric(&mut self, name: &str, value: f64) -> f64 {
        self.metrics.insert(name.into(), ExtReal::from_f64(value));
        value
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    /// Metric value; panics on an unknown name.
    pub fn get(&self, name: &str) -> f64 {
        self.metrics.get(name).unwrap_or_else(|| panic!("suite {} has no metric {name}", self.suite)).to_f64()
    }
}

type SuiteFn = fn(u64) -> Result<SuiteOutcome>;

const SUITES: &[(&str, &str, SuiteFn)] = &[
    ("additivity", "additivity of eps-subdifferentials, weak additivity and an additivity witness for T^eps", additivity),
    ("biconjugate", "J^2 h <= h and clconv = J^2 inside the domain hull on 100 random bifunctions", biconjugate),
    ("conjugate-oracle", "linear-time conjugate equals brute force on 100 random convex samples", conjugate_oracle),
    ("enlargement-inclusion", "eps-subdifferential of x^2/2 strictly inside the T^eps enlargement of its gradient", enlargement_inclusion),
    ("fitzpatrick-identity", "Fitzpatrick function of the identity against (x+x*)^2/4", fitzpatrick_identity),
    ("fy-fixed-point", "Fenchel-Young function of x^2/2 is a fixed point of J", fy_fixed_point),
    ("hat-construction", "max(h, Jh) lands in H_a(T) and recovers sigma from the Fitzpatrick function", hat_construction),
    ("sigma-sandwich", "phi <= h_FY <= sigma, membership of phi, sigma and J sigma, sigma >= J sigma", sigma_sandwich),
    ("transport-closure", "transportation formula keeps convex combinations inside the enlargement", transport_closure),
];

/// Registered suites in alphabetical order.
pub fn registry() -> Vec<SuiteInfo> {
    SUITES.iter().map(|(n, d, _)| SuiteInfo { name: n.to_string(), description: d.to_string() }).collect()
}

pub fn run(name: &str, seed: u64) -> Result<SuiteOutcome> {
    match SUITES.iter().find(|(n, _, _)| *n == name) {
        Some((_, _, f)) => f(seed),
        None => Err(Error::UnknownSuite { name: name.into(), valid: SUITES.iter().map(|(n, _, _)| n.to_string()).collect() }),
    }
}

fn line(lo: f64, hi: f64, n: usize) -> Grid {
    Grid::line(lo, hi, n).expect("static grid")
}

/// The two operators used throughout: the identity on [−4, 4] (81 nodes) and
/// ∂|·| on [−2, 2] (41 nodes), each with the function whose gradient it is.
fn operators() -> Result<Vec<(&'static str, Grid, OperatorGraph, Cf)>> {
    let gi = line(-4.0, 4.0, 81);
    let ga = line(-2.0, 2.0, 41);
    Ok(vec![
        ("identity", gi.clone(), OperatorGraph::identity(&gi)?, Cf::half_square()),
        ("abs", ga.clone(), Cf::AbsValue.subdifferential_graph(&ga, &ga)?, Cf::AbsValue),
    ])
}

/// min over common-finite nodes of b − a.
fn min_gap(a: &Bifunction, b: &Bifunction) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| y - x)
        .fold(f64::INFINITY, f64::min)
}

fn fy_fixed_point(seed: u64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("fy-fixed-point", seed);
    let g = line(-4.0, 4.0, 81);
    let h = fenchel_young(&Cf::half_square(), &g, &g)?;
    let r = residual(&h)?;
    let sup = out.metric("sup_abs_diff", r.sup_abs_diff.to_f64());
    let mismatch = out.metric("finite_domain_mismatch", r.finite_domain_mismatch as f64);
    out.check("residual", sup <= 1e-9, format!("sup |h - Jh| = {sup:e}"));
    out.check("mismatch", mismatch == 0.0, format!("{mismatch} mismatched nodes"));
    let t = OperatorGraph::identity(&g)?;
    let (_, trace) = heuristic_fixed_point(&h, &t, 20, 1e-6)?;
    out.check("heuristic-stops", trace.len() == 1, format!("{} trace entries", trace.len()));
    out.artifacts.push(("h_fy.csv".into(), bifunction_csv(&h)));
    Ok(out)
}

fn fitzpatrick_identity(seed: u64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("fitzpatrick-identity", seed);
    let g = line(-4.0, 4.0, 81);
    let phi = fitzpatrick(&OperatorGraph::identity(&g)?, &g, &g)?;
    let mut worst = 0.0_f64;
    for idx in 0..phi.len() {
        let (x, s) = phi.node(idx);
        if x[0].abs() <= 2.0 + 1e-12 && s[0].abs() <= 2.0 + 1e-12 {
            worst = worst.max((phi.values()[idx] - (x[0] + s[0]).powi(2) / 4.0).abs());
        }
    }
    let worst = out.metric("max_abs_error", worst);
    out.check("closed-form", worst <= 3e-3, format!("max |phi - (x+s)^2/4| on [-2,2]^2 = {worst:e}"));
    out.artifacts.push(("phi.csv".into(), bifunction_csv(&phi)));
    Ok(out)
}

fn sigma_sandwich(seed: u64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("sigma-sandwich", seed);
    for (name, g, t, f) in operators()? {
        let phi = fitzpatrick(&t, &g, &g)?;
        let fy = fenchel_young(&f, &g, &g)?;
        let sig = sigma(&t, &g, &g)?;
        let jsig = j(&sig)?;
        let lower = out.metric(&format!("{name}.fy_minus_phi"), min_gap(&phi, &fy));
        let upper = out.metric(&format!("{name}.sigma_minus_fy"), min_gap(&fy, &sig));
        out.check(&format!("{name}: phi <= h_FY"), lower >= -1e-9, format!("margin {lower:e}"));
        out.check(&format!("{name}: h_FY <= sigma"), upper >= -1e-9, format!("margin {upper:e}"));
        for (label, h) in [("phi", &phi), ("sigma", &sig), ("J sigma", &jsig)] {
            let r = membership_report(h, &t, DEFAULT_EQ_TOL)?;
            out.check(&format!("{name}: {label} in H(T)"), r.verdict, serde_json::to_string(&r)?);
        }
        let ha = out.metric(&format!("{name}.sigma_minus_jsigma"), min_gap(&jsig, &sig));
        out.check(&format!("{name}: sigma >= J sigma"), ha >= -1e-9, format!("margin {ha:e}"));
        if name == "identity" {
            out.artifacts.push(("sigma_identity.csv".into(), bifunction_csv(&sig)));
        }
    }
    Ok(out)
}

fn random_bifunction(rng: &mut impl Rng, g: &Grid) -> Result<Bifunction> {
    let n = g.len() * g.len();
    let mut values: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.3) { f64::INFINITY } else { rng.gen_range(-2.0..2.0) }).collect();
    let k = rng.gen_range(0..n);
    values[k] = rng.gen_range(-2.0..2.0);
    Bifunction::new(g.clone(), g.clone(), values)
}

fn biconjugate(seed: u64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("biconjugate", seed);
    let g = line(-2.0, 2.0, 21);
    let product = Grid::product(&g, &g)?;
    let mut rng = rng_for(seed, 1);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_clconv = 0.0_f64;
    let mut masked = 0usize;
    let mut mask_violations = 0usize;
    for _ in 0..100 {
        let h = random_bifunction(&mut rng, &g)?;
        let jj = j(&j(&h)?)?;
        for (a, b) in jj.values().iter().zip(h.values()) {
            if b.is_finite() {
                worst_excess = worst_excess.max(a - b);
            }
        }
        let c = clconv(&h)?;
        let outside = outside_domain_hull(h.values(), &product);
        for i in 0..h.len() {
            if outside[i] {
                masked += 1;
                mask_violations += (c.values()[i] != f64::INFINITY) as usize;
            } else {
                worst_clconv = worst_clconv.max((c.values()[i] - jj.values()[i]).abs());
            }
        }
    }
    let excess = out.metric("max_jj_minus_h", worst_excess);
    let diff = out.metric("max_clconv_minus_jj", worst_clconv);
    out.metric("masked_nodes", masked as f64);
    out.check("J^2 h <= h", excess <= 1e-9, format!("max J^2h - h = {excess:e}"));
    out.check("clconv = J^2 off the mask", diff <= 1e-9, format!("max |clconv - J^2h| = {diff:e}"));
    out.check("mask is +inf", mask_violations == 0, format!("{masked} masked nodes, {mask_violations} finite"));
    Ok(out)
}

fn enlargement_inclusion(seed: u64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("enlargement-inclusion", seed);
    let sg = line(-4.0, 4.0, 801);
    let r = inclusion_audit(&Cf::half_square(), &[0.0], 0.5, &sg)?;
    let (alo, ahi) = r.eps_subdifferential.interval.unwrap_or((f64::NAN, f64::NAN));
    let (blo, bhi) = r.t_eps.interval.unwrap_or((f64::NAN, f64::NAN));
    out.metric("eps_sub.lo", alo);
    out.metric("eps_sub.hi", ahi);
    out.metric("t_eps.lo", blo);
    out.metric("t_eps.hi", bhi);
    let root2 = 2f64.sqrt();
    out.check("eps-subdifferential endpoints", (alo + 1.0).abs() <= 0.01 && (ahi - 1.0).abs() <= 0.01, format!("[{alo}, {ahi}]"));
    out.check("T^eps endpoints", (blo + root2).abs() <= 0.01 && (bhi - root2).abs() <= 0.01, format!("[{blo}, {bhi}]"));
    out.check("subset", r.subset, format!("{} missing", r.missing.len()));
    out.check("strict", r.strict, format!("{} witnesses", r.witnesses.len()));
    let abs = inclusion_audit(&Cf::AbsValue, &[1.0], 0.1, &sg)?;
    out.check("abs subset", abs.subset, serde_json::to_string(&abs.t_eps.interval)?);
    out.metric("abs.strict", abs.strict as u8 as f64);
    Ok(out)
}

const AUDIT_SAMPLES: usize = 10_000;

fn additivity(seed: u64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("additivity", seed);
    let f = Cf::half_square();
    let sub = sample_eps_subdifferential(&f, (-2.0, 2.0), (-4.0, 4.0), (0.0, 1.0), AUDIT_SAMPLES, &mut rng_for(seed, 2))?;
    let a = additivity_audit(&sub);
    let m = out.metric("eps_sub.additivity", a.worst_margin);
    out.check("eps-subdifferential additivity", m >= -1e-12, serde_json::to_string(&a)?);

    let nodes = line(-4.0, 4.0, 81);
    let graph = OperatorGraph::identity(&nodes.refined(2))?;
    let te = sample_t_eps(&graph, &nodes, (0.0, 1.0), AUDIT_SAMPLES, &mut rng_for(seed, 3))?;
    let w = weak_additivity_audit(&te);
    let m = out.metric("t_eps.weak_additivity", w.worst_margin);
    out.check("T^eps weak additivity", m >= -1e-12, serde_json::to_string(&w)?);

    let te1 = sample_t_eps(&graph, &nodes, (1.0, 1.0), AUDIT_SAMPLES, &mut rng_for(seed, 4))?;
    let s = additivity_audit(&te1);
    let m = out.metric("t_eps.additivity", s.worst_margin);
    out.check("T^eps additivity witness", m < -1e-6, serde_json::to_string(&s)?);
    if let Some((p, q)) = s.witness_pair {
        let again = weak_additivity_audit(&[p, q]).worst_margin;
        out.metric("t_eps.witness_weak_margin", again);
        out.check("witness passes the weak bound", again >= -1e-12, format!("margin {again:e}"));
    }
    Ok(out)
}

fn transport_closure(seed: u64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("transport-closure", seed);
    let cases = [("quadratic", Cf::half_square(), (-4.0, 4.0)), ("abs", Cf::AbsValue, (-1.0, 1.0))];
    for (k, (name, f, s_box)) in cases.into_iter().enumerate() {
        let mut rng = rng_for(seed, 10 + k as u64);
        let samples = sample_eps_subdifferential(&f, (-2.0, 2.0), s_box, (0.0, 1.0), 2 * AUDIT_SAMPLES, &mut rng)?;
        let mut min_epsbar = f64::INFINITY;
        let mut failures = 0;
        for pair in samples.chunks(2) {
            let p = rng.gen_range(0.0..=1.0);
            let c = transport_checked(&f, &pair[0], &pair[1], p, 1.0 - p)?;
            min_epsbar = min_epsbar.min(c.result.epsbar);
            failures += (!(c.inputs_verified && c.epsbar_nonnegative && c.output_member)) as usize;
        }
        let m = out.metric(&format!("{name}.min_epsbar"), min_epsbar);
        out.metric(&format!("{name}.failures"), failures as f64);
        out.check(&format!("{name}: closure"), failures == 0 && m >= -1e-12, format!("{failures} failures, min epsbar {m:e}"));
    }
    Ok(out)
}

fn hat_construction(seed: u64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("hat-construction", seed);
    for (name, g, t, f) in operators()? {
        let phi = fitzpatrick(&t, &g, &g)?;
        let fy = fenchel_young(&f, &g, &g)?;
        for (label, h) in [("phi", &phi), ("h_FY", &fy)] {
            let hh = hat(h)?;
            let r = membership_report(&hh, &t, DEFAULT_EQ_TOL)?;
            out.check(&format!("{name}: hat({label}) in H(T)"), r.verdict, serde_json::to_string(&r)?);
            out.check(&format!("{name}: hat({label}) in H_a(T)"), is_in_ha(&hh, 1e-9)?, "");
        }
        if name == "identity" {
            let hp = hat(&phi)?;
            let sig = sigma(&t, &g, &g)?;
            let mut diag = 0.0_f64;
            let mut finite_off = 0usize;
            let mut min_off = f64::INFINITY;
            for idx in 0..hp.len() {
                let (ix, is) = hp.split_index(idx);
                if ix == is {
                    diag = diag.max((hp.values()[idx] - sig.values()[idx]).abs());
                } else if hp.values()[idx].is_finite() {
                    finite_off += 1;
                    min_off = min_off.min(hp.values()[idx]);
                }
            }
            let diag = out.metric("identity.diag_abs_diff", diag);
            let off = out.metric("identity.finite_off_diagonal", finite_off as f64);
            out.metric("identity.min_off_diagonal", min_off);
            out.check("identity: hat(phi) = sigma on the diagonal", diag <= 1e-6, format!("max diff {diag:e}"));
            out.check("identity: hat(phi) = +inf off the diagonal", off == 0.0, format!("{off} finite off-diagonal nodes, smallest value {min_off}"));
        }
    }
    Ok(out)
}

/// Samples of a random convex function: the slopes increase by random steps.
pub fn random_convex_samples(rng: &mut impl Rng, grid: &Grid) -> Result<GridFunction> {
    let step = grid.axes()[0].step();
    let mut slope = rng.gen_range(-6.0..0.0);
    let mut values = vec![rng.gen_range(-1.0..1.0)];
    for _ in 1..grid.len() {
        let last = *values.last().expect("nonempty");
        values.push(last + slope * step);
        slope += rng.gen_range(0.0..0.2);
    }
    GridFunction::new(grid.clone(), values)
}

fn conjugate_oracle(seed: u64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("conjugate-oracle", seed);
    let g = line(-2.0, 2.0, 201);
    let mut rng = rng_for(seed, 5);
    let mut mismatched = 0;
    for _ in 0..100 {
        let f = random_convex_samples(&mut rng, &g)?;
        if conjugate_fast(&f, &g)? != conjugate_bruteforce(&f, &g)? {
            mismatched += 1;
        }
    }
    // the closed forms as well
    for f in [Cf::half_square(), Cf::AbsValue] {
        let s = sample_function(&f, &g)?;
        mismatched += (conjugate_fast(&s, &g)? != conjugate_bruteforce(&s, &g)?) as usize;
    }
    let m = out.metric("mismatched", mismatched as f64);
    out.check("fast = brute force", m == 0.0, format!("{m} of 102 differ"));
    Ok(out)
}
