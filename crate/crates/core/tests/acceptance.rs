//! Acceptance criteria. Runs every suite with seed 0 and prints one
//! PASS/FAIL line per criterion; exits non-zero when any criterion fails.

use convrep::suites::{run, SuiteOutcome};

struct Tally {
    failed: Vec<usize>,
}

impl Tally {
    fn report(&mut self, n: usize, title: &str, parts: &[(String, bool)]) {
        let ok = parts.iter().all(|(_, p)| *p);
        let detail: Vec<String> = parts.iter().map(|(d, p)| format!("{d}{}", if *p { "" } else { " [fails]" })).collect();
        println!("{} criterion {n} ({title}): {}", if ok { "PASS" } else { "FAIL" }, detail.join("; "));
        if !ok {
            self.failed.push(n);
        }
    }
}

fn suite(name: &str) -> SuiteOutcome {
    run(name, 0).unwrap_or_else(|e| panic!("suite {name} errored: {e}"))
}

fn check(o: &SuiteOutcome, name: &str) -> (String, bool) {
    let c = o.checks.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("{} has no check {name}", o.suite));
    (name.to_string(), c.passed)
}

fn at_most(label: &str, v: f64, tol: f64) -> (String, bool) {
    (format!("{label} = {v:e} <= {tol:e}"), v <= tol)
}

fn at_least(label: &str, v: f64, tol: f64) -> (String, bool) {
    (format!("{label} = {v:e} >= {tol:e}"), v >= tol)
}

fn near(label: &str, v: f64, target: f64, tol: f64) -> (String, bool) {
    (format!("{label} = {v} within {tol} of {target}"), (v - target).abs() <= tol)
}

fn main() {
    let mut t = Tally { failed: Vec::new() };

    let o = suite("fy-fixed-point");
    t.report(1, "Fenchel-Young fixed point", &[
        at_most("sup |h - Jh|", o.get("sup_abs_diff"), 1e-9),
        (format!("mismatch = {}", o.get("finite_domain_mismatch")), o.get("finite_domain_mismatch") == 0.0),
    ]);

    let o = suite("fitzpatrick-identity");
    t.report(2, "Fitzpatrick closed form", &[at_most("max |phi - (x+s)^2/4|", o.get("max_abs_error"), 3e-3)]);

    let o = suite("sigma-sandwich");
    let mut parts = Vec::new();
    for op in ["identity", "abs"] {
        parts.push(at_least(&format!("{op}: min(h_FY - phi)"), o.get(&format!("{op}.fy_minus_phi")), -1e-9));
        parts.push(at_least(&format!("{op}: min(sigma - h_FY)"), o.get(&format!("{op}.sigma_minus_fy")), -1e-9));
        for m in ["phi", "sigma", "J sigma"] {
            parts.push(check(&o, &format!("{op}: {m} in H(T)")));
        }
        parts.push(at_least(&format!("{op}: min(sigma - J sigma)"), o.get(&format!("{op}.sigma_minus_jsigma")), -1e-9));
    }
    t.report(3, "sandwich and invariance", &parts);

    let o = suite("biconjugate");
    t.report(4, "discrete biconjugate law", &[
        at_most("max(J^2h - h)", o.get("max_jj_minus_h"), 1e-9),
        at_most("max |clconv - J^2h| off the mask", o.get("max_clconv_minus_jj"), 1e-9),
        check(&o, "mask is +inf"),
    ]);

    let o = suite("enlargement-inclusion");
    let r2 = 2f64.sqrt();
    t.report(5, "strict inclusion", &[
        near("eps-subdifferential lo", o.get("eps_sub.lo"), -1.0, 0.01),
        near("eps-subdifferential hi", o.get("eps_sub.hi"), 1.0, 0.01),
        near("T^eps lo", o.get("t_eps.lo"), -r2, 0.01),
        near("T^eps hi", o.get("t_eps.hi"), r2, 0.01),
        check(&o, "subset"),
        check(&o, "strict"),
    ]);

    let o = suite("additivity");
    t.report(6, "additivity vs weak additivity", &[
        at_least("eps-subdifferential additivity margin", o.get("eps_sub.additivity"), -1e-12),
        at_least("T^eps weak margin", o.get("t_eps.weak_additivity"), -1e-12),
        (format!("T^eps additivity margin = {:e} < -1e-6", o.get("t_eps.additivity")), o.get("t_eps.additivity") < -1e-6),
    ]);

    let o = suite("transport-closure");
    let mut parts = Vec::new();
    for f in ["quadratic", "abs"] {
        parts.push(at_least(&format!("{f}: min epsbar"), o.get(&format!("{f}.min_epsbar")), -1e-12));
        parts.push((format!("{f}: failed trials = {}", o.get(&format!("{f}.failures"))), o.get(&format!("{f}.failures")) == 0.0));
    }
    t.report(7, "transportation closure", &parts);

    let o = suite("hat-construction");
    let mut parts = Vec::new();
    for op in ["identity", "abs"] {
        for h in ["phi", "h_FY"] {
            parts.push(check(&o, &format!("{op}: hat({h}) in H(T)")));
            parts.push(check(&o, &format!("{op}: hat({h}) in H_a(T)")));
        }
    }
    parts.push(at_most("identity: max |hat(phi) - sigma| on the diagonal", o.get("identity.diag_abs_diff"), 1e-6));
    let off = o.get("identity.finite_off_diagonal");
    parts.push((format!("identity: finite off-diagonal nodes of hat(phi) = {off}"), off == 0.0));
    t.report(8, "hat construction", &parts);

    let o = suite("conjugate-oracle");
    t.report(9, "oracle equivalence", &[(format!("mismatched conjugates = {}", o.get("mismatched")), o.get("mismatched") == 0.0)]);

    if t.failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
    } else {
        println!("acceptance: failing criteria {:?}", t.failed);
        std::process::exit(1);
    }
}
