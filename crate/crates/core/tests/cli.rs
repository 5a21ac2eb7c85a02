use std::path::Path;
use std::process::{Command, Output};

use convrep::enlargements::{AuditResult, TransportCheck};
use convrep::fixedpoint::ResidualReport;
use convrep::representations::MembershipReport;
use convrep::suites::SuiteOutcome;
use convrep::{pi_bifunction, Bifunction, Grid};

const QUAD: &str = r#"{"kind":"quadratic","a":1,"b":0,"c":0}"#;
const GRID: &str = r#"{"lo":-2,"hi":2,"n":21}"#;

fn convrep(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convrep")).env("CONVREP_OUT", out).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn conjugate_of_half_square() {
    let dir = tempfile::tempdir().unwrap();
    let o = convrep(dir.path(), &["conjugate", "--f", QUAD, "--grid", GRID]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = read(dir.path(), "conjugate.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("xstar,value"));
    for l in lines {
        let (s, v) = l.split_once(',').unwrap();
        let (s, v): (f64, f64) = (s.parse().unwrap(), v.parse().unwrap());
        assert!((v - s * s / 2.0).abs() < 1e-12, "{l}");
    }
}

#[test]
fn csv_output_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        assert_eq!(code(&convrep(dir, &["sigma", "--f", r#"{"kind":"abs"}"#, "--grid", GRID])), 0);
        let args = ["audit", "--property", "weak-additivity", "--f", QUAD, "--grid", GRID, "--samples", "300", "--seed", "7"];
        assert_eq!(code(&convrep(dir, &args)), 0);
    }
    for f in ["sigma.csv", "samples.csv", "audit.json"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
    let c = tempfile::tempdir().unwrap();
    let args = ["audit", "--property", "weak-additivity", "--f", QUAD, "--grid", GRID, "--samples", "300", "--seed", "8"];
    assert_eq!(code(&convrep(c.path(), &args)), 0);
    assert_ne!(read(a.path(), "samples.csv"), read(c.path(), "samples.csv"));
}

#[test]
fn written_json_reparses_to_equal_values() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&convrep(d, &["fitzpatrick", "--f", QUAD, "--grid", GRID])), 0);
    let phi_path = d.join("phi.json");
    let phi: Bifunction = serde_json::from_str(&read(d, "phi.json")).unwrap();
    assert_eq!(serde_json::to_string_pretty(&phi).unwrap() + "\n", read(d, "phi.json"));

    let phi_arg = phi_path.to_str().unwrap();
    assert_eq!(code(&convrep(d, &["verify", "--h", phi_arg, "--f", QUAD])), 0);
    let report: MembershipReport = serde_json::from_str(&read(d, "membership.json")).unwrap();
    assert!(report.verdict);
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", read(d, "membership.json"));

    // phi is not above J phi, so this is a property violation
    assert_eq!(code(&convrep(d, &["residual", "--h", phi_arg])), 2);
    let r: ResidualReport = serde_json::from_str(&read(d, "residual.json")).unwrap();
    assert!(!r.is_in_ha);
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", read(d, "residual.json"));

    assert_eq!(code(&convrep(d, &["jtransform", "--h", phi_arg])), 0);
    let v: serde_json::Value = serde_json::from_str(&read(d, "jh.json")).unwrap();
    let jh: Bifunction = serde_json::from_value(v["function"].clone()).unwrap();
    assert_eq!(jh, convrep::conjugation::j(&phi).unwrap());
}

#[test]
fn verify_pi_is_a_violation_citing_convexity() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::line(-2.0, 2.0, 9).unwrap();
    let pi = pi_bifunction(&g, &g).unwrap();
    let h = dir.path().join("pi.json");
    std::fs::write(&h, serde_json::to_string(&pi).unwrap()).unwrap();
    let o = convrep(dir.path(), &["verify", "--h", h.to_str().unwrap(), "--T", r#"{"points":[[0,0],[1,1]]}"#]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("convexity"), "{}", stderr(&o));
    let report: MembershipReport = serde_json::from_str(&read(dir.path(), "membership.json")).unwrap();
    assert!(!report.is_convex_on_grid);
}

#[test]
fn validation_errors_exit_1_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases: [(&[&str], &str); 5] = [
        (&["conjugate", "--f", "{not json", "--grid", GRID], "--f"),
        (&["conjugate", "--f", QUAD, "--grid", r#"{"axes":[{"lo":1,"hi":0,"n":5}]}"#], "--grid at axes[0]"),
        (&["conjugate", "--f", QUAD], "--grid"),
        (&["fitzpatrick", "--grid", GRID, "--T", r#"{"points":[[0,1],[1,0]]}"#], "--T"),
        (&["transport", "--f", QUAD, "--p1", "0,0", "--p2", "0,0,0", "--p", "0.5"], "--p1"),
    ];
    for (args, field) in cases {
        let o = convrep(d, args);
        assert_eq!(code(&o), 1, "{args:?}");
        let msg = stderr(&o);
        assert_eq!(msg.lines().count(), 1, "{msg}");
        assert!(msg.starts_with(&format!("error: {field}")), "{args:?}: {msg}");
    }
    let o = convrep(d, &["frobnicate"]);
    assert_eq!(code(&o), 1);
    let o = convrep(d, &["suite", "no-such-suite"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("fy-fixed-point"));
}

#[test]
fn enlarge_and_transport() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let sg = r#"{"lo":-4,"hi":4,"n":801}"#;
    assert_eq!(code(&convrep(d, &["enlarge", "--f", QUAD, "--grid", sg, "--x", "0", "--eps", "0.5"])), 0);
    let v: serde_json::Value = serde_json::from_str(&read(d, "enlargement.json")).unwrap();
    assert_eq!(v["strict"], true);
    assert_eq!(v["t_eps"]["interval"][1].as_f64(), Some(1.41));

    let o = convrep(d, &["transport", "--f", QUAD, "--p1", "1,1,0", "--p2", "-1,-1,0", "--p", "0.5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let c: TransportCheck = serde_json::from_str(&read(d, "transport.json")).unwrap();
    assert_eq!(c.result.epsbar, 1.0);
    // x* = 3 is not a 0-subgradient of x^2/2 at 0
    let o = convrep(d, &["transport", "--f", QUAD, "--p1", "1,1,0", "--p2", "0,3,0", "--p", "0.5"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).starts_with("error: --p2"));
}

#[test]
fn t_eps_additivity_audit_finds_a_violation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let graph: Vec<[f64; 2]> = (0..=80).map(|i| -4.0 + 0.1 * i as f64).map(|x| [x, x]).collect();
    let t = serde_json::json!({ "points": graph }).to_string();
    let grid = r#"{"lo":-4,"hi":4,"n":81}"#;
    let args = ["audit", "--property", "additivity", "--T", &t, "--grid", grid, "--eps", "1", "--eps-min", "1", "--samples", "500"];
    assert_eq!(code(&convrep(d, &args)), 2);
    let a: AuditResult = serde_json::from_str(&read(d, "audit.json")).unwrap();
    assert!(a.worst_margin < -1e-6);
}

#[test]
fn suite_writes_outcome_and_respects_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let other = dir.path().join("elsewhere");
    let o = Command::new(env!("CARGO_BIN_EXE_convrep"))
        .env("CONVREP_OUT", dir.path())
        .args(["suite", "fy-fixed-point", "--out", other.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let outcome: SuiteOutcome = serde_json::from_str(&read(&other.join("fy-fixed-point"), "outcome.json")).unwrap();
    assert!(outcome.passed);
    assert_eq!(outcome.seed, 0);
    assert!(other.join("fy-fixed-point/h_fy.csv").exists());

    let o = convrep(dir.path(), &["suite", "--list"]);
    assert_eq!(code(&o), 0);
    let listed: Vec<String> = String::from_utf8_lossy(&o.stdout).lines().map(|l| l.split_whitespace().next().unwrap().to_string()).collect();
    let names: Vec<String> = convrep::suites::registry().into_iter().map(|s| s.name).collect();
    assert_eq!(listed, names);
}
