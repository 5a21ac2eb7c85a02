use convrep_web::{conjugate_plot, enlargement_sweep, representation_field};
use serde_json::Value;

fn parse(s: Result<String, String>) -> Value {
    serde_json::from_str(&s.unwrap()).unwrap()
}

#[test]
fn quadratic_is_self_conjugate() {
    let v = parse(conjugate_plot("quadratic", -2.0, 2.0, 41));
    assert_eq!(v["method"], "linear-time");
    let s = v["s"].as_array().unwrap();
    let c = v["conjugate"].as_array().unwrap();
    assert_eq!(s.len(), 41);
    for (s, c) in s.iter().zip(c) {
        let s = s.as_f64().unwrap();
        assert!((c.as_f64().unwrap() - s * s / 2.0).abs() < 1e-12);
    }
    // argmax of <x, s> - x^2/2 is x = s
    assert_eq!(v["argmax"], v["s"]);
}

#[test]
fn abs_conjugate_on_a_bounded_grid() {
    let v = parse(conjugate_plot(r#"{"kind":"abs"}"#, -2.0, 2.0, 5));
    let c: Vec<f64> = v["conjugate"].as_array().unwrap().iter().map(|c| c.as_f64().unwrap()).collect();
    // sup over x in [-2, 2] of s x - |x| = 2 (|s| - 1)^+
    assert_eq!(c, vec![2.0, 0.0, 0.0, 0.0, 2.0]);
}

#[test]
fn fields_and_membership() {
    for which in ["phi", "sigma", "fy", "hat"] {
        let v = parse(representation_field("identity", which, 21));
        assert_eq!(v["values"].as_array().unwrap().len(), 21);
        assert_eq!(v["member"], true, "{which}");
    }
    let sigma = parse(representation_field("identity", "sigma", 21));
    // off-diagonal nodes of sigma are +inf, written as null
    assert!(sigma["values"][0][1].is_null());
    assert_eq!(sigma["values"][10][10].as_f64(), Some(0.0));
    assert!(representation_field("identity", "psi", 21).unwrap_err().starts_with("which:"));
    assert!(representation_field("rotation", "phi", 21).unwrap_err().starts_with("operator:"));
}

#[test]
fn sweep_shows_the_strict_inclusion() {
    let v = parse(enlargement_sweep("quadratic", 0.0, 0.5, 5));
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0]["strict"], false);
    let last = &rows[5];
    assert_eq!(last["eps"].as_f64(), Some(0.5));
    assert_eq!(last["eps_subdifferential"][1].as_f64(), Some(1.0));
    let hi = last["t_eps"][1].as_f64().unwrap();
    assert!((hi - 2f64.sqrt()).abs() <= 0.02, "{hi}");
    assert_eq!(last["strict"], true);
}
