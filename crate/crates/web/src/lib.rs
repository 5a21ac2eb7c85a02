//! wasm-bindgen entry points for the browser demo. Every export returns a
//! JSON string; `+inf` samples come out as `null`.

use convrep::closed_form::{sample_function, ClosedFormConvexFunction as Cf};
use convrep::conjugation::{conjugate_bruteforce, conjugate_fast};
use convrep::enlargements::inclusion_audit;
use convrep::fixedpoint::hat;
use convrep::representations::{fenchel_young, fitzpatrick, membership_report, sigma, DEFAULT_EQ_TOL};
use convrep::{Bifunction, Grid, OperatorGraph};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn function(kind: &str) -> Result<Cf, String> {
    match kind {
        "quadratic" => Ok(Cf::half_square()),
        "abs" => Ok(Cf::AbsValue),
        other => serde_json::from_str(other).map_err(|e| format!("function: {e}")),
    }
}

fn line(lo: f64, hi: f64, n: usize) -> Result<Grid, String> {
    Grid::line(lo, hi, n).map_err(|e| e.to_string())
}

fn json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ConjugatePlot {
    x: Vec<f64>,
    f: Vec<f64>,
    s: Vec<f64>,
    conjugate: Vec<f64>,
    /// Maximizing x per dual node.
    argmax: Vec<Option<f64>>,
    method: &'static str,
}

/// `kind` is "quadratic", "abs" or a closed-form function as JSON.
pub fn conjugate_plot(kind: &str, lo: f64, hi: f64, n: usize) -> Result<String, String> {
    let g = line(lo, hi, n)?;
    let f = sample_function(&function(kind)?, &g).map_err(|e| e.to_string())?;
    let (r, method) = match conjugate_fast(&f, &g) {
        Ok(r) => (r, "linear-time"),
        Err(_) => (conjugate_bruteforce(&f, &g).map_err(|e| e.to_string())?, "brute force"),
    };
    let nodes = g.point_table();
    json(&ConjugatePlot {
        x: nodes.clone(),
        f: f.values().to_vec(),
        s: nodes.clone(),
        conjugate: r.function.values().to_vec(),
        argmax: r.argmax.iter().map(|a| a.map(|i| nodes[i])).collect(),
        method,
    })
}

#[derive(Serialize)]
struct Field {
    x: Vec<f64>,
    s: Vec<f64>,
    /// Row per x node.
    values: Vec<Vec<f64>>,
    member: bool,
}

fn operator(op: &str, g: &Grid) -> Result<(OperatorGraph, Cf), String> {
    match op {
        "identity" => Ok((OperatorGraph::identity(g).map_err(|e| e.to_string())?, Cf::half_square())),
        "abs" => Ok((Cf::AbsValue.subdifferential_graph(g, g).map_err(|e| e.to_string())?, Cf::AbsValue)),
        other => Err(format!("operator: unknown operator {other:?} (identity, abs)")),
    }
}

/// Representative `which` ∈ {phi, sigma, fy, hat} of `op` ∈ {identity, abs}
/// on [−2, 2]² with n nodes per axis.
pub fn representation_field(op: &str, which: &str, n: usize) -> Result<String, String> {
    let g = line(-2.0, 2.0, n)?;
    let (t, f) = operator(op, &g)?;
    let err = |e: convrep::Error| e.to_string();
    let h: Bifunction = match which {
        "phi" => fitzpatrick(&t, &g, &g).map_err(err)?,
        "sigma" => sigma(&t, &g, &g).map_err(err)?,
        "fy" => fenchel_young(&f, &g, &g).map_err(err)?,
        "hat" => hat(&fitzpatrick(&t, &g, &g).map_err(err)?).map_err(err)?,
        other => return Err(format!("which: unknown representative {other:?} (phi, sigma, fy, hat)")),
    };
    let member = membership_report(&h, &t, DEFAULT_EQ_TOL).map_err(err)?.verdict;
    let nodes = g.point_table();
    json(&Field { x: nodes.clone(), s: nodes, values: h.values().chunks(n).map(<[f64]>::to_vec).collect(), member })
}

#[derive(Serialize)]
struct EnlargementRow {
    eps: f64,
    eps_subdifferential: Option<(f64, f64)>,
    t_eps: Option<(f64, f64)>,
    strict: bool,
}

/// ∂_ε f(x) and (∂f)^ε(x) intervals for ε on `steps + 1` points of [0, eps_max].
pub fn enlargement_sweep(kind: &str, x: f64, eps_max: f64, steps: usize) -> Result<String, String> {
    let f = function(kind)?;
    let sg = line(-4.0, 4.0, 401)?;
    let steps = steps.max(1);
    let mut rows = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let eps = eps_max * k as f64 / steps as f64;
        let a = inclusion_audit(&f, &[x], eps, &sg).map_err(|e| e.to_string())?;
        rows.push(EnlargementRow { eps, eps_subdifferential: a.eps_subdifferential.interval, t_eps: a.t_eps.interval, strict: a.strict });
    }
    json(&rows)
}

#[wasm_bindgen(js_name = conjugatePlot)]
pub fn conjugate_plot_js(kind: &str, lo: f64, hi: f64, n: usize) -> Result<String, JsError> {
    conjugate_plot(kind, lo, hi, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = representationField)]
pub fn representation_field_js(op: &str, which: &str, n: usize) -> Result<String, JsError> {
    representation_field(op, which, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = enlargementSweep)]
pub fn enlargement_sweep_js(kind: &str, x: f64, eps_max: f64, steps: usize) -> Result<String, JsError> {
    enlargement_sweep(kind, x, eps_max, steps).map_err(|e| JsError::new(&e))
}
