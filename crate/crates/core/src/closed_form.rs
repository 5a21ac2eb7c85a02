//! Closed-form convex, lower semicontinuous, proper functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{dot, GridFunction};
use crate::graph::OperatorGraph;
use crate::grid::{Grid, DEFAULT_SNAP_TOL};

/// Slack used when a closed form has a kink or a domain boundary on a node.
const KINK_TOL: f64 = 1e-12;

/// Convex functions with known conjugates and subdifferentials.
///
/// The scalar variants act on ℝ; two-dimensional functions are separable
/// sums of scalar parts. `GridSamples` is the discrete function that equals
/// the samples at grid nodes and +∞ elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedFormConvexFunction {
    /// a·x²/2 + b·x + c with a ≥ 0.
    Quadratic { a: f64, b: f64, c: f64 },
    #[serde(rename = "abs")]
    AbsValue,
    IndicatorPoint { x0: f64 },
    #[serde(rename = "samples")]
    GridSamples(GridFunction),
    /// Σᵢ fᵢ(xᵢ) over scalar parts.
    Separable { parts: Vec<ClosedFormConvexFunction> },
}

use ClosedFormConvexFunction as Cf;

impl ClosedFormConvexFunction {
    pub fn quadratic(a: f64, b: f64, c: f64) -> Result<Self> {
        let f = Cf::Quadratic { a, b, c };
        f.validate()?;
        Ok(f)
    }

    /// x²/2.
    pub fn half_square() -> Self {
        Cf::Quadratic { a: 1.0, b: 0.0, c: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Cf::Quadratic { a, b, c } => {
                if ![a, b, c].iter().all(|v| v.is_finite()) {
                    return Err(Error::InvalidFunction("quadratic coefficients must be finite".into()));
                }
                if *a < 0.0 {
                    return Err(Error::InvalidFunction(format!("quadratic needs a >= 0, got a={a}")));
                }
                Ok(())
            }
            Cf::AbsValue => Ok(()),
            Cf::IndicatorPoint { x0 } => {
                if x0.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidFunction("indicator point must be finite".into()))
                }
            }
            Cf::GridSamples(g) => {
                if g.is_proper() {
                    Ok(())
                } else {
                    Err(Error::ImproperFunction)
                }
            }
            Cf::Separable { parts } => {
                if parts.is_empty() || parts.len() > 2 {
                    return Err(Error::InvalidFunction(format!(
                        "separable function needs 1 or 2 parts, got {}",
                        parts.len()
                    )));
                }
                for p in parts {
                    if p.dim() != 1 {
                        return Err(Error::InvalidFunction("separable parts must be scalar".into()));
                    }
                    p.validate()?;
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Cf::GridSamples(g) => g.grid().dim(),
            Cf::Separable { parts } => parts.len(),
            _ => 1,
        }
    }

    fn check_dim(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.len() });
        }
        Ok(())
    }

    /// f(x), `+∞` outside the domain.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Cf::Quadratic { a, b, c } => a * x[0] * x[0] / 2.0 + b * x[0] + c,
            Cf::AbsValue => x[0].abs(),
            Cf::IndicatorPoint { x0 } => {
                if (x[0] - x0).abs() <= DEFAULT_SNAP_TOL {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Cf::GridSamples(g) => match g.grid().snap(x, DEFAULT_SNAP_TOL) {
                Some(i) => g.values()[i],
                None => f64::INFINITY,
            },
            Cf::Separable { parts } => parts.iter().zip(x).map(|(p, &xi)| p.eval_unchecked(&[xi])).sum(),
        }
    }

    /// f*(x*) in closed form (brute force over the nodes for `GridSamples`).
    pub fn conjugate_at(&self, s: &[f64]) -> Result<f64> {
        self.check_dim(s)?;
        Ok(self.conjugate_unchecked(s))
    }

    fn conjugate_unchecked(&self, s: &[f64]) -> f64 {
        match self {
            Cf::Quadratic { a, b, c } => {
                if *a > 0.0 {
                    let t = s[0] - b;
                    t * t / (2.0 * a) - c
                } else if (s[0] - b).abs() <= DEFAULT_SNAP_TOL {
                    -c
                } else {
                    f64::INFINITY
                }
            }
            Cf::AbsValue => {
                if s[0].abs() <= 1.0 + KINK_TOL {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Cf::IndicatorPoint { x0 } => s[0] * x0,
            Cf::GridSamples(g) => {
                let d = g.grid().dim();
                g.grid()
                    .point_table()
                    .chunks(d)
                    .zip(g.values())
                    .filter(|(_, v)| v.is_finite())
                    .map(|(x, v)| dot(x, s) - v)
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            Cf::Separable { parts } => parts.iter().zip(s).map(|(p, &si)| p.conjugate_unchecked(&[si])).sum(),
        }
    }

    /// Fenchel–Young value f(x) + f*(x*).
    pub fn fenchel_young_value(&self, x: &[f64], s: &[f64]) -> Result<f64> {
        Ok(self.eval(x)? + self.conjugate_at(s)?)
    }

    /// Graph of ∂f sampled on `xgrid` (abscissae) and `sgrid` (slopes filling
    /// vertical segments of the graph).
    ///
    /// Quadratic: (y, a·y + b). |·|: (y, sign y) for y ≠ 0 plus (0, s) for
    /// s ∈ [−1, 1]. Point indicator: (x₀, s) for every slope node. Samples and
    /// separable sums use the Fenchel–Young equality on the grid pair.
    pub fn subdifferential_graph(&self, xgrid: &Grid, sgrid: &Grid) -> Result<OperatorGraph> {
        if xgrid.dim() != self.dim() || sgrid.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: xgrid.dim() });
        }
        let ys = xgrid.point_table();
        let slopes = sgrid.point_table();
        let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
        match self {
            Cf::Quadratic { a, b, .. } => {
                for &y in &ys {
                    pairs.push((vec![y], vec![a * y + b]));
                }
            }
            Cf::AbsValue => {
                for &y in &ys {
                    if y > 0.0 {
                        pairs.push((vec![y], vec![1.0]));
                    } else if y < 0.0 {
                        pairs.push((vec![y], vec![-1.0]));
                    } else {
                        for &s in slopes.iter().filter(|s| s.abs() <= 1.0 + KINK_TOL) {
                            pairs.push((vec![0.0], vec![s]));
                        }
                    }
                }
            }
            Cf::IndicatorPoint { x0 } => {
                for &s in &slopes {
                    pairs.push((vec![*x0], vec![s]));
                }
            }
            Cf::GridSamples(_) | Cf::Separable { .. } => {
                let d = self.dim();
                for y in ys.chunks(d) {
                    let fy = self.eval_unchecked(y);
                    if !fy.is_finite() {
                        continue;
                    }
                    for s in slopes.chunks(d) {
                        let gap = fy + self.conjugate_unchecked(s) - dot(y, s);
                        if gap.abs() <= 1e-9 {
                            pairs.push((y.to_vec(), s.to_vec()));
                        }
                    }
                }
            }
        }
        OperatorGraph::from_pairs_dedup(pairs)
    }
}

/// Pointwise samples of `f` on `grid`.
pub fn sample_function(f: &ClosedFormConvexFunction, grid: &Grid) -> Result<GridFunction> {
    f.validate()?;
    if grid.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: grid.dim() });
    }
    if let Cf::IndicatorPoint { x0 } = f {
        if grid.snap(&[*x0], DEFAULT_SNAP_TOL).is_none() {
            return Err(Error::PointOffGrid(vec![*x0]));
        }
    }
    let out = GridFunction::from_fn(grid.clone(), |x| f.eval_unchecked(x))?;
    if !out.is_proper() {
        return Err(Error::ImproperFunction);
    }
    Ok(out)
}
