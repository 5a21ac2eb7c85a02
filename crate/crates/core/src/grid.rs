//! Uniform box grids over ℝ^d.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default snapping tolerance (∞-norm) for placing points on grid nodes.
pub const DEFAULT_SNAP_TOL: f64 = 1e-9;

/// Largest number of axes a grid may carry. Product grids X×X* of
/// two-dimensional problems need four.
pub const MAX_AXES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AxisRepr")]
pub struct Axis {
    lo: f64,
    hi: f64,
    n: usize,
}

#[derive(Deserialize)]
struct AxisRepr {
    lo: f64,
    hi: f64,
    n: usize,
}

impl TryFrom<AxisRepr> for Axis {
    type Error = Error;

    fn try_from(r: AxisRepr) -> Result<Self> {
        Axis::new(r.lo, r.hi, r.n)
    }
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidGrid(format!("axis bounds must be finite (lo={lo}, hi={hi})")));
        }
        if lo >= hi {
            return Err(Error::InvalidGrid(format!("axis needs lo < hi (lo={lo}, hi={hi})")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("axis needs n >= 2 (n={n})")));
        }
        Ok(Axis { lo, hi, n })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    /// Node `i`. Interior nodes are the weighted mean of the bounds, which
    /// keeps integer-bounded axes symmetric and exact at representable nodes.
    pub fn point(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        let m = (self.n - 1) as f64;
        if i == 0 {
            self.lo
        } else if i == self.n - 1 {
            self.hi
        } else {
            (self.lo * (m - i as f64) + self.hi * i as f64) / m
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Index of the node within `tol` of `v`, if any.
    pub fn snap(&self, v: f64, tol: f64) -> Option<usize> {
        if !v.is_finite() {
            return None;
        }
        let t = ((v - self.lo) / self.step()).round();
        if t < 0.0 || t > (self.n - 1) as f64 {
            return None;
        }
        let i = t as usize;
        ((self.point(i) - v).abs() <= tol).then_some(i)
    }

    /// Same bounds with `factor`-times finer spacing.
    pub fn refined(&self, factor: usize) -> Axis {
        Axis { lo: self.lo, hi: self.hi, n: (self.n - 1) * factor.max(1) + 1 }
    }
}

/// Cartesian product of axes, iterated row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr")]
pub struct Grid {
    axes: Vec<Axis>,
}

#[derive(Deserialize)]
struct GridRepr {
    axes: Vec<Axis>,
}

impl TryFrom<GridRepr> for Grid {
    type Error = Error;

    fn try_from(r: GridRepr) -> Result<Self> {
        Grid::new(r.axes)
    }
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_AXES {
            return Err(Error::InvalidGrid(format!(
                "grid needs between 1 and {MAX_AXES} axes, got {}",
                axes.len()
            )));
        }
        Ok(Grid { axes })
    }

    /// One-dimensional grid.
    pub fn line(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Grid::new(vec![Axis::new(lo, hi, n)?])
    }

    /// Square grid with the same axis repeated `dim` times.
    pub fn cube(lo: f64, hi: f64, n: usize, dim: usize) -> Result<Self> {
        let axis = Axis::new(lo, hi, n)?;
        Grid::new(vec![axis; dim])
    }

    /// Grid on `a`'s axes followed by `b`'s.
    pub fn product(a: &Grid, b: &Grid) -> Result<Self> {
        let mut axes = a.axes.clone();
        axes.extend(b.axes.iter().cloned());
        Grid::new(axes)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Axis sizes.
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::len).collect()
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            out[k] = idx % axis.len();
            idx /= axis.len();
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dim());
        self.axes.iter().zip(multi).fold(0, |acc, (axis, &i)| acc * axis.len() + i)
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.write_point(idx, &mut out);
        out
    }

    pub fn write_point(&self, mut idx: usize, out: &mut [f64]) {
        for (k, axis) in self.axes.iter().enumerate().rev() {
            out[k] = axis.point(idx % axis.len());
            idx /= axis.len();
        }
    }

    /// All node coordinates, flattened row-major (`len() * dim()` entries).
    pub fn point_table(&self) -> Vec<f64> {
        let d = self.dim();
        let mut table = vec![0.0; self.len() * d];
        for (i, chunk) in table.chunks_mut(d).enumerate() {
            self.write_point(i, chunk);
        }
        table
    }

    /// Flat index of the node within `tol` (∞-norm) of `p`.
    pub fn snap(&self, p: &[f64], tol: f64) -> Option<usize> {
        if p.len() != self.dim() {
            return None;
        }
        let mut multi = Vec::with_capacity(self.dim());
        for (axis, &v) in self.axes.iter().zip(p) {
            multi.push(axis.snap(v, tol)?);
        }
        Some(self.flat_index(&multi))
    }

    pub fn refined(&self, factor: usize) -> Grid {
        Grid { axes: self.axes.iter().map(|a| a.refined(factor)).collect() }
    }

    /// Largest axis step, the resolution bound quoted for grid-restricted sets.
    pub fn max_step(&self) -> f64 {
        self.axes.iter().map(Axis::step).fold(0.0, f64::max)
    }
}
