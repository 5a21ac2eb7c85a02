//! Sampled extended-real functions on grids and on product grids X×X*.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::{samples_serde, ExtReal};
use crate::grid::Grid;

/// Values of a function at the nodes of one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridFunctionRepr")]
pub struct GridFunction {
    grid: Grid,
    #[serde(with = "samples_serde")]
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct GridFunctionRepr {
    grid: Grid,
    #[serde(with = "samples_serde")]
    values: Vec<f64>,
}

impl TryFrom<GridFunctionRepr> for GridFunction {
    type Error = Error;

    fn try_from(r: GridFunctionRepr) -> Result<Self> {
        GridFunction::new(r.grid, r.values)
    }
}

fn check_samples(len: usize, values: &[f64]) -> Result<()> {
    if values.len() != len {
        return Err(Error::GridMismatch(format!(
            "expected {len} samples, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::NotANumber);
    }
    Ok(())
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        check_samples(grid.len(), &values)?;
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let d = grid.dim();
        let values = grid.point_table().chunks(d).map(f).collect();
        GridFunction::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value(&self, idx: usize) -> ExtReal {
        ExtReal::from_f64(self.values[idx])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// At least one finite sample and no `-∞`.
    pub fn is_proper(&self) -> bool {
        is_proper(&self.values)
    }
}

/// Values of a function on X×X*, indexed row-major by (x-node, x*-node).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BifunctionRepr")]
pub struct Bifunction {
    xgrid: Grid,
    sgrid: Grid,
    #[serde(with = "samples_serde")]
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct BifunctionRepr {
    xgrid: Grid,
    sgrid: Grid,
    #[serde(with = "samples_serde")]
    values: Vec<f64>,
}

impl TryFrom<BifunctionRepr> for Bifunction {
    type Error = Error;

    fn try_from(r: BifunctionRepr) -> Result<Self> {
        Bifunction::new(r.xgrid, r.sgrid, r.values)
    }
}

impl Bifunction {
    pub fn new(xgrid: Grid, sgrid: Grid, values: Vec<f64>) -> Result<Self> {
        check_pair(&xgrid, &sgrid)?;
        check_samples(xgrid.len() * sgrid.len(), &values)?;
        Ok(Bifunction { xgrid, sgrid, values })
    }

    pub fn from_fn(xgrid: Grid, sgrid: Grid, mut f: impl FnMut(&[f64], &[f64]) -> f64) -> Result<Self> {
        check_pair(&xgrid, &sgrid)?;
        let d = xgrid.dim();
        let xs = xgrid.point_table();
        let ss = sgrid.point_table();
        let mut values = Vec::with_capacity(xgrid.len() * sgrid.len());
        for x in xs.chunks(d) {
            for s in ss.chunks(d) {
                values.push(f(x, s));
            }
        }
        Bifunction::new(xgrid, sgrid, values)
    }

    /// Same grids, new samples.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Bifunction::new(self.xgrid.clone(), self.sgrid.clone(), values)
    }

    pub fn xgrid(&self) -> &Grid {
        &self.xgrid
    }

    pub fn sgrid(&self) -> &Grid {
        &self.sgrid
    }

    /// Dimension d of X (and of X*).
    pub fn dim(&self) -> usize {
        self.xgrid.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index(&self, ix: usize, is: usize) -> usize {
        ix * self.sgrid.len() + is
    }

    /// (x-node, x*-node) of a flat index.
    pub fn split_index(&self, idx: usize) -> (usize, usize) {
        (idx / self.sgrid.len(), idx % self.sgrid.len())
    }

    pub fn at(&self, ix: usize, is: usize) -> ExtReal {
        ExtReal::from_f64(self.values[self.index(ix, is)])
    }

    /// Coordinates (x, x*) of a flat index.
    pub fn node(&self, idx: usize) -> (Vec<f64>, Vec<f64>) {
        let (ix, is) = self.split_index(idx);
        (self.xgrid.point(ix), self.sgrid.point(is))
    }

    pub fn is_proper(&self) -> bool {
        is_proper(&self.values)
    }

    pub fn same_grids(&self, other: &Bifunction) -> bool {
        self.xgrid == other.xgrid && self.sgrid == other.sgrid
    }

    /// The samples viewed as a function on the product grid X×X*.
    pub fn to_product_function(&self) -> GridFunction {
        let grid = Grid::product(&self.xgrid, &self.sgrid).expect("product of valid grids");
        GridFunction { grid, values: self.values.clone() }
    }

    /// Pointwise maximum; `+∞` dominates.
    pub fn pointwise_max(&self, other: &Bifunction) -> Result<Bifunction> {
        self.zip_with(other, f64::max)
    }

    pub fn zip_with(&self, other: &Bifunction, f: impl Fn(f64, f64) -> f64) -> Result<Bifunction> {
        if !self.same_grids(other) {
            return Err(Error::GridMismatch("bifunctions live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Bifunction::new(self.xgrid.clone(), self.sgrid.clone(), values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Bifunction> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }
}

fn check_pair(xgrid: &Grid, sgrid: &Grid) -> Result<()> {
    if xgrid.dim() != sgrid.dim() {
        return Err(Error::DimensionMismatch { expected: xgrid.dim(), got: sgrid.dim() });
    }
    if !(1..=2).contains(&xgrid.dim()) {
        return Err(Error::InvalidGrid(format!(
            "X and X* must have dimension 1 or 2, got {}",
            xgrid.dim()
        )));
    }
    Ok(())
}

pub(crate) fn is_proper(values: &[f64]) -> bool {
    values.iter().any(|v| v.is_finite()) && !values.contains(&f64::NEG_INFINITY)
}

/// The duality product π(x, x*) = ⟨x, x*⟩ sampled on X×X*.
pub fn pi_bifunction(xgrid: &Grid, sgrid: &Grid) -> Result<Bifunction> {
    Bifunction::from_fn(xgrid.clone(), sgrid.clone(), dot)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
