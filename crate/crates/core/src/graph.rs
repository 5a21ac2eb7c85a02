//! Sampled operator graphs T ⊂ X×X*, the duality pairing, and δ_T.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{dot, Bifunction};
use crate::grid::Grid;

/// ⟨x, x*⟩ = Σ xᵢ·x*ᵢ.
pub fn pairing(x: &[f64], xstar: &[f64]) -> Result<f64> {
    if x.len() != xstar.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: xstar.len() });
    }
    Ok(dot(x, xstar))
}

/// A finite list of (x, x*) pairs standing for a point-to-set operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct OperatorGraph {
    dim: usize,
    xs: Vec<f64>,
    ss: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    points: Vec<Vec<f64>>,
}

impl TryFrom<GraphRepr> for OperatorGraph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        let width = r.points.first().map(Vec::len).ok_or(Error::EmptyGraph)?;
        if width % 2 != 0 || !(2..=4).contains(&width) {
            return Err(Error::InvalidFunction(format!(
                "graph rows must hold [x..., xstar...] with d in {{1,2}}, got row length {width}"
            )));
        }
        let d = width / 2;
        let mut pairs = Vec::with_capacity(r.points.len());
        for row in &r.points {
            if row.len() != width {
                return Err(Error::DimensionMismatch { expected: width, got: row.len() });
            }
            pairs.push((row[..d].to_vec(), row[d..].to_vec()));
        }
        OperatorGraph::new(pairs)
    }
}

impl From<OperatorGraph> for GraphRepr {
    fn from(g: OperatorGraph) -> Self {
        let points = g.iter().map(|(x, s)| x.iter().chain(s).copied().collect()).collect();
        GraphRepr { points }
    }
}

/// A pair of graph points with ⟨x−y, x*−y*⟩ < 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneViolation {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

impl OperatorGraph {
    pub fn new(pairs: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        let dim = pairs.first().map(|(x, _)| x.len()).ok_or(Error::EmptyGraph)?;
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidFunction(format!("graph dimension must be 1 or 2, got {dim}")));
        }
        let mut xs = Vec::with_capacity(pairs.len() * dim);
        let mut ss = Vec::with_capacity(pairs.len() * dim);
        for (x, s) in &pairs {
            if x.len() != dim || s.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: x.len().max(s.len()) });
            }
            if x.iter().chain(s).any(|v| !v.is_finite()) {
                return Err(Error::InvalidFunction("graph coordinates must be finite".into()));
            }
            xs.extend_from_slice(x);
            ss.extend_from_slice(s);
        }
        let g = OperatorGraph { dim, xs, ss };
        let mut keys: Vec<(Vec<u64>, usize)> = g
            .iter()
            .enumerate()
            .map(|(i, (x, s))| (x.iter().chain(s).map(|v| (v + 0.0).to_bits()).collect(), i))
            .collect();
        keys.sort();
        if let Some(w) = keys.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateGraphPoint { index: w[0].1.max(w[1].1) });
        }
        Ok(g)
    }

    /// Builds a graph from pairs, silently dropping exact duplicates.
    pub fn from_pairs_dedup(pairs: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let pairs = pairs
            .into_iter()
            .filter(|(x, s)| seen.insert(x.iter().chain(s).map(|v| (v + 0.0).to_bits()).collect::<Vec<_>>()))
            .collect();
        OperatorGraph::new(pairs)
    }

    /// The identity operator restricted to the nodes of `grid`.
    pub fn identity(grid: &Grid) -> Result<Self> {
        let d = grid.dim();
        let pairs = grid.point_table().chunks(d).map(|p| (p.to_vec(), p.to_vec())).collect();
        OperatorGraph::new(pairs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.xs.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.xs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn xstar(&self, i: usize) -> &[f64] {
        &self.ss[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], &[f64])> + '_ {
        self.xs.chunks(self.dim).zip(self.ss.chunks(self.dim))
    }

    /// min over (y, y*) ∈ T of ⟨x−y, x*−y*⟩.
    pub fn min_monotone_gap(&self, x: &[f64], xstar: &[f64]) -> f64 {
        self.iter()
            .map(|(y, ys)| x.iter().zip(y).zip(xstar.iter().zip(ys)).map(|((a, b), (c, e))| (a - b) * (c - e)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    /// Flat Bifunction index of each graph point's node, `None` when off grid.
    pub fn snap(&self, xgrid: &Grid, sgrid: &Grid, tol: f64) -> Result<Vec<Option<usize>>> {
        if xgrid.dim() != self.dim || sgrid.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: xgrid.dim() });
        }
        Ok(self
            .iter()
            .map(|(x, s)| {
                let ix = xgrid.snap(x, tol)?;
                let is = sgrid.snap(s, tol)?;
                Some(ix * sgrid.len() + is)
            })
            .collect())
    }

    /// Nodes of X×X* monotonically related (up to `slack`) to every graph point:
    /// the grid surrogate for the maximal monotone extension of T.
    pub fn monotone_related_mask(&self, xgrid: &Grid, sgrid: &Grid, slack: f64) -> Result<Vec<bool>> {
        if xgrid.dim() != self.dim || sgrid.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: xgrid.dim() });
        }
        let d = self.dim;
        let xs = xgrid.point_table();
        let ss = sgrid.point_table();
        let mut mask = Vec::with_capacity(xgrid.len() * sgrid.len());
        for x in xs.chunks(d) {
            for s in ss.chunks(d) {
                mask.push(self.min_monotone_gap(x, s) >= -slack);
            }
        }
        Ok(mask)
    }

    /// True when the grid admits no monotone extension of T beyond its own
    /// snapped nodes.
    pub fn is_grid_maximal(&self, xgrid: &Grid, sgrid: &Grid, slack: f64) -> Result<bool> {
        let mask = self.monotone_related_mask(xgrid, sgrid, slack)?;
        let snapped = self.snap(xgrid, sgrid, crate::grid::DEFAULT_SNAP_TOL)?;
        let mut on_graph = vec![false; mask.len()];
        for idx in snapped.into_iter().flatten() {
            on_graph[idx] = true;
        }
        Ok(mask.iter().zip(&on_graph).all(|(&m, &g)| !m || g))
    }
}

/// All unordered pairs of graph points with ⟨x−y, x*−y*⟩ < 0.
pub fn check_monotone(t: &OperatorGraph) -> Vec<MonotoneViolation> {
    let mut out = Vec::new();
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            let value: f64 = t
                .x(i)
                .iter()
                .zip(t.x(j))
                .zip(t.xstar(i).iter().zip(t.xstar(j)))
                .map(|((a, b), (c, e))| (a - b) * (c - e))
                .sum();
            if value < 0.0 {
                out.push(MonotoneViolation { i, j, value });
            }
        }
    }
    out
}

/// δ_T on X×X*: 0 at nodes within `snap_tol` of a graph point, +∞ elsewhere.
pub fn indicator_of_graph(t: &OperatorGraph, xgrid: &Grid, sgrid: &Grid, snap_tol: f64) -> Result<Bifunction> {
    if snap_tol < 0.0 {
        return Err(Error::Precondition(format!("snap_tol must be >= 0, got {snap_tol}")));
    }
    let snapped = t.snap(xgrid, sgrid, snap_tol)?;
    let mut values = vec![f64::INFINITY; xgrid.len() * sgrid.len()];
    let mut hits = 0;
    for idx in snapped.into_iter().flatten() {
        values[idx] = 0.0;
        hits += 1;
    }
    if hits == 0 {
        return Err(Error::GraphOffGrid);
    }
    Bifunction::new(xgrid.clone(), sgrid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::pi_bifunction;
    use proptest::prelude::*;

    fn g1(pairs: &[(f64, f64)]) -> OperatorGraph {
        OperatorGraph::new(pairs.iter().map(|&(x, s)| (vec![x], vec![s])).collect()).unwrap()
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pairing(&[0.0], &[5.0]).unwrap(), 0.0);
        assert_eq!(pairing(&[2.0], &[3.0]).unwrap(), 6.0);
        assert_eq!(pairing(&[1.0, 2.0], &[3.0, -1.0]).unwrap(), 1.0);
        assert!(pairing(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn monotonicity_examples() {
        assert!(check_monotone(&g1(&[(0.0, 0.0), (1.0, 1.0)])).is_empty());
        let v = check_monotone(&g1(&[(0.0, 1.0), (1.0, 0.0)]));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].value, -1.0);
        assert!(check_monotone(&g1(&[(0.0, 0.0)])).is_empty());
    }

    #[test]
    fn graph_invariants() {
        assert!(matches!(OperatorGraph::new(vec![]), Err(Error::EmptyGraph)));
        let dup = OperatorGraph::new(vec![(vec![1.0], vec![2.0]), (vec![1.0], vec![2.0])]);
        assert!(matches!(dup, Err(Error::DuplicateGraphPoint { index: 1 })));
        let t: OperatorGraph = serde_json::from_str(r#"{"points": [[0, 0], [1, 2]]}"#).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.xstar(1), &[2.0]);
        let back: OperatorGraph = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<OperatorGraph>(r#"{"points": [[0, 0, 1]]}"#).is_err());
    }

    #[test]
    fn indicator_of_single_point() {
        let g = Grid::line(-1.0, 1.0, 3).unwrap();
        let d = indicator_of_graph(&g1(&[(0.0, 0.0)]), &g, &g, 1e-9).unwrap();
        let zeros: Vec<usize> = (0..9).filter(|&i| d.values()[i] == 0.0).collect();
        assert_eq!(zeros, vec![4]);
        assert_eq!(d.values().iter().filter(|v| v.is_infinite()).count(), 8);
    }

    #[test]
    fn indicator_of_identity_is_zero_on_diagonal() {
        let g = Grid::line(-2.0, 2.0, 5).unwrap();
        let d = indicator_of_graph(&OperatorGraph::identity(&g).unwrap(), &g, &g, 1e-9).unwrap();
        for ix in 0..5 {
            for is in 0..5 {
                let v = d.values()[d.index(ix, is)];
                assert_eq!(v == 0.0, ix == is);
            }
        }
    }

    #[test]
    fn indicator_off_grid() {
        let g = Grid::line(-1.0, 1.0, 3).unwrap();
        let r = indicator_of_graph(&g1(&[(0.05, 0.0)]), &g, &g, 1e-9);
        assert!(matches!(r, Err(Error::GraphOffGrid)));
    }

    #[test]
    fn pi_plus_indicator_is_infinite_exactly_off_graph() {
        let g = Grid::line(-1.0, 1.0, 5).unwrap();
        let t = g1(&[(-1.0, -1.0), (0.0, 0.5), (1.0, 1.0)]);
        let h = pi_bifunction(&g, &g).unwrap().zip_with(&indicator_of_graph(&t, &g, &g, 1e-9).unwrap(), |a, b| a + b).unwrap();
        let on: Vec<usize> = t.snap(&g, &g, 1e-9).unwrap().into_iter().flatten().collect();
        for (i, v) in h.values().iter().enumerate() {
            assert_eq!(v.is_finite(), on.contains(&i));
        }
    }

    #[test]
    fn sampled_identity_is_not_grid_maximal() {
        // adjacent off-diagonal nodes have no graph point strictly between them
        let g = Grid::line(-1.0, 1.0, 5).unwrap();
        let t = OperatorGraph::identity(&g).unwrap();
        assert!(!t.is_grid_maximal(&g, &g, 1e-12).unwrap());
        let fine = OperatorGraph::identity(&g.refined(2)).unwrap();
        assert!(fine.is_grid_maximal(&g, &g, 1e-12).unwrap());
    }

    proptest! {
        #[test]
        fn pairing_is_bilinear(a in -5.0..5.0f64, b in -5.0..5.0f64,
                               x in prop::array::uniform2(-5.0..5.0f64),
                               y in prop::array::uniform2(-5.0..5.0f64),
                               s in prop::array::uniform2(-5.0..5.0f64)) {
            let comb = [a * x[0] + b * y[0], a * x[1] + b * y[1]];
            let lhs = pairing(&comb, &s).unwrap();
            let rhs = a * pairing(&x, &s).unwrap() + b * pairing(&y, &s).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs().max(rhs.abs())));
        }
    }
}
