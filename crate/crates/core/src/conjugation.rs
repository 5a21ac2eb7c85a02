//! Discrete Fenchel–Legendre conjugation, closed convex hulls, the coupling
//! Φ and the J-transform.
//!
//! Every conjugate is a maximum over grid nodes: samples equal to `+∞` are
//! left out of the maximum, and a maximum over nothing is the `-∞` sentinel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{dot, is_proper, Bifunction, GridFunction};
use crate::graph::pairing;
use crate::grid::Grid;
use crate::hull::HullTester;
use crate::par;

const NO_ARG: u32 = u32::MAX;

/// A conjugate together with, per output node, the index of an input node
/// attaining the maximum (lowest row-major index among exact ties).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugateResult<F> {
    pub function: F,
    pub argmax: Vec<Option<usize>>,
    /// Some output node is a maximum over an empty set.
    pub neg_inf_sentinel: bool,
}

fn check_proper(values: &[f64]) -> Result<()> {
    if is_proper(values) {
        Ok(())
    } else {
        Err(Error::ImproperFunction)
    }
}

/// f*(s) = max over nodes x with finite f(x) of ⟨x, s⟩ − f(x), by direct
/// enumeration of every (x, s) pair.
pub fn conjugate_bruteforce(f: &GridFunction, dual_grid: &Grid) -> Result<ConjugateResult<GridFunction>> {
    check_proper(f.values())?;
    let grid = f.grid();
    if grid.dim() != dual_grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), got: dual_grid.dim() });
    }
    let d = grid.dim();
    let xs = grid.point_table();
    let finite: Vec<usize> = (0..f.len()).filter(|&i| f.values()[i].is_finite()).collect();
    let out: Vec<(f64, Option<usize>)> = par::map_range(dual_grid.len(), |j| {
        let s = dual_grid.point(j);
        let mut best = f64::NEG_INFINITY;
        let mut arg = None;
        for &i in &finite {
            let v = dot(&xs[i * d..(i + 1) * d], &s) - f.values()[i];
            if v > best {
                best = v;
                arg = Some(i);
            }
        }
        (best, arg)
    });
    finish_grid(dual_grid.clone(), out)
}

fn finish_grid(grid: Grid, out: Vec<(f64, Option<usize>)>) -> Result<ConjugateResult<GridFunction>> {
    let neg_inf_sentinel = out.iter().any(|(v, _)| *v == f64::NEG_INFINITY);
    let (values, argmax) = out.into_iter().unzip();
    Ok(ConjugateResult { function: GridFunction::new(grid, values)?, argmax, neg_inf_sentinel })
}

/// Linear-time conjugate of convex 1-D samples.
///
/// A pointer walks the nondecreasing sample slopes as the dual node
/// increases; the maximizer is then fixed within the window of nodes whose
/// value is within rounding of the candidate, using the same expression and
/// tie rule as [`conjugate_bruteforce`], so both agree bit-for-bit.
pub fn conjugate_fast(f: &GridFunction, dual_grid: &Grid) -> Result<ConjugateResult<GridFunction>> {
    check_proper(f.values())?;
    if f.grid().dim() != 1 || dual_grid.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: f.grid().dim().max(dual_grid.dim()) });
    }
    let vals = f.values();
    let xs = f.grid().axes()[0].points();
    let first = vals.iter().position(|v| v.is_finite()).expect("proper");
    let last = vals.iter().rposition(|v| v.is_finite()).expect("proper");
    if let Some(i) = (first..=last).find(|&i| !vals[i].is_finite()) {
        // a convex function has an interval domain
        return Err(Error::NotConvex { index: i });
    }
    for i in first + 1..last {
        let (a, b, c) = (vals[i - 1], vals[i], vals[i + 1]);
        let tol = 1e-12 * a.abs().max(b.abs()).max(c.abs()).max(1.0);
        if a + c < 2.0 * b - tol {
            return Err(Error::NotConvex { index: i });
        }
    }

    let value_at = |i: usize, s: f64| xs[i] * s - vals[i];
    let mut ptr = first;
    let mut out = Vec::with_capacity(dual_grid.len());
    for s in dual_grid.axes()[0].points() {
        while ptr < last && vals[ptr + 1] - vals[ptr] < s * (xs[ptr + 1] - xs[ptr]) {
            ptr += 1;
        }
        let v0 = value_at(ptr, s);
        let window = 1e-9 * (1.0 + v0.abs());
        let mut lo = ptr;
        while lo > first && value_at(lo - 1, s) >= v0 - window {
            lo -= 1;
        }
        let mut hi = ptr;
        while hi < last && value_at(hi + 1, s) >= v0 - window {
            hi += 1;
        }
        let mut best = f64::NEG_INFINITY;
        let mut arg = None;
        for i in lo..=hi {
            let v = value_at(i, s);
            if v > best {
                best = v;
                arg = Some(i);
            }
        }
        out.push((best, arg));
    }
    finish_grid(dual_grid.clone(), out)
}

/// Conjugate of samples on `primal` evaluated on `dual`, one axis at a time:
/// max over x of Σₖ xₖsₖ − f(x) = max_{x₀}[x₀s₀ + max_{x₁}[x₁s₁ + … − f]].
/// Same maximum as direct enumeration up to summation order.
pub(crate) fn conjugate_separable(values: &[f64], primal: &Grid, dual: &Grid, track: bool) -> (Vec<f64>, Vec<Option<usize>>) {
    let d = primal.dim();
    debug_assert_eq!(d, dual.dim());
    let mut shape = primal.shape();
    let mut cur: Vec<f64> = values.iter().map(|v| -v).collect();
    let mut stages: Vec<(usize, Vec<usize>, Vec<u32>)> = Vec::new();

    for k in (0..d).rev() {
        let p = primal.axes()[k].points();
        let q = dual.axes()[k].points();
        let n = shape[k];
        let m = q.len();
        let outer: usize = shape[..k].iter().product();
        let inner: usize = shape[k + 1..].iter().product();
        let mut next = vec![f64::NEG_INFINITY; outer * m * inner];
        let mut args = if track { vec![NO_ARG; outer * m * inner] } else { Vec::new() };

        {
            let src = &cur;
            let fill = |o: usize, block: &mut [f64], arg_block: Option<&mut [u32]>| {
                let mut arg_block = arg_block;
                for j in 0..m {
                    let best = &mut block[j * inner..(j + 1) * inner];
                    for i in 0..n {
                        let pq = p[i] * q[j];
                        let row = &src[(o * n + i) * inner..(o * n + i + 1) * inner];
                        for r in 0..inner {
                            let v = pq + row[r];
                            if v > best[r] {
                                best[r] = v;
                                if let Some(a) = arg_block.as_deref_mut() {
                                    a[j * inner + r] = i as u32;
                                }
                            }
                        }
                    }
                }
            };
            if track {
                // argmax bookkeeping runs sequentially over the outer index
                for (o, (block, arg_block)) in next.chunks_mut(m * inner).zip(args.chunks_mut(m * inner)).enumerate() {
                    fill(o, block, Some(arg_block));
                }
            } else {
                par::for_each_chunk(&mut next, m * inner, |o, block| fill(o, block, None));
            }
        }

        shape[k] = m;
        if track {
            stages.push((k, shape.clone(), args));
        }
        cur = next;
    }

    let argmax = if track {
        let total = cur.len();
        let dual_shape = dual.shape();
        let mut out = Vec::with_capacity(total);
        for idx in 0..total {
            let mut multi = unflatten(idx, &dual_shape);
            let mut ok = true;
            // stages were recorded from the last axis to the first
            for (k, stage_shape, args) in stages.iter().rev() {
                let a = args[flatten(&multi, stage_shape)];
                if a == NO_ARG {
                    ok = false;
                    break;
                }
                multi[*k] = a as usize;
            }
            out.push(ok.then(|| flatten(&multi, &primal.shape())));
        }
        out
    } else {
        Vec::new()
    };
    (cur, argmax)
}

fn unflatten(mut idx: usize, shape: &[usize]) -> Vec<usize> {
    let mut out = vec![0; shape.len()];
    for k in (0..shape.len()).rev() {
        out[k] = idx % shape[k];
        idx /= shape[k];
    }
    out
}

fn flatten(multi: &[usize], shape: &[usize]) -> usize {
    multi.iter().zip(shape).fold(0, |acc, (&i, &n)| acc * n + i)
}

/// Closed convex hull on the same grid (pair).
pub trait ConvexClosure: Sized {
    fn clconv(&self) -> Result<Self>;
}

/// cl-conv: the discrete biconjugate at nodes inside the convex hull of the
/// finite domain, `+∞` outside it.
///
/// Grid functions are conjugated onto their own grid; bifunctions on X×X*
/// onto the swapped grid X*×X, which makes the result coincide with J²
/// inside the hull.
pub fn clconv<F: ConvexClosure>(f: &F) -> Result<F> {
    f.clconv()
}

impl ConvexClosure for GridFunction {
    fn clconv(&self) -> Result<Self> {
        check_proper(self.values())?;
        let g = self.grid();
        let (conj, _) = conjugate_separable(self.values(), g, g, false);
        let (mut bi, _) = conjugate_separable(&conj, g, g, false);
        apply_hull_mask(&mut bi, self.values(), g);
        GridFunction::new(g.clone(), bi)
    }
}

impl ConvexClosure for Bifunction {
    fn clconv(&self) -> Result<Self> {
        check_proper(self.values())?;
        let p = Grid::product(self.xgrid(), self.sgrid())?;
        let q = Grid::product(self.sgrid(), self.xgrid())?;
        let (conj, _) = conjugate_separable(self.values(), &p, &q, false);
        let (mut bi, _) = conjugate_separable(&conj, &q, &p, false);
        apply_hull_mask(&mut bi, self.values(), &p);
        self.with_values(bi)
    }
}

/// Nodes lying outside the convex hull of the finite samples. There cl-conv
/// is `+∞` while any grid conjugate (in particular J²) is finite.
pub fn outside_domain_hull(values: &[f64], grid: &Grid) -> Vec<bool> {
    let d = grid.dim();
    let table = grid.point_table();
    let finite: Vec<f64> = (0..values.len())
        .filter(|&i| values[i].is_finite())
        .flat_map(|i| table[i * d..(i + 1) * d].iter().copied())
        .collect();
    if finite.is_empty() {
        return vec![true; values.len()];
    }
    if finite.len() / d == values.len() {
        return vec![false; values.len()];
    }
    let hull = HullTester::new(&finite, d);
    par::map_range(values.len(), |i| !values[i].is_finite() && !hull.contains(&table[i * d..(i + 1) * d]))
}

fn apply_hull_mask(out: &mut [f64], source: &[f64], grid: &Grid) {
    for (o, outside) in out.iter_mut().zip(outside_domain_hull(source, grid)) {
        if outside {
            *o = f64::INFINITY;
        }
    }
}

/// Φ((x, x*), (y, y*)) = ⟨x, y*⟩ + ⟨y, x*⟩.
pub fn phi_coupling(p: (&[f64], &[f64]), q: (&[f64], &[f64])) -> Result<f64> {
    let dims = [p.0.len(), p.1.len(), q.0.len(), q.1.len()];
    if let Some(&bad) = dims.iter().find(|&&n| n != dims[0]) {
        return Err(Error::DimensionMismatch { expected: dims[0], got: bad });
    }
    Ok(pairing(p.0, q.1)? + pairing(q.0, p.1)?)
}

/// Jh(x, x*) = max over nodes (y, y*) with finite h of
/// ⟨x, y*⟩ + ⟨y, x*⟩ − h(y, y*), i.e. h*(x*, x).
///
/// Output grids equal the input grids; `argmax` indexes h's nodes.
pub fn j_transform(h: &Bifunction) -> Result<ConjugateResult<Bifunction>> {
    check_proper(h.values())?;
    let p = Grid::product(h.xgrid(), h.sgrid())?;
    let q = Grid::product(h.sgrid(), h.xgrid())?;
    let (conj, arg) = conjugate_separable(h.values(), &p, &q, true);
    let nx = h.xgrid().len();
    let ns = h.sgrid().len();
    let mut values = vec![0.0; nx * ns];
    let mut argmax = vec![None; nx * ns];
    for is in 0..ns {
        for ix in 0..nx {
            values[ix * ns + is] = conj[is * nx + ix];
            argmax[ix * ns + is] = arg[is * nx + ix];
        }
    }
    let neg_inf_sentinel = values.contains(&f64::NEG_INFINITY);
    Ok(ConjugateResult { function: h.with_values(values)?, argmax, neg_inf_sentinel })
}

/// Jh values only.
pub fn j(h: &Bifunction) -> Result<Bifunction> {
    Ok(j_transform(h)?.function)
}
