//! CSV dumps of sampled functions and JSON helpers.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext::format_sample;
use crate::function::{Bifunction, GridFunction};
use crate::grid::Grid;

fn coord_headers(name: &str, d: usize) -> Vec<String> {
    if d == 1 {
        vec![name.to_string()]
    } else {
        (1..=d).map(|k| format!("{name}{k}")).collect()
    }
}

fn push_row(out: &mut String, coords: &[f64], value: f64, neg_inf: &mut usize) {
    for c in coords {
        out.push_str(&format_sample(*c));
        out.push(',');
    }
    if value == f64::NEG_INFINITY {
        *neg_inf += 1;
    }
    let _ = writeln!(out, "{}", format_sample(value));
}

fn warn_neg_inf(count: usize) {
    if count > 0 {
        log::warn!("{count} node(s) hold the -inf sentinel (maximum over an empty set)");
    }
}

/// One row per node, row-major; header `x,xstar,value` in one dimension and
/// `x1,x2,xstar1,xstar2,value` in two.
pub fn bifunction_csv(h: &Bifunction) -> String {
    let d = h.dim();
    let mut header = coord_headers("x", d);
    header.extend(coord_headers("xstar", d));
    header.push("value".into());
    let mut out = header.join(",") + "\n";
    let xs = h.xgrid().point_table();
    let ss = h.sgrid().point_table();
    let mut neg_inf = 0;
    let mut coords = vec![0.0; 2 * d];
    for (idx, &v) in h.values().iter().enumerate() {
        let (ix, is) = h.split_index(idx);
        coords[..d].copy_from_slice(&xs[ix * d..(ix + 1) * d]);
        coords[d..].copy_from_slice(&ss[is * d..(is + 1) * d]);
        push_row(&mut out, &coords, v, &mut neg_inf);
    }
    warn_neg_inf(neg_inf);
    out
}

/// One row per node with coordinate columns named after `coord`
/// (`x` for a function, `xstar` for a conjugate).
pub fn grid_function_csv(f: &GridFunction, coord: &str) -> String {
    let d = f.grid().dim();
    let mut header = coord_headers(coord, d);
    header.push("value".into());
    let mut out = header.join(",") + "\n";
    let table = f.grid().point_table();
    let mut neg_inf = 0;
    for (i, &v) in f.values().iter().enumerate() {
        push_row(&mut out, &table[i * d..(i + 1) * d], v, &mut neg_inf);
    }
    warn_neg_inf(neg_inf);
    out
}

/// Parses a Bifunction dump written by [`bifunction_csv`] back onto the
/// given grids.
pub fn parse_bifunction_csv(text: &str, xgrid: &Grid, sgrid: &Grid) -> Result<Bifunction> {
    let mut values = Vec::with_capacity(xgrid.len() * sgrid.len());
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let last = line.rsplit(',').next().unwrap_or_default().trim();
        let v = match last {
            "inf" | "+inf" => f64::INFINITY,
            "-inf" => f64::NEG_INFINITY,
            other => other.parse().map_err(|_| Error::InvalidFunction(format!("bad CSV value {other:?}")))?,
        };
        values.push(v);
    }
    Bifunction::new(xgrid.clone(), sgrid.clone(), values)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bifunction_dump_layout() {
        let g = Grid::line(-1.0, 1.0, 3).unwrap();
        let h = Bifunction::from_fn(g.clone(), g.clone(), |x, s| if x[0] == s[0] { x[0] * s[0] } else { f64::INFINITY }).unwrap();
        let csv = bifunction_csv(&h);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,xstar,value");
        assert_eq!(lines[1], "-1,-1,1");
        assert_eq!(lines[2], "-1,0,inf");
        assert_eq!(lines.len(), 10);
        assert_eq!(parse_bifunction_csv(&csv, &g, &g).unwrap(), h);
    }

    #[test]
    fn two_dimensional_headers() {
        let g = Grid::cube(0.0, 1.0, 2, 2).unwrap();
        let h = Bifunction::from_fn(g.clone(), g.clone(), |_, _| 0.1).unwrap();
        assert!(bifunction_csv(&h).starts_with("x1,x2,xstar1,xstar2,value\n0,0,0,0,0.1\n"));
        let f = GridFunction::from_fn(g, |x| x[0] - x[1]).unwrap();
        assert!(grid_function_csv(&f, "xstar").starts_with("xstar1,xstar2,value\n0,0,0\n0,1,-1\n"));
    }

    #[test]
    fn sentinel_is_written_as_literal() {
        let g = Grid::line(0.0, 1.0, 2).unwrap();
        let f = GridFunction::new(g, vec![f64::NEG_INFINITY, 0.1 + 0.2]).unwrap();
        assert_eq!(grid_function_csv(&f, "x"), "x,value\n0,-inf\n1,0.30000000000000004\n");
    }
}
