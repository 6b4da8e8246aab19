//! CSV and JSON emission.
//!
//! Floats are written with 12 significant digits in `%g` style, rows are LF
//! terminated and always emitted in a fixed order, so identical inputs give
//! byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::boundary::SolveResult;
use crate::error::{Error, Result};
use crate::model::{DerivedParams, ModelParams};

/// Header of `boundaries.csv`.
pub const BOUNDARY_COLUMNS: [&str; 7] = ["run_id", "n", "u_n", "b_n", "pi0_n", "a_n", "smooth_fit_residual"];

/// Header of `curves.csv`.
pub const CURVE_COLUMNS: [&str; 5] = ["n", "pi", "V_n", "F_n", "g_n"];

/// `x` with 12 significant digits, trailing zeros dropped; scientific notation
/// outside `[1e-4, 1e12)`.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let fixed = format!("{x:.*}", (11 - exp) as usize);
    trim_zeros(&fixed).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rectangular table written in row order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self { header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "ragged row");
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: Table) {
        assert_eq!(self.header, other.header);
        self.rows.extend(other.rows);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?)?;
        Ok(())
    }
}

/// One row per level, `n` ascending.
pub fn boundary_table(run_id: &str, res: &SolveResult) -> Table {
    let mut t = Table::new(&BOUNDARY_COLUMNS);
    for l in &res.levels {
        t.push(vec![
            run_id.to_string(),
            l.n.to_string(),
            fmt_float(res.params.investment_level(l.n)),
            fmt_float(l.b_n),
            fmt_float(l.pi0_n),
            fmt_float(l.a_n),
            fmt_float(l.smooth_fit_residual),
        ]);
    }
    t
}

/// Nodes sampled for curve output: every `stride`-th node plus the last one.
pub fn curve_nodes(m: usize, stride: usize) -> Vec<usize> {
    let stride = stride.max(1);
    let mut nodes: Vec<usize> = (0..m).step_by(stride).collect();
    if !(m - 1).is_multiple_of(stride) {
        nodes.push(m - 1);
    }
    nodes
}

/// `V_n`, `F_n`, `g_n` at every `stride`-th node (and the last), grouped by `n`.
pub fn curve_table(res: &SolveResult, stride: usize) -> Table {
    let nodes = curve_nodes(res.grid.len(), stride);
    let mut t = Table::new(&CURVE_COLUMNS);
    for l in &res.levels {
        for &i in &nodes {
            t.push(vec![
                l.n.to_string(),
                fmt_float(res.grid.node(i)),
                fmt_float(l.v_n.values()[i]),
                fmt_float(l.f_n.values()[i]),
                fmt_float(l.g_n.values()[i]),
            ]);
        }
    }
    t
}

/// Header of the per-run parameter tables.
pub const RUN_COLUMNS: [&str; 11] = ["run_id", "mu0", "mu1", "sigma", "r", "N", "eps", "k", "rho", "gamma", "b1_closed_form"];

pub fn run_row(run_id: &str, p: &ModelParams, d: &DerivedParams, b1: f64) -> Vec<String> {
    vec![
        run_id.to_string(),
        fmt_float(p.mu0),
        fmt_float(p.mu1),
        fmt_float(p.sigma),
        fmt_float(p.r),
        p.n_rights.to_string(),
        fmt_float(p.eps),
        fmt_float(d.k),
        fmt_float(d.rho),
        fmt_float(d.gamma),
        fmt_float(b1),
    ]
}

/// Derived quantities recorded in manifests.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DerivedRecord {
    pub k: f64,
    pub rho: f64,
    pub gamma: f64,
    pub b1_closed_form: f64,
    pub total_learning: f64,
}

impl DerivedRecord {
    pub fn new(p: &ModelParams, d: &DerivedParams, b1: f64) -> Self {
        Self { k: d.k, rho: d.rho, gamma: d.gamma, b1_closed_form: b1, total_learning: p.total_learning() }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Creates `dir` if needed and returns the path of `name` inside it.
pub fn prepare(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_float(0.743975018096), "0.743975018096");
        assert_eq!(fmt_float(0.7439750180961234), "0.743975018096");
        assert_eq!(fmt_float(0.5), "0.5");
        assert_eq!(fmt_float(10.0), "10");
        assert_eq!(fmt_float(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(fmt_float(1.5e-7), "1.5e-7");
        assert_eq!(fmt_float(5.82748921985e-5), "5.82748921985e-5");
        assert_eq!(fmt_float(1.25e-4), "0.000125");
        assert_eq!(fmt_float(123456.0), "123456");
        assert_eq!(fmt_float(9.9999999999999e-3), "0.01");
        assert_eq!(fmt_float(2.5e13), "2.5e13");
        assert_eq!(fmt_float(0.0), "0");
    }

    #[test]
    fn lf_terminated_and_quoted() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x,y".into(), "1".into()]);
        assert_eq!(String::from_utf8(t.to_bytes().unwrap()).unwrap(), "a,b\n\"x,y\",1\n");
    }
}
