//! One-parameter sweeps with directional summaries.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::solve_sequence;
use crate::error::{Error, Result};
use crate::experiments::config::Numerics;
use crate::experiments::output::{fmt_float, Table};
use crate::model::ModelParams;

/// Slack allowed when checking that boundaries do not increase.
pub const MONOTONE_TOL: f64 = 1e-9;

/// Largest spread of `b_1` tolerated across an `N` sweep.
pub const B1_SPREAD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Sigma,
    R,
    EpsTotal,
    N,
    MuPair,
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sigma" => Axis::Sigma,
            "r" => Axis::R,
            "eps_total" => Axis::EpsTotal,
            "N" => Axis::N,
            "mu_pair" => Axis::MuPair,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "axis must be one of sigma, r, eps_total, N, mu_pair; got {s:?}"
                )))
            }
        })
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Sigma => "sigma",
            Axis::R => "r",
            Axis::EpsTotal => "eps_total",
            Axis::N => "N",
            Axis::MuPair => "mu_pair",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AxisValue {
    Real(f64),
    Count(usize),
    Pair(f64, f64),
}

impl AxisValue {
    /// Sort key; drift pairs have no natural order and keep their input position.
    fn key(&self) -> Option<f64> {
        match *self {
            AxisValue::Real(x) => Some(x),
            AxisValue::Count(n) => Some(n as f64),
            AxisValue::Pair(..) => None,
        }
    }
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AxisValue::Real(x) => f.write_str(&fmt_float(x)),
            AxisValue::Count(n) => write!(f, "{n}"),
            AxisValue::Pair(a, b) => write!(f, "{}:{}", fmt_float(a), fmt_float(b)),
        }
    }
}

/// Parses a comma-separated list; drift pairs are written `mu0:mu1`.
pub fn parse_values(axis: Axis, text: &str) -> Result<Vec<AxisValue>> {
    let bad = |s: &str| Error::InvalidParameter(format!("values: cannot parse {s:?} for axis {axis}"));
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match axis {
            Axis::N => s.parse().map(AxisValue::Count).map_err(|_| bad(s)),
            Axis::MuPair => {
                let (a, b) = s.split_once(':').ok_or_else(|| bad(s))?;
                Ok(AxisValue::Pair(a.trim().parse().map_err(|_| bad(s))?, b.trim().parse().map_err(|_| bad(s))?))
            }
            _ => s.parse().map(AxisValue::Real).map_err(|_| bad(s)),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: ModelParams,
    pub axis: Axis,
    pub values: Vec<AxisValue>,
    pub numerics: Numerics,
}

impl SweepSpec {
    pub fn new(base: ModelParams, axis: Axis, values: Vec<AxisValue>, numerics: Numerics) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("values must not be empty".into()));
        }
        let spec = Self { base, axis, values, numerics };
        for v in &spec.values {
            spec.params_for(*v)?;
        }
        Ok(spec)
    }

    /// Base parameters with the axis set to `v`; `N` sweeps keep the total learning fixed.
    pub fn params_for(&self, v: AxisValue) -> Result<ModelParams> {
        let b = self.base;
        let total = b.total_learning();
        match (self.axis, v) {
            (Axis::Sigma, AxisValue::Real(s)) => ModelParams::new(b.mu0, b.mu1, s, b.r, b.n_rights, b.eps),
            (Axis::R, AxisValue::Real(r)) => ModelParams::new(b.mu0, b.mu1, b.sigma, r, b.n_rights, b.eps),
            (Axis::EpsTotal, AxisValue::Real(t)) => {
                ModelParams::with_total_learning(b.mu0, b.mu1, b.sigma, b.r, b.n_rights, t)
            }
            (Axis::N, AxisValue::Count(n)) => ModelParams::with_total_learning(b.mu0, b.mu1, b.sigma, b.r, n, total),
            (Axis::MuPair, AxisValue::Pair(m0, m1)) => ModelParams::new(m0, m1, b.sigma, b.r, b.n_rights, b.eps),
            (axis, v) => Err(Error::InvalidParameter(format!("value {v} does not fit axis {axis}"))),
        }
    }

    pub fn run_id(&self, v: AxisValue) -> String {
        format!("{}_{v}", self.axis)
    }
}

/// `(n, b_n, pi0_n, a_n, residual)` of one level.
pub type LevelRow = (usize, f64, f64, f64, f64);

/// Outcome of one sweep point.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub run_id: String,
    pub value: AxisValue,
    pub params: ModelParams,
    /// One row per `n = 1..=N`, or the failure.
    pub levels: std::result::Result<Vec<LevelRow>, String>,
}

impl SweepRun {
    fn boundary(&self, n: usize) -> Option<f64> {
        self.levels.as_ref().ok()?.get(n.checked_sub(1)?).map(|l| l.1)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryCheck {
    pub check: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub spec: SweepSpec,
    pub runs: Vec<SweepRun>,
    pub summaries: Vec<SummaryCheck>,
}

impl SweepReport {
    pub fn failed_runs(&self) -> usize {
        self.runs.iter().filter(|r| r.levels.is_err()).count()
    }

    pub fn all_ok(&self) -> bool {
        self.failed_runs() == 0 && self.summaries.iter().all(|s| s.holds)
    }

    /// Long format: one row per `(run, n)`, one row with empty level columns per failed run.
    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "run_id",
            "axis",
            "value",
            "n",
            "u_n",
            "b_n",
            "pi0_n",
            "a_n",
            "smooth_fit_residual",
            "status",
            "message",
        ]);
        for run in &self.runs {
            let head = [run.run_id.clone(), self.spec.axis.to_string(), run.value.to_string()];
            match &run.levels {
                Ok(levels) => {
                    for &(n, b, pi0, a, res) in levels {
                        let mut row = head.to_vec();
                        row.extend([
                            n.to_string(),
                            fmt_float(run.params.investment_level(n)),
                            fmt_float(b),
                            fmt_float(pi0),
                            fmt_float(a),
                            fmt_float(res),
                            "ok".into(),
                            String::new(),
                        ]);
                        t.push(row);
                    }
                }
                Err(msg) => {
                    let mut row = head.to_vec();
                    row.extend(vec![String::new(); 6]);
                    row.extend(["failed".into(), msg.clone()]);
                    t.push(row);
                }
            }
        }
        t
    }

    pub fn summary_table(&self) -> Table {
        let mut t = Table::new(&["check", "holds", "detail"]);
        for s in &self.summaries {
            t.push(vec![s.check.clone(), s.holds.to_string(), s.detail.clone()]);
        }
        t
    }
}

/// Solves every sweep point (in parallel) and evaluates the directional claims.
pub fn run_sweep(spec: SweepSpec) -> Result<SweepReport> {
    let runs: Vec<SweepRun> = spec
        .values
        .par_iter()
        .map(|&value| {
            let params = spec.params_for(value)?;
            let levels = solve_sequence(&params, spec.numerics.grid, &spec.numerics.pde)
                .map(|res| {
                    res.levels.iter().map(|l| (l.n, l.b_n, l.pi0_n, l.a_n, l.smooth_fit_residual)).collect()
                })
                .map_err(|e| e.to_string());
            Ok(SweepRun { run_id: spec.run_id(value), value, params, levels })
        })
        .collect::<Result<_>>()?;
    let summaries = summarize(spec.axis, &runs);
    Ok(SweepReport { spec, runs, summaries })
}

/// Successful runs ordered by increasing axis value.
fn ordered(runs: &[SweepRun]) -> Vec<&SweepRun> {
    let mut ok: Vec<&SweepRun> = runs.iter().filter(|r| r.levels.is_ok()).collect();
    ok.sort_by(|a, b| a.value.key().partial_cmp(&b.value.key()).expect("finite axis values"));
    ok
}

fn summarize(axis: Axis, runs: &[SweepRun]) -> Vec<SummaryCheck> {
    let ok = ordered(runs);
    match axis {
        Axis::Sigma | Axis::R => {
            let shared = ok.iter().map(|r| r.params.n_rights).min().unwrap_or(0);
            let mut worst = f64::NEG_INFINITY;
            let mut at = String::new();
            for w in ok.windows(2) {
                for n in 1..=shared {
                    let rise = w[1].boundary(n).unwrap() - w[0].boundary(n).unwrap();
                    if rise > worst {
                        worst = rise;
                        at = format!("n={n} between {} and {}", w[0].value, w[1].value);
                    }
                }
            }
            let holds = worst <= MONOTONE_TOL;
            let detail = if ok.len() < 2 {
                "fewer than two successful runs".into()
            } else {
                format!("largest increase {} at {at}", fmt_float(worst))
            };
            vec![SummaryCheck { check: format!("b_n nonincreasing in {axis} for every n"), holds, detail }]
        }
        Axis::N => {
            let first: Vec<f64> = ok.iter().map(|r| r.boundary(r.params.n_rights).unwrap()).collect();
            let rise = first.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
            let b1: Vec<f64> = ok.iter().map(|r| r.boundary(1).unwrap()).collect();
            let spread = b1.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - b1.iter().cloned().fold(f64::INFINITY, f64::min);
            let spread = if b1.is_empty() { 0.0 } else { spread };
            vec![
                SummaryCheck {
                    check: "first-investment boundary b_N nonincreasing in N".into(),
                    holds: rise <= MONOTONE_TOL,
                    detail: format!(
                        "b_N = [{}]",
                        first.iter().map(|&b| fmt_float(b)).collect::<Vec<_>>().join(" ")
                    ),
                },
                SummaryCheck {
                    check: "b_1 independent of N".into(),
                    holds: spread < B1_SPREAD_TOL,
                    detail: format!("spread {}", fmt_float(spread)),
                },
            ]
        }
        Axis::EpsTotal | Axis::MuPair => Vec::new(),
    }
}
