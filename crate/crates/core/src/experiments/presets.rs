//! Named parameter sets behind the published figures.

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// One solve inside a figure.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub id: String,
    pub params: ModelParams,
}

/// What a figure plots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plot {
    /// `V_1`, `F_1` with the bounds `(pi - k)^+` and `(1 - k) pi`.
    ValueBounds,
    /// `V_n`, `F_n`, `g_n` for `n = 1..=levels`.
    Curves { levels: usize },
    /// The boundary sequence of every run.
    Boundaries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub number: u8,
    pub title: &'static str,
    pub plot: Plot,
    pub runs: Vec<Run>,
}

pub const FIGURES: std::ops::RangeInclusive<u8> = 1..=8;

/// `mu0 = -1, mu1 = 1, sigma = 4, r = 0.1, N = 10` with `N eps = 1`.
pub fn base() -> ModelParams {
    ModelParams::with_total_learning(-1.0, 1.0, 4.0, 0.1, 10, 1.0).expect("valid base")
}

fn run(id: impl Into<String>, params: ModelParams) -> Run {
    Run { id: id.into(), params }
}

fn with_total(mu0: f64, mu1: f64, sigma: f64, r: f64, n: usize, total: f64) -> ModelParams {
    ModelParams::with_total_learning(mu0, mu1, sigma, r, n, total).expect("valid preset")
}

pub fn figure(number: u8) -> Result<Figure> {
    let b = base();
    let (title, plot, runs) = match number {
        1 => ("V_1 and F_1 with their shared bounds", Plot::ValueBounds, vec![run("base", b)]),
        2 => ("V_n, F_n and g_n for n = 1, 2, 3", Plot::Curves { levels: 3 }, vec![run("base", b)]),
        3 => ("boundaries b_10, ..., b_1", Plot::Boundaries, vec![run("base", b)]),
        4 => (
            "boundaries for total learning 1 and 10",
            Plot::Boundaries,
            [1.0, 10.0]
                .iter()
                .map(|&t| run(format!("total_learning_{t}"), with_total(-1.0, 1.0, 4.0, 0.1, 10, t)))
                .collect(),
        ),
        5 => (
            "boundaries for sigma = 1, 4, 10",
            Plot::Boundaries,
            [1.0, 4.0, 10.0]
                .iter()
                .map(|&s| run(format!("sigma_{s}"), with_total(-1.0, 1.0, s, 0.1, 10, 1.0)))
                .collect(),
        ),
        6 => (
            "boundaries for r = 0.01, 0.1, 0.5",
            Plot::Boundaries,
            [0.01, 0.1, 0.5]
                .iter()
                .map(|&r| run(format!("r_{r}"), with_total(-1.0, 1.0, 4.0, r, 10, 1.0)))
                .collect(),
        ),
        7 => (
            "boundaries for drift pairs (mu0, mu1)",
            Plot::Boundaries,
            MU_PAIRS
                .iter()
                .map(|&(m0, m1)| run(format!("mu_{m0}_{m1}"), with_total(m0, m1, 4.0, 0.1, 10, 1.0)))
                .collect(),
        ),
        8 => (
            "boundaries for N = 10, 20, 100 at total learning 1",
            Plot::Boundaries,
            [10, 20, 100]
                .iter()
                .map(|&n| run(format!("N_{n}"), with_total(-1.0, 1.0, 4.0, 0.1, n, 1.0)))
                .collect(),
        ),
        _ => return Err(Error::InvalidParameter(format!("figure must be in 1..=8, got {number}"))),
    };
    Ok(Figure { number, title, plot, runs })
}

/// Drift pairs of the drift comparison.
pub const MU_PAIRS: [(f64, f64); 5] = [(-5.0, 1.0), (-2.0, 1.0), (-1.0, 1.0), (-1.0, 2.0), (-1.0, 5.0)];

/// `(k, rho)` implied by [`MU_PAIRS`] at `sigma = 4`, as fractions.
pub const MU_PAIR_DERIVED: [((f64, f64), (f64, f64)); 5] =
    [((5.0, 6.0), (3.0, 2.0)), ((2.0, 3.0), (3.0, 4.0)), ((1.0, 2.0), (1.0, 2.0)), ((1.0, 3.0), (3.0, 4.0)), ((1.0, 6.0), (3.0, 2.0))];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::derive_params;

    #[test]
    fn every_figure_has_valid_runs() {
        for f in FIGURES {
            let fig = figure(f).unwrap();
            assert!(!fig.runs.is_empty());
            for r in &fig.runs {
                r.params.validate().unwrap();
            }
        }
        assert!(figure(0).is_err() && figure(9).is_err());
    }

    #[test]
    fn drift_pairs_give_captioned_fractions() {
        let fig = figure(7).unwrap();
        for (r, ((kn, kd), (rn, rd))) in fig.runs.iter().zip(MU_PAIR_DERIVED) {
            let d = derive_params(&r.params).unwrap();
            assert_eq!(d.k, kn / kd, "{}", r.id);
            assert_eq!(d.rho, rn / rd, "{}", r.id);
        }
    }

    #[test]
    fn large_n_keeps_total_learning() {
        for r in figure(8).unwrap().runs {
            assert!((r.params.total_learning() - 1.0).abs() < 1e-12);
        }
    }
}
