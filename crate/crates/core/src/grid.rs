//! Uniform belief grids and functions sampled on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `pi_i = i / (m - 1)` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiGrid {
    m: usize,
}

impl PiGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidParameter(format!("grid needs at least 3 nodes, got {m}")));
        }
        Ok(Self { m })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `1 / (m - 1)`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        1.0 / (self.m - 1) as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i == self.m - 1 {
            1.0
        } else {
            i as f64 / (self.m - 1) as f64
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.m).map(move |i| self.node(i))
    }

    /// Index of the cell `[pi_i, pi_{i+1}]` containing `pi` (clamped into the grid).
    #[inline]
    pub fn cell(&self, pi: f64) -> usize {
        let pos = pi * (self.m - 1) as f64;
        if pos <= 0.0 {
            0
        } else {
            (pos.floor() as usize).min(self.m - 2)
        }
    }

    /// Index of the node closest to `pi`.
    pub fn nearest(&self, pi: f64) -> usize {
        let pos = (pi.clamp(0.0, 1.0) * (self.m - 1) as f64).round();
        pos as usize
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction { grid: *self, values: self.nodes().map(f).collect() }
    }
}

/// One finite value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: PiGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: PiGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "grid function has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: PiGrid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    #[inline]
    pub fn grid(&self) -> PiGrid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Piecewise-linear interpolation; `pi` is clamped into `[0, 1]`.
    pub fn interpolate(&self, pi: f64) -> f64 {
        let pi = pi.clamp(0.0, 1.0);
        let i = self.grid.cell(pi);
        let h = self.grid.spacing();
        let w = ((pi - self.grid.node(i)) / h).clamp(0.0, 1.0);
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// Nodal first derivative: central differences inside, one-sided at the ends.
    pub fn derivative(&self) -> Vec<f64> {
        let v = &self.values;
        let m = v.len();
        let h = self.grid.spacing();
        let mut d = Vec::with_capacity(m);
        d.push((v[1] - v[0]) / h);
        for i in 1..m - 1 {
            d.push((v[i + 1] - v[i - 1]) / (2.0 * h));
        }
        d.push((v[m - 1] - v[m - 2]) / h);
        d
    }

    /// Undivided second differences `v[i-1] - 2 v[i] + v[i+1]` on interior nodes.
    pub fn second_differences(&self) -> Vec<f64> {
        self.values.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect()
    }

    /// Smallest undivided second difference; nonnegative for discretely convex data.
    pub fn min_second_difference(&self) -> f64 {
        self.second_differences().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        let values = self.grid.nodes().zip(&self.values).map(|(x, &v)| f(x, v)).collect();
        GridFunction { grid: self.grid, values }
    }
}

/// C¹ piecewise-cubic Hermite interpolant with central-difference slopes.
///
/// Nodal slopes equal the second-order central differences of the samples, so
/// the interpolant's derivative at a node is exactly that difference quotient.
#[derive(Debug, Clone)]
pub struct HermiteInterpolant {
    grid: PiGrid,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl HermiteInterpolant {
    pub fn new(f: &GridFunction) -> Self {
        Self { grid: f.grid, values: f.values.clone(), slopes: f.derivative() }
    }

    /// Value and first derivative at `pi` (clamped into `[0, 1]`).
    pub fn eval(&self, pi: f64) -> (f64, f64) {
        let pi = pi.clamp(0.0, 1.0);
        let i = self.grid.cell(pi);
        let h = self.grid.spacing();
        let t = ((pi - self.grid.node(i)) / h).clamp(0.0, 1.0);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let slope = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        (value, slope)
    }
}
