//! Expectations of the belief diffusion via finite differences.
//!
//! `u(t, pi) = E_pi[v(Pi_t)]` solves the driftless backward equation
//! `u_t = a(pi) u_pipi` with `a(pi) = rho^2 pi^2 (1 - pi)^2 / 2` and `u(0, .) = v`.
//! The coefficient vanishes at both endpoints, so the belief is absorbed there
//! and pinning the endpoint values is exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, PiGrid};
use crate::model::DerivedParams;
use crate::tridiag;

/// Number of time steps per information increment when no explicit step is requested.
pub const DEFAULT_STEPS_PER_EPS: usize = 64;

/// Time-stepping configuration of the theta scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeConfig {
    /// 0 explicit, 1 fully implicit, 0.5 Crank-Nicolson.
    pub theta: f64,
    /// Desired time step; `None` means `eps / 64`.
    pub dt_target: Option<f64>,
    /// Leading fully implicit steps that damp Crank-Nicolson oscillations on kinked data.
    pub smoothing_steps: usize,
}

impl Default for PdeConfig {
    fn default() -> Self {
        Self { theta: 0.5, dt_target: None, smoothing_steps: 4 }
    }
}

impl PdeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidParameter(format!("theta must lie in [0,1], got {}", self.theta)));
        }
        if let Some(dt) = self.dt_target {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::InvalidParameter(format!("dt_target must be positive, got {dt}")));
            }
        }
        Ok(())
    }

    /// Step count and step size covering the horizon `eps` exactly.
    pub fn steps_for(&self, eps: f64) -> (usize, f64) {
        if eps <= 0.0 {
            return (0, 0.0);
        }
        let steps = match self.dt_target {
            Some(dt) => ((eps / dt).ceil() as usize).max(1),
            None => DEFAULT_STEPS_PER_EPS,
        };
        (steps, eps / steps as f64)
    }
}

/// Grid samples of `pi -> E_pi[v(Pi_eps)]`.
///
/// Endpoint values are held at `boundary_left` / `boundary_right` for every step;
/// they must agree with `v` at the endpoints.
pub fn diffuse_expectation(
    v: &GridFunction,
    eps: f64,
    d: &DerivedParams,
    cfg: &PdeConfig,
    boundary_left: f64,
    boundary_right: f64,
) -> Result<GridFunction> {
    cfg.validate()?;
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("eps must be >= 0, got {eps}")));
    }
    let values = v.values();
    let m = values.len();
    let consistent = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
    if !consistent(values[0], boundary_left) || !consistent(values[m - 1], boundary_right) {
        return Err(Error::InvalidParameter(format!(
            "boundary values ({boundary_left}, {boundary_right}) disagree with the data ({}, {})",
            values[0],
            values[m - 1]
        )));
    }
    if eps == 0.0 {
        return Ok(v.clone());
    }

    let grid = v.grid();
    let h = grid.spacing();
    let (steps, dt) = cfg.steps_for(eps);

    // coefficient dt * a(pi_i) / h^2 on interior nodes
    let coef: Vec<f64> = (1..m - 1).map(|i| dt * d.diffusion(grid.node(i)) / (h * h)).collect();
    if cfg.theta < 0.5 {
        let max_diff = (1..m - 1)
            .map(|i| 2.0 * d.diffusion(grid.node(i)))
            .fold(0.0, f64::max);
        let bound = h * h / max_diff;
        if dt > bound {
            return Err(Error::Unstable { dt, bound });
        }
    }

    let n = m - 2;
    let mut u = values.to_vec();
    u[0] = boundary_left;
    u[m - 1] = boundary_right;
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut scratch = vec![0.0; n];

    for step in 0..steps {
        let theta = if cfg.theta >= 0.5 && step < cfg.smoothing_steps { 1.0 } else { cfg.theta };
        let explicit = 1.0 - theta;
        for j in 0..n {
            let c = coef[j];
            let i = j + 1;
            rhs[j] = u[i] + explicit * c * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
            lower[j] = -theta * c;
            diag[j] = 1.0 + 2.0 * theta * c;
            upper[j] = -theta * c;
        }
        rhs[0] += theta * coef[0] * boundary_left;
        rhs[n - 1] += theta * coef[n - 1] * boundary_right;
        if theta > 0.0 {
            tridiag::solve_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch)?;
        }
        u[1..m - 1].copy_from_slice(&rhs);
    }
    GridFunction::new(grid, u)
}

/// Diffused value of `(x - pi)^2` at `pi`: the conditional variance of `Pi_eps`.
///
/// To leading order this is `rho^2 pi^2 (1 - pi)^2 eps`.
pub fn second_moment_check(pi: f64, eps: f64, d: &DerivedParams, grid: PiGrid, cfg: &PdeConfig) -> Result<f64> {
    if !(0.0..=1.0).contains(&pi) {
        return Err(Error::Domain { value: pi, domain: "[0, 1]" });
    }
    let v = grid.sample(|x| (x - pi) * (x - pi));
    let left = pi * pi;
    let right = (1.0 - pi) * (1.0 - pi);
    let out = diffuse_expectation(&v, eps, d, cfg, left, right)?;
    Ok(out.interpolate(pi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_params, ModelParams};

    fn fig3() -> DerivedParams {
        derive_params(&ModelParams::new(-1.0, 1.0, 4.0, 0.1, 10, 0.1).unwrap()).unwrap()
    }

    #[test]
    fn constant_is_preserved() {
        let g = PiGrid::new(201).unwrap();
        let v = g.sample(|_| 0.7);
        let out = diffuse_expectation(&v, 0.5, &fig3(), &PdeConfig::default(), 0.7, 0.7).unwrap();
        assert!(out.values().iter().all(|x| (x - 0.7).abs() < 1e-12));
    }

    #[test]
    fn identity_is_a_martingale() {
        let g = PiGrid::new(2001).unwrap();
        let v = g.sample(|x| x);
        let out = diffuse_expectation(&v, 0.1, &fig3(), &PdeConfig::default(), 0.0, 1.0).unwrap();
        assert!(out.max_abs_diff(&v) < 1e-6);
    }

    #[test]
    fn zero_horizon_is_identity() {
        let g = PiGrid::new(51).unwrap();
        let v = g.sample(|x| (x - 0.4).max(0.0));
        let out = diffuse_expectation(&v, 0.0, &fig3(), &PdeConfig::default(), 0.0, 0.6).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn explicit_guard_rejects_large_steps() {
        let g = PiGrid::new(2001).unwrap();
        let v = g.sample(|x| x);
        let cfg = PdeConfig { theta: 0.0, dt_target: Some(0.01), smoothing_steps: 0 };
        let err = diffuse_expectation(&v, 0.1, &fig3(), &cfg, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Unstable { .. }));
        // a small enough step passes: bound = h^2 / (rho^2 / 16) = 1e-4 at m = 101
        let g = PiGrid::new(101).unwrap();
        let v = g.sample(|x| x * x);
        let cfg = PdeConfig { theta: 0.0, dt_target: Some(5e-5), smoothing_steps: 0 };
        assert!(diffuse_expectation(&v, 0.01, &fig3(), &cfg, 0.0, 1.0).is_ok());
    }

    #[test]
    fn boundary_mismatch_is_rejected() {
        let g = PiGrid::new(11).unwrap();
        let v = g.sample(|x| x);
        assert!(diffuse_expectation(&v, 0.1, &fig3(), &PdeConfig::default(), 0.0, 2.0).is_err());
    }

    #[test]
    fn step_count_covers_horizon_exactly() {
        let cfg = PdeConfig { dt_target: Some(0.03), ..PdeConfig::default() };
        let (steps, dt) = cfg.steps_for(0.1);
        assert_eq!(steps, 4);
        assert!((dt * steps as f64 - 0.1).abs() < 1e-15);
        assert_eq!(PdeConfig::default().steps_for(0.2).0, 64);
        let bad = PdeConfig { theta: 1.5, ..PdeConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn second_moment_leading_order() {
        let d = fig3();
        let g = PiGrid::new(2001).unwrap();
        let cfg = PdeConfig::default();
        let var = second_moment_check(0.5, 0.001, &d, g, &cfg).unwrap();
        let leading: f64 = 0.25 * 0.25 * 0.25 * 0.001;
        assert!((leading - 1.5625e-5).abs() < 1e-18);
        assert!(((var - leading) / leading).abs() < 0.05, "{var}");
        assert_eq!(second_moment_check(0.5, 0.0, &d, g, &cfg).unwrap(), 0.0);
        assert_eq!(second_moment_check(0.0, 0.3, &d, g, &cfg).unwrap(), 0.0);
    }
}
