//! Euler-Maruyama simulation of the belief process `dPi = rho Pi (1 - Pi) dW`.
//!
//! Every path draws from its own xoshiro256++ generator keyed by `(seed, path index)`, and
//! per-path results are reduced in path order, so estimates are bit-identical
//! for a given configuration regardless of how paths are scheduled.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::model::{derive_params, harmonic_raw, DerivedParams, ModelParams};

/// Simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_paths: usize,
    /// Euler step in time units.
    pub dt: f64,
    /// Physical horizon after which a path contributes nothing.
    pub t_max: f64,
    pub seed: u64,
    /// Beliefs are clamped to `[clamp_delta, 1 - clamp_delta]` after each step.
    pub clamp_delta: f64,
    /// A path is abandoned once the most it could still contribute falls below this.
    /// Abandoned contributions are added to [`Estimate::truncation_bound`].
    pub drop_tol: f64,
}

impl McConfig {
    /// Defaults for discount rate `r`: `dt = 1e-3`, `t_max = 50 / r`.
    pub fn new(n_paths: usize, seed: u64, r: f64) -> Self {
        Self { n_paths, dt: 1e-3, t_max: 50.0 / r, seed, clamp_delta: 1e-9, drop_tol: 1e-5 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidParameter("n_paths must be >= 1".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::InvalidParameter(format!("t_max must be positive, got {}", self.t_max)));
        }
        if !(0.0..=1e-6).contains(&self.clamp_delta) {
            return Err(Error::InvalidParameter(format!(
                "clamp_delta must lie in [0, 1e-6], got {}",
                self.clamp_delta
            )));
        }
        if !(self.drop_tol >= 0.0) {
            return Err(Error::InvalidParameter("drop_tol must be >= 0".into()));
        }
        Ok(())
    }

    /// Generator for one path, keyed by `(seed, path)` through a SplitMix64 mix.
    fn path_rng(&self, path: usize) -> Xoshiro256PlusPlus {
        let key = splitmix64(splitmix64(self.seed) ^ path as u64);
        Xoshiro256PlusPlus::seed_from_u64(key)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    /// Upper bound on the bias from paths cut at `t_max` or abandoned early.
    pub truncation_bound: f64,
}

impl Estimate {
    fn from_samples(samples: &[f64], truncation: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let truncation_bound = truncation.iter().sum::<f64>() / n as f64;
        let est = Self { mean, std_error: (var / n as f64).sqrt(), n_paths: n, truncation_bound };
        if est.truncation_dominates() {
            log::warn!(
                "truncation bound {:e} exceeds the standard error {:e}; increase t_max",
                est.truncation_bound,
                est.std_error
            );
        }
        est
    }

    fn exact(value: f64, n_paths: usize) -> Self {
        Self { mean: value, std_error: 0.0, n_paths, truncation_bound: 0.0 }
    }

    pub fn truncation_dominates(&self) -> bool {
        self.truncation_bound > self.std_error && self.std_error > 0.0
    }

    /// `|mean - target| <= z * std_error + slack`.
    pub fn agrees_with(&self, target: f64, z: f64, slack: f64) -> bool {
        (self.mean - target).abs() <= z * self.std_error + slack
    }
}

/// Mean and standard error of `b - a` for paired samples (common random numbers).
pub fn paired_difference(a: &[f64], b: &[f64]) -> Estimate {
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    Estimate::from_samples(&diffs, &vec![0.0; diffs.len()])
}

/// One Euler-Maruyama step of the belief, clamped into `[clamp_delta, 1 - clamp_delta]`.
///
/// The endpoints are absorbing.
#[inline]
pub fn step_belief(pi: f64, dt: f64, d: &DerivedParams, noise: f64, clamp_delta: f64) -> f64 {
    scaled_step(pi, d.rho * dt.sqrt(), noise, clamp_delta)
}

/// `step_belief` with `rho * sqrt(dt)` precomputed.
#[inline(always)]
fn scaled_step(pi: f64, vol: f64, noise: f64, clamp_delta: f64) -> f64 {
    if pi <= 0.0 || pi >= 1.0 {
        return pi;
    }
    let next = pi + vol * pi * (1.0 - pi) * noise;
    next.clamp(clamp_delta, 1.0 - clamp_delta)
}

/// Steps between checks of the abandonment bound.
const DROP_CHECK_EVERY: usize = 16;

/// Paths advanced in lockstep by one worker; independent paths hide the latency
/// of each path's sequential update.
const LANES: usize = 8;

/// Paths handed to a worker at a time.
const BLOCK: usize = 1024;

/// Per-path state machine: `advance` performs at most one Euler step.
trait Walker {
    type Out;
    /// Returns true once the path is finished.
    fn advance(&mut self) -> bool;
    fn finish(self) -> Self::Out;
}

/// Runs `n_paths` walkers and returns their outputs in path order.
fn run_paths<W, F>(n_paths: usize, start: F) -> Vec<W::Out>
where
    W: Walker,
    W::Out: Send,
    F: Fn(usize) -> W + Sync,
{
    let blocks: Vec<Vec<W::Out>> = (0..n_paths.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(n_paths);
            let mut out: Vec<Option<W::Out>> = (lo..hi).map(|_| None).collect();
            let mut next = lo;
            let mut lanes: Vec<(usize, W)> = Vec::with_capacity(LANES);
            while lanes.len() < LANES && next < hi {
                lanes.push((next, start(next)));
                next += 1;
            }
            while !lanes.is_empty() {
                let mut i = 0;
                while i < lanes.len() {
                    if lanes[i].1.advance() {
                        let (path, w) = if next < hi {
                            let fresh = (next, start(next));
                            next += 1;
                            std::mem::replace(&mut lanes[i], fresh)
                        } else {
                            lanes.swap_remove(i)
                        };
                        out[path - lo] = Some(w.finish());
                        continue;
                    }
                    i += 1;
                }
            }
            out.into_iter().map(|o| o.expect("every path finishes")).collect()
        })
        .collect();
    blocks.into_iter().flatten().collect()
}

/// Advances the belief through `horizon` units of information time.
fn diffuse(mut x: f64, horizon: f64, d: &DerivedParams, cfg: &McConfig, rng: &mut Xoshiro256PlusPlus) -> f64 {
    let (steps, vol) = burst(horizon, d, cfg);
    for _ in 0..steps {
        let z: f64 = StandardNormal.sample(rng);
        x = scaled_step(x, vol, z, cfg.clamp_delta);
    }
    x
}

/// Step count and per-step volatility covering `horizon` exactly.
fn burst(horizon: f64, d: &DerivedParams, cfg: &McConfig) -> (usize, f64) {
    if horizon <= 0.0 {
        return (0, 0.0);
    }
    let steps = (horizon / cfg.dt).ceil().max(1.0) as usize;
    (steps, d.rho * (horizon / steps as f64).sqrt())
}

fn check_belief(pi: f64) -> Result<()> {
    if (0.0..=1.0).contains(&pi) {
        Ok(())
    } else {
        Err(Error::Domain { value: pi, domain: "[0, 1]" })
    }
}

/// One threshold of a single-stop run.
#[derive(Clone, Copy)]
struct Target {
    level: f64,
    g_level: f64,
    /// sup |payoff| over `[level, 1]`
    payoff_bound: f64,
}

struct StopWalker<'a, P> {
    rng: Xoshiro256PlusPlus,
    x: f64,
    disc: f64,
    step: usize,
    max_steps: usize,
    vol: f64,
    decay: f64,
    gamma: f64,
    cfg: &'a McConfig,
    targets: &'a [Target],
    payoff: &'a P,
    /// (value, truncation) per target once resolved
    result: Vec<Option<(f64, f64)>>,
    open: usize,
}

impl<P: Fn(f64) -> f64> StopWalker<'_, P> {
    fn cut(&mut self, only_below_tol: bool) {
        let g = harmonic_raw(self.x, self.gamma);
        for (t, slot) in self.targets.iter().zip(self.result.iter_mut()) {
            if slot.is_none() {
                // E[e^{-r tau}] for hitting the level from x is G(x) / G(level)
                let reach = self.disc * t.payoff_bound * g / t.g_level;
                if !only_below_tol || reach < self.cfg.drop_tol {
                    *slot = Some((0.0, reach));
                    self.open -= 1;
                }
            }
        }
    }
}

impl<P: Fn(f64) -> f64> Walker for StopWalker<'_, P> {
    type Out = Vec<(f64, f64)>;

    fn advance(&mut self) -> bool {
        if self.step >= self.max_steps {
            self.cut(false);
            return true;
        }
        if self.step.is_multiple_of(DROP_CHECK_EVERY) {
            self.cut(true);
            if self.open == 0 {
                return true;
            }
        }
        let z: f64 = StandardNormal.sample(&mut self.rng);
        self.x = scaled_step(self.x, self.vol, z, self.cfg.clamp_delta);
        self.disc *= self.decay;
        self.step += 1;
        for (t, slot) in self.targets.iter().zip(self.result.iter_mut()) {
            if slot.is_none() && self.x >= t.level {
                *slot = Some((self.disc * (self.payoff)(self.x), 0.0));
                self.open -= 1;
            }
        }
        self.open == 0
    }

    fn finish(self) -> Self::Out {
        self.result.into_iter().map(|r| r.unwrap_or((0.0, 0.0))).collect()
    }
}

/// Value of stopping the first time the belief reaches `threshold`, collecting
/// `payoff(Pi_tau)` discounted at rate `p.r`.
pub fn estimate_single_stop(
    pi: f64,
    threshold: f64,
    payoff: impl Fn(f64) -> f64 + Sync,
    p: &ModelParams,
    cfg: &McConfig,
) -> Result<Estimate> {
    Ok(estimate_single_stops(pi, &[threshold], payoff, p, cfg)?[0])
}

/// [`estimate_single_stop`] for several thresholds along the same simulated paths.
///
/// Each estimate is bit-identical to a separate call with the same configuration;
/// sharing the paths only saves work.
pub fn estimate_single_stops(
    pi: f64,
    thresholds: &[f64],
    payoff: impl Fn(f64) -> f64 + Sync,
    p: &ModelParams,
    cfg: &McConfig,
) -> Result<Vec<Estimate>> {
    cfg.validate()?;
    check_belief(pi)?;
    if let Some(&t) = thresholds.iter().find(|&&t| !(t > 0.0 && t < 1.0)) {
        return Err(Error::Domain { value: t, domain: "(0, 1)" });
    }
    let d = derive_params(p)?;
    let targets: Vec<Target> = thresholds
        .iter()
        .filter(|&&t| pi < t)
        .map(|&level| Target {
            level,
            g_level: harmonic_raw(level, d.gamma),
            payoff_bound: (0..=1000)
                .map(|i| payoff(level + (1.0 - level) * i as f64 / 1000.0).abs())
                .fold(0.0, f64::max),
        })
        .collect();

    let mut simulated = Vec::new();
    if !targets.is_empty() {
        let walker = |path| StopWalker {
            rng: cfg.path_rng(path),
            x: pi,
            disc: 1.0,
            step: 0,
            max_steps: (cfg.t_max / cfg.dt).ceil() as usize,
            vol: d.rho * cfg.dt.sqrt(),
            decay: (-p.r * cfg.dt).exp(),
            gamma: d.gamma,
            cfg,
            targets: &targets,
            payoff: &payoff,
            result: vec![None; targets.len()],
            open: targets.len(),
        };
        let paths = run_paths(cfg.n_paths, walker);
        for j in 0..targets.len() {
            let values: Vec<f64> = paths.iter().map(|r| r[j].0).collect();
            let trunc: Vec<f64> = paths.iter().map(|r| r[j].1).collect();
            simulated.push(Estimate::from_samples(&values, &trunc));
        }
    }
    let mut simulated = simulated.into_iter();
    Ok(thresholds
        .iter()
        .map(|&t| if pi >= t { Estimate::exact(payoff(pi), cfg.n_paths) } else { simulated.next().unwrap() })
        .collect())
}

/// `E_pi[v(Pi_eps)]` with `v` linearly interpolated between grid nodes.
pub fn estimate_f(pi: f64, v: &GridFunction, eps: f64, d: &DerivedParams, cfg: &McConfig) -> Result<Estimate> {
    cfg.validate()?;
    check_belief(pi)?;
    if eps == 0.0 {
        return Ok(Estimate::exact(v.interpolate(pi), cfg.n_paths));
    }
    let values: Vec<f64> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = cfg.path_rng(path);
            v.interpolate(diffuse(pi, eps, d, cfg, &mut rng))
        })
        .collect();
    Ok(Estimate::from_samples(&values, &vec![0.0; values.len()]))
}

/// A single investment along a simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exercise {
    /// Rights held just before this investment (`n` in `tau_n`).
    pub rights_before: usize,
    /// Physical time `tau_n`.
    pub physical_time: f64,
    /// Information time `tau_n + (N - n) eps` at which the payoff belief is read.
    pub information_time: f64,
    pub belief: f64,
}

/// Realisation of the threshold strategy along one path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyOutcome {
    /// Investments in the order they happen (`tau_N` first).
    pub exercises: Vec<Exercise>,
    /// `sum_n e^{-r tau_n} (Pi_{tau_n + (N-n) eps} - k)`.
    pub discounted_total: f64,
    /// Contribution bound of the unfinished tail when the path was cut.
    pub truncated: f64,
}

/// Estimate plus the per-path totals, for paired comparisons.
#[derive(Debug, Clone)]
pub struct StrategyRun {
    pub estimate: Estimate,
    pub totals: Vec<f64>,
}

fn validate_boundaries(boundaries: &[f64], p: &ModelParams) -> Result<()> {
    if boundaries.len() != p.n_rights {
        return Err(Error::InvalidParameter(format!(
            "expected {} boundaries, got {}",
            p.n_rights,
            boundaries.len()
        )));
    }
    if let Some(&b) = boundaries.iter().find(|&&b| !(b > 0.0 && b < 1.0)) {
        return Err(Error::Domain { value: b, domain: "(0, 1)" });
    }
    Ok(())
}

/// Quantities shared by every path of a strategy run.
struct StrategySetup<'a> {
    boundaries: &'a [f64],
    /// `lowest_g[n]`: G at the lowest of `b_1..b_n`; no right is exercised before it is hit
    lowest_g: Vec<f64>,
    p: &'a ModelParams,
    d: DerivedParams,
    cfg: &'a McConfig,
    decay: f64,
    vol: f64,
    burst_steps: usize,
    burst_vol: f64,
    max_steps: usize,
    payoff_bound: f64,
}

impl<'a> StrategySetup<'a> {
    fn new(boundaries: &'a [f64], p: &'a ModelParams, cfg: &'a McConfig) -> Result<Self> {
        cfg.validate()?;
        validate_boundaries(boundaries, p)?;
        let d = derive_params(p)?;
        let (burst_steps, burst_vol) = burst(p.eps, &d, cfg);
        let lowest_g = (0..=boundaries.len())
            .map(|n| harmonic_raw(boundaries[..n].iter().copied().fold(1.0, f64::min), d.gamma))
            .collect();
        Ok(Self {
            boundaries,
            lowest_g,
            p,
            d,
            cfg,
            decay: (-p.r * cfg.dt).exp(),
            vol: d.rho * cfg.dt.sqrt(),
            burst_steps,
            burst_vol,
            max_steps: (cfg.t_max / cfg.dt).ceil() as usize,
            payoff_bound: d.k.max(1.0 - d.k),
        })
    }

    fn walker(&self, pi: f64, path: usize, record: bool) -> StrategyWalker<'_> {
        StrategyWalker {
            s: self,
            rng: self.cfg.path_rng(path),
            n: self.boundaries.len(),
            x: pi,
            disc: 1.0,
            step: 0,
            burst_left: 0,
            record,
            out: StrategyOutcome { exercises: Vec::new(), discounted_total: 0.0, truncated: 0.0 },
        }
    }
}

struct StrategyWalker<'a> {
    s: &'a StrategySetup<'a>,
    rng: Xoshiro256PlusPlus,
    /// rights left
    n: usize,
    x: f64,
    disc: f64,
    step: usize,
    /// information-time steps left in the current post-investment burst
    burst_left: usize,
    record: bool,
    out: StrategyOutcome,
}

impl Walker for StrategyWalker<'_> {
    type Out = StrategyOutcome;

    fn advance(&mut self) -> bool {
        let s = self.s;
        if self.burst_left > 0 {
            // the physical clock stands still while the acquired unit reveals eps of information
            let z: f64 = StandardNormal.sample(&mut self.rng);
            self.x = scaled_step(self.x, s.burst_vol, z, s.cfg.clamp_delta);
            self.burst_left -= 1;
            return false;
        }
        if self.n > 0 && self.x >= s.boundaries[self.n - 1] {
            self.out.discounted_total += self.disc * (self.x - s.d.k);
            if self.record {
                let t = self.step as f64 * s.cfg.dt;
                self.out.exercises.push(Exercise {
                    rights_before: self.n,
                    physical_time: t,
                    information_time: t + (s.boundaries.len() - self.n) as f64 * s.p.eps,
                    belief: self.x,
                });
            }
            self.n -= 1;
            self.burst_left = s.burst_steps;
            return false;
        }
        if self.n == 0 {
            return true;
        }
        if self.step >= s.max_steps || self.step.is_multiple_of(DROP_CHECK_EVERY) {
            let reach = self.disc * self.n as f64 * s.payoff_bound * harmonic_raw(self.x, s.d.gamma) / s.lowest_g[self.n];
            if self.step >= s.max_steps || reach < s.cfg.drop_tol {
                self.out.truncated = reach;
                return true;
            }
        }
        let z: f64 = StandardNormal.sample(&mut self.rng);
        self.x = scaled_step(self.x, s.vol, z, s.cfg.clamp_delta);
        self.disc *= s.decay;
        self.step += 1;
        false
    }

    fn finish(self) -> StrategyOutcome {
        self.out
    }
}

/// Value of the threshold strategy `b_N, ..., b_1` started at belief `pi`.
///
/// With `n` rights left the path runs in physical time until the belief reaches
/// `b_n`; the investment pays `Pi - k` discounted at the physical time, then the
/// belief diffuses for `eps` of information time while the physical clock stands
/// still. Several investments can therefore happen at the same instant.
pub fn simulate_full_strategy(pi: f64, boundaries: &[f64], p: &ModelParams, cfg: &McConfig) -> Result<StrategyRun> {
    check_belief(pi)?;
    let setup = StrategySetup::new(boundaries, p, cfg)?;
    let outcomes = run_paths(cfg.n_paths, |path| setup.walker(pi, path, false));
    let totals: Vec<f64> = outcomes.iter().map(|o| o.discounted_total).collect();
    let trunc: Vec<f64> = outcomes.iter().map(|o| o.truncated).collect();
    Ok(StrategyRun { estimate: Estimate::from_samples(&totals, &trunc), totals })
}

/// Full per-path records of the threshold strategy for the first `cfg.n_paths` paths.
pub fn strategy_outcomes(
    pi: f64,
    boundaries: &[f64],
    p: &ModelParams,
    cfg: &McConfig,
) -> Result<Vec<StrategyOutcome>> {
    check_belief(pi)?;
    let setup = StrategySetup::new(boundaries, p, cfg)?;
    Ok(run_paths(cfg.n_paths, |path| setup.walker(pi, path, true)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{single_right_boundary, single_right_value};
    use crate::grid::PiGrid;

    fn fig3() -> ModelParams {
        ModelParams::with_total_learning(-1.0, 1.0, 4.0, 0.1, 10, 1.0).unwrap()
    }

    #[test]
    fn endpoints_absorb_and_zero_snr_freezes() {
        let d = derive_params(&fig3()).unwrap();
        assert_eq!(step_belief(0.0, 0.01, &d, 3.0, 1e-9), 0.0);
        assert_eq!(step_belief(1.0, 0.01, &d, -3.0, 1e-9), 1.0);
        let frozen = DerivedParams { k: 0.5, rho: 0.0, gamma: 2.0 };
        assert_eq!(step_belief(0.3, 0.01, &frozen, 2.5, 1e-9), 0.3);
        let x = step_belief(0.999, 1.0, &d, 50.0, 1e-9);
        assert_eq!(x, 1.0 - 1e-9);
    }

    #[test]
    fn immediate_stop_is_exact() {
        let p = fig3();
        let cfg = McConfig::new(100, 1, p.r);
        let e = estimate_single_stop(0.9, 0.8, |x| x - 0.5, &p, &cfg).unwrap();
        assert_eq!(e.mean, 0.4);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn zero_horizon_f_is_exact() {
        let d = derive_params(&fig3()).unwrap();
        let g = PiGrid::new(101).unwrap();
        let v = g.sample(|x| x * x);
        let cfg = McConfig::new(10, 1, 0.1);
        let e = estimate_f(0.3, &v, 0.0, &d, &cfg).unwrap();
        assert!((e.mean - v.interpolate(0.3)).abs() < 1e-15);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn linear_payoff_is_martingale() {
        let d = derive_params(&fig3()).unwrap();
        let g = PiGrid::new(101).unwrap();
        let v = g.sample(|x| 2.0 * x + 1.0);
        let cfg = McConfig::new(20_000, 7, 0.1);
        let e = estimate_f(0.4, &v, 0.5, &d, &cfg).unwrap();
        assert!(e.agrees_with(1.8, 3.0, 0.0), "{e:?}");
    }

    #[test]
    fn single_stop_matches_closed_form() {
        let p = fig3();
        let d = derive_params(&p).unwrap();
        let b1 = single_right_boundary(&d);
        let cfg = McConfig::new(20_000, 3, p.r);
        let e = estimate_single_stop(0.3, b1, |x| x - d.k, &p, &cfg).unwrap();
        let exact = single_right_value(0.3, &d).unwrap();
        assert!(e.agrees_with(exact, 3.0, 0.0), "{e:?} vs {exact}");
        assert!(!e.truncation_dominates());
    }

    #[test]
    fn shared_paths_match_separate_runs() {
        let p = fig3();
        let cfg = McConfig::new(300, 9, p.r);
        let ts = [0.6, 0.25, 0.75];
        let joint = estimate_single_stops(0.3, &ts, |x| x - 0.5, &p, &cfg).unwrap();
        for (t, e) in ts.iter().zip(&joint) {
            let alone = estimate_single_stop(0.3, *t, |x| x - 0.5, &p, &cfg).unwrap();
            assert_eq!(alone, *e);
        }
        assert_eq!(joint[1].std_error, 0.0);
    }

    #[test]
    fn reproducible_with_seed() {
        let p = fig3();
        let cfg = McConfig::new(500, 11, p.r);
        let b: Vec<f64> = vec![0.7; 10];
        let a1 = simulate_full_strategy(0.4, &b, &p, &cfg).unwrap();
        let a2 = simulate_full_strategy(0.4, &b, &p, &cfg).unwrap();
        assert_eq!(a1.estimate.mean.to_bits(), a2.estimate.mean.to_bits());
        assert_eq!(a1.totals, a2.totals);
    }

    #[test]
    fn strategy_records_are_consistent() {
        let p = fig3();
        let d = derive_params(&p).unwrap();
        let cfg = McConfig::new(200, 5, p.r);
        let b: Vec<f64> = (0..10).map(|i| 0.74 - 0.01 * i as f64).collect();
        let bound = 10.0 * d.k.max(1.0 - d.k);
        for o in strategy_outcomes(0.5, &b, &p, &cfg).unwrap() {
            assert!(o.discounted_total.abs() <= bound);
            assert!(o.exercises.windows(2).all(|w| w[1].physical_time >= w[0].physical_time));
            for (j, e) in o.exercises.iter().enumerate() {
                assert_eq!(e.rights_before, 10 - j);
                assert!((0.0..=1.0).contains(&e.belief));
                assert!(e.belief >= b[e.rights_before - 1]);
                assert!((e.information_time - e.physical_time - j as f64 * p.eps).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = fig3();
        let cfg = McConfig::new(10, 1, p.r);
        assert!(simulate_full_strategy(0.3, &[0.7; 3], &p, &cfg).is_err());
        assert!(simulate_full_strategy(0.3, &[1.0; 10], &p, &cfg).is_err());
        assert!(estimate_single_stop(1.3, 0.7, |x| x, &p, &cfg).is_err());
        let bad = McConfig { clamp_delta: 1e-3, ..cfg };
        assert!(bad.validate().is_err());
        let bad = McConfig { n_paths: 0, ..cfg };
        assert!(bad.validate().is_err());
    }
}
