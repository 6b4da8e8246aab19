//! Solver diagnostics and Monte Carlo cross-checks, collected into a report.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::boundary::{diagnostics, solve_sequence, SolveResult};
use crate::error::{Error, Result};
use crate::experiments::config::{MonteCarlo, Numerics};
use crate::experiments::output::{fmt_float, DerivedRecord};
use crate::model::{single_right_value, ModelParams};
use crate::monte_carlo::{estimate_f, estimate_single_stops, paired_difference, simulate_full_strategy, McConfig};

/// Lower/upper bound slack of the value chain.
pub const CHAIN_TOL: f64 = 1e-3;
/// Slack of `V_n <= F_n`.
pub const CONTINUATION_TOL: f64 = 1e-9;
/// Most negative undivided second difference accepted as convex.
pub const CONVEXITY_TOL: f64 = 1e-6;
pub const RESIDUAL_TOL: f64 = 1e-3;
/// Standard errors allowed in Monte Carlo comparisons.
pub const Z: f64 = 3.0;
/// Discretisation allowance of the PDE expectation.
pub const PDE_TOL: f64 = 1e-3;
/// Discretisation allowance of the recursion against the simulated strategy.
pub const RECURSION_TOL: f64 = 1e-2;
/// Threshold offset used to probe optimality.
pub const PERTURBATION: f64 = 0.05;
/// Tolerance of the no-learning degeneracy.
pub const DEGENERACY_TOL: f64 = 1e-6;
/// Beliefs at which the expectation is cross-checked.
pub const F_POINTS: [f64; 3] = [0.2, 0.5, 0.8];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Human-readable statement of what was compared and at which tolerance.
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Self { name: name.into(), passed, detail }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub params: ModelParams,
    pub derived: DerivedRecord,
    pub numerics: Numerics,
    pub monte_carlo: MonteCarlo,
    /// Paths per run of the policy-dominance comparison.
    pub dominance_paths: usize,
    pub boundaries_from_file: bool,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(s, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        let _ = writeln!(s, "{} of {} checks passed", self.checks.len() - failed, self.checks.len());
        s
    }
}

/// Reads `b_1..b_N` from a CSV with `n` and `b_n` columns (the `boundaries.csv` layout).
pub fn read_boundaries(path: &Path, n_rights: usize) -> Result<Vec<f64>> {
    let bad = |msg: String| Error::Config(format!("{}: {msg}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| header.iter().position(|h| h == name).ok_or_else(|| bad(format!("missing column {name}")));
    let (cn, cb) = (col("n")?, col("b_n")?);
    let mut out = vec![f64::NAN; n_rights];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let n: usize = rec[cn].trim().parse().map_err(|_| bad(format!("bad n {:?}", &rec[cn])))?;
        let b: f64 = rec[cb].trim().parse().map_err(|_| bad(format!("bad b_n {:?}", &rec[cb])))?;
        if n == 0 || n > n_rights {
            return Err(bad(format!("n = {n} outside 1..={n_rights}")));
        }
        out[n - 1] = b;
    }
    if let Some(n) = out.iter().position(|b| b.is_nan()) {
        return Err(bad(format!("no row for n = {}", n + 1)));
    }
    Ok(out)
}

fn solver_checks(res: &SolveResult, checks: &mut Vec<Check>) {
    let diag = diagnostics(res);
    let h2 = res.grid.spacing().powi(2);
    let chain = diag.levels.iter().map(|l| l.chain_violation).fold(0.0, f64::max);
    checks.push(Check::new(
        "value chain",
        chain <= CHAIN_TOL,
        format!("largest violation of n(pi-k)^+ <= g^+ <= V <= F <= n(1-k)pi is {} (tol {CHAIN_TOL})", fmt_float(chain)),
    ));
    let above = diag.levels.iter().map(|l| l.value_above_continuation).fold(0.0, f64::max);
    checks.push(Check::new(
        "value below continuation",
        above <= CONTINUATION_TOL,
        format!("max(V_n - F_n) = {} (tol {CONTINUATION_TOL:e})", fmt_float(above)),
    ));
    let convex = diag
        .levels
        .iter()
        .map(|l| l.min_second_difference_v.min(l.min_second_difference_f) * h2)
        .fold(f64::INFINITY, f64::min);
    checks.push(Check::new(
        "convexity",
        convex >= -CONVEXITY_TOL,
        format!("smallest second difference of V_n, F_n is {} (tol -{CONVEXITY_TOL:e})", fmt_float(convex)),
    ));
    let h = res.grid.spacing();
    let band = res.levels.iter().all(|l| l.pi0_n < l.b_n && l.b_n <= res.b1_closed_form + h);
    checks.push(Check::new(
        "boundary band",
        band,
        format!("pi0_n < b_n <= b_1 + h for every n (b_1 = {})", fmt_float(res.b1_closed_form)),
    ));
    let residual = res.levels.iter().map(|l| l.smooth_fit_residual).fold(0.0, f64::max);
    checks.push(Check::new(
        "smooth fit",
        residual < RESIDUAL_TOL,
        format!("largest |A_n G'(b_n) - g_n'(b_n)| = {} (tol {RESIDUAL_TOL})", fmt_float(residual)),
    ));
    let b1_err = (res.level(1).b_n - res.b1_closed_form).abs();
    checks.push(Check::new(
        "single-right boundary",
        b1_err < 1e-4,
        format!("|b_1 - closed form| = {} (tol 1e-4)", fmt_float(b1_err)),
    ));
    if res.params.eps == 0.0 {
        let v1 = &res.level(1).v_n;
        let mut worst_b = 0.0_f64;
        let mut worst_v = 0.0_f64;
        for l in &res.levels {
            worst_b = worst_b.max((l.b_n - res.b1_closed_form).abs());
            worst_v = worst_v.max(l.v_n.max_abs_diff(&v1.map(|_, v| l.n as f64 * v)));
        }
        checks.push(Check::new(
            "no-learning degeneracy",
            worst_b < DEGENERACY_TOL && worst_v < DEGENERACY_TOL,
            format!(
                "max |b_n - b_1| = {}, max |V_n - n V_1| = {} (tol {DEGENERACY_TOL})",
                fmt_float(worst_b),
                fmt_float(worst_v)
            ),
        ));
    }
}

fn describe(mean: f64, se: f64) -> String {
    format!("{} (SE {})", fmt_float(mean), fmt_float(se))
}

/// Runs the diagnostics and the simulation cross-checks.
///
/// `boundaries` replaces the solver's boundaries in the strategy simulation; the
/// dominance check then compares the solver's policy against them. Without it the
/// solver's policy is compared against every single-coordinate shift by
/// [`PERTURBATION`].
pub fn verify(
    p: &ModelParams,
    num: &Numerics,
    mc: &MonteCarlo,
    dominance_paths: usize,
    boundaries: Option<Vec<f64>>,
) -> Result<VerifyReport> {
    let res = solve_sequence(p, num.grid, &num.pde)?;
    let d = res.derived;
    let b1 = res.b1_closed_form;
    let pi = mc.start_pi;
    let cfg = mc.mc;
    let mut checks = Vec::new();
    solver_checks(&res, &mut checks);

    // single stop at b_1 against the closed form, shifted thresholds must not beat it
    let exact = single_right_value(pi, &d)?;
    let shifted: Vec<(char, f64)> = [('-', b1 - PERTURBATION), ('+', b1 + PERTURBATION)]
        .into_iter()
        .filter(|(_, t)| *t > 0.0 && *t < 1.0)
        .collect();
    let thresholds: Vec<f64> = std::iter::once(b1).chain(shifted.iter().map(|s| s.1)).collect();
    let est = estimate_single_stops(pi, &thresholds, |x| x - d.k, p, &cfg)?;
    checks.push(Check::new(
        "single stop vs closed form",
        est[0].agrees_with(exact, Z, 0.0),
        format!("MC {} vs V_1({pi}) = {} (tol {Z} SE)", describe(est[0].mean, est[0].std_error), fmt_float(exact)),
    ));
    for ((sign, _), e) in shifted.iter().zip(&est[1..]) {
        checks.push(Check::new(
            format!("single stop at b_1 {sign} {PERTURBATION}"),
            e.mean <= exact + Z * e.std_error,
            format!("MC {} <= V_1({pi}) + {Z} SE", describe(e.mean, e.std_error)),
        ));
    }

    let v1 = &res.level(1).v_n;
    let f1 = &res.level(1).f_n;
    for x in F_POINTS {
        let e = estimate_f(x, v1, p.eps, &d, &cfg)?;
        let pde = f1.interpolate(x);
        let tol = (Z * e.std_error).max(PDE_TOL);
        checks.push(Check::new(
            format!("F_1({x}) PDE vs MC"),
            (e.mean - pde).abs() <= tol,
            format!("MC {} vs PDE {} (tol {})", describe(e.mean, e.std_error), fmt_float(pde), fmt_float(tol)),
        ));
    }

    let solver_b = res.boundaries();
    let from_file = boundaries.is_some();
    let used = boundaries.unwrap_or_else(|| solver_b.clone());
    let run = simulate_full_strategy(pi, &used, p, &cfg)?;
    let v_n = res.value_at(p.n_rights, pi);
    checks.push(Check::new(
        format!("strategy vs V_{}", p.n_rights),
        run.estimate.agrees_with(v_n, Z, RECURSION_TOL),
        format!(
            "MC {} with {} boundaries vs V_{}({pi}) = {} (tol {Z} SE + {RECURSION_TOL})",
            describe(run.estimate.mean, run.estimate.std_error),
            if from_file { "supplied" } else { "solver" },
            p.n_rights,
            fmt_float(v_n)
        ),
    ));

    let m = dominance_paths.min(cfg.n_paths).max(2);
    let small = McConfig { n_paths: m, ..cfg };
    // per-path results depend only on (seed, path), so the first m totals are a valid base
    let base: Vec<f64> = if from_file {
        simulate_full_strategy(pi, &solver_b, p, &small)?.totals
    } else {
        run.totals[..m].to_vec()
    };
    let alternatives: Vec<(String, Vec<f64>)> = if from_file {
        vec![("supplied boundaries".into(), used)]
    } else {
        let mut alt = Vec::new();
        for n in 1..=p.n_rights {
            for s in [-PERTURBATION, PERTURBATION] {
                let mut b = solver_b.clone();
                b[n - 1] += s;
                if b[n - 1] > 0.0 && b[n - 1] < 1.0 {
                    alt.push((format!("b_{n} {s:+}"), b));
                }
            }
        }
        alt
    };
    let mut worst: Option<(String, f64, f64)> = None;
    let mut dominated = true;
    for (label, b) in alternatives {
        let other = simulate_full_strategy(pi, &b, p, &small)?;
        let diff = paired_difference(&base, &other.totals);
        if diff.mean > Z * diff.std_error {
            dominated = false;
        }
        let z = if diff.std_error > 0.0 { diff.mean / diff.std_error } else { 0.0 };
        if worst.as_ref().is_none_or(|w| z > w.1) {
            worst = Some((label, z, diff.mean));
        }
    }
    let detail = match worst {
        Some((label, z, gain)) => format!(
            "largest gain over the solver policy: {} ({label}, {:.2} joint SE; tol {Z} SE, {m} paths)",
            fmt_float(gain),
            z
        ),
        None => "no admissible perturbation".into(),
    };
    checks.push(Check::new("policy dominance", dominated, detail));

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        params: *p,
        derived: DerivedRecord::new(p, &d, b1),
        numerics: *num,
        monte_carlo: *mc,
        dominance_paths: m,
        boundaries_from_file: from_file,
        checks,
        passed,
    })
}
