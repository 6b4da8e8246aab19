//! Backward recursion over the number of remaining rights.
//!
//! With `n` rights left the investor stops at the first time the belief reaches
//! `b_n` and collects `g_n(pi) = pi - k + F_{n-1}(pi)`, where `F_{n-1}` is the
//! value of the remaining rights after an `eps`-long burst of extra information.
//! Below the boundary the value is `A_n G(pi)`; smooth fit at `b_n` gives
//!
//! ```text
//! h_n(b) = G'(b) g_n(b) - G(b) g_n'(b) = 0,    A_n = g_n(b_n) / G(b_n).
//! ```
//!
//! Each level therefore needs one root of `h_n` and one diffusion solve for `F_n`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, HermiteInterpolant, PiGrid};
use crate::model::{
    derive_params, harmonic_derivative_raw, harmonic_raw, single_right_boundary, DerivedParams, ModelParams,
};
use crate::pde::{diffuse_expectation, PdeConfig};

/// Width below which the boundary bisection stops.
pub const ROOT_TOL: f64 = 1e-9;

/// One level of the recursion, `n` rights remaining.
#[derive(Debug, Clone)]
pub struct LevelResult {
    pub n: usize,
    /// Investment boundary.
    pub b_n: f64,
    /// Coefficient of `G` in the continuation region.
    pub a_n: f64,
    pub v_n: GridFunction,
    /// `E_pi[V_n(Pi_eps)]`.
    pub f_n: GridFunction,
    pub g_n: GridFunction,
    /// Root of `g_n = 0`.
    pub pi0_n: f64,
    /// Root of the discrete `L g_n = 0`, when one is found. Noisy near kinks; diagnostic only.
    pub pi_star_n: Option<f64>,
    /// `|V_n'(b_n-) - V_n'(b_n+)|`.
    pub smooth_fit_residual: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub params: ModelParams,
    pub derived: DerivedParams,
    pub grid: PiGrid,
    pub pde: PdeConfig,
    /// Closed-form single-right boundary, for reference.
    pub b1_closed_form: f64,
    /// Levels `n = 1..=N` in order.
    pub levels: Vec<LevelResult>,
}

impl SolveResult {
    pub fn level(&self, n: usize) -> &LevelResult {
        &self.levels[n - 1]
    }

    /// Boundaries `b_1, ..., b_N`.
    pub fn boundaries(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.b_n).collect()
    }

    /// `V_n(pi)`: analytic below the boundary, interpolated above it.
    pub fn value_at(&self, n: usize, pi: f64) -> f64 {
        let level = self.level(n);
        if pi < level.b_n {
            level.a_n * harmonic_raw(pi, self.derived.gamma)
        } else {
            level.v_n.interpolate(pi)
        }
    }
}

/// `F_{n-1}` in a form that can be evaluated between nodes, with its slope.
#[derive(Debug, Clone)]
enum Continuation {
    Zero,
    /// Diffused samples (`eps > 0`).
    Sampled(HermiteInterpolant),
    /// Without learning `F_{n-1} = V_{n-1}`, which is kept as the exact pasted
    /// pieces `(A_j, b_j)` for `j = 1..n-1`.
    Exact(Vec<(f64, f64)>),
}

impl Continuation {
    fn eval(&self, pi: f64, d: &DerivedParams) -> (f64, f64) {
        match self {
            Continuation::Zero => (0.0, 0.0),
            Continuation::Sampled(f) => f.eval(pi),
            Continuation::Exact(pieces) => {
                let (mut value, mut slope) = (0.0, 0.0);
                for &(a, b) in pieces.iter().rev() {
                    if pi < b {
                        value += a * harmonic_raw(pi, d.gamma);
                        slope += if pi > 0.0 { a * harmonic_derivative_raw(pi, d.gamma) } else { 0.0 };
                        break;
                    }
                    value += pi - d.k;
                    slope += 1.0;
                }
                (value, slope)
            }
        }
    }
}

/// The payoff `g_n` evaluated off-grid.
struct Payoff<'a> {
    d: &'a DerivedParams,
    cont: &'a Continuation,
}

impl Payoff<'_> {
    fn eval(&self, pi: f64) -> (f64, f64) {
        let (f, df) = self.cont.eval(pi, self.d);
        (pi - self.d.k + f, 1.0 + df)
    }

    /// `G' g - G g'` on the open interval.
    fn smooth_fit(&self, pi: f64) -> f64 {
        let (g, dg) = self.eval(pi);
        harmonic_derivative_raw(pi, self.d.gamma) * g - harmonic_raw(pi, self.d.gamma) * dg
    }
}

/// Nodal payoff `g_n(pi_i) = pi_i - k + F_{n-1}(pi_i)`.
pub fn build_g(f_prev: &GridFunction, d: &DerivedParams) -> GridFunction {
    f_prev.map(|pi, f| pi - d.k + f)
}

/// Nodal smooth-fit function `h(pi_i) = G'(pi_i) g(pi_i) - G(pi_i) g'(pi_i)` with
/// central-difference slopes.
///
/// Only interior entries are meaningful: the first entry holds the limit 0 and
/// the last repeats its neighbour, since `G'` is unbounded at 1.
pub fn eval_h(g: &GridFunction, d: &DerivedParams) -> GridFunction {
    let grid = g.grid();
    let slopes = g.derivative();
    let m = grid.len();
    let mut h = vec![0.0; m];
    for i in 1..m - 1 {
        let pi = grid.node(i);
        h[i] = harmonic_derivative_raw(pi, d.gamma) * g.values()[i] - harmonic_raw(pi, d.gamma) * slopes[i];
    }
    h[m - 1] = h[m - 2];
    GridFunction::new(grid, h).expect("finite smooth-fit samples")
}

/// Locates the unique negative-to-nonnegative crossing of `h` on the interior nodes.
///
/// The crossing is first placed at the root of the linear interpolant between the
/// bracketing nodes; when `refine` evaluates `h` off-grid, the bracket is then
/// bisected down to [`ROOT_TOL`]. The result may not exceed `cap + spacing`.
pub fn find_boundary(h: &GridFunction, cap: f64, refine: Option<&dyn Fn(f64) -> f64>) -> Result<f64> {
    let grid = h.grid();
    let values = h.values();
    let m = grid.len();

    let mut crossings = Vec::new();
    let mut exact_node = None;
    for i in 2..m - 1 {
        let (prev, cur) = (values[i - 1], values[i]);
        if (prev < 0.0) != (cur < 0.0) {
            crossings.push(i);
        }
    }
    if crossings.len() > 1 {
        return Err(Error::MultipleSignChanges {
            count: crossings.len(),
            first: grid.node(crossings[0]),
            second: grid.node(crossings[1]),
        });
    }
    let Some(&i) = crossings.first() else {
        return Err(Error::NoSignChange);
    };
    if values[i - 1] >= 0.0 {
        // nonnegative-to-negative: wrong orientation
        return Err(Error::NoSignChange);
    }
    if values[i] == 0.0 {
        exact_node = Some(grid.node(i));
    }

    let (lo, hi) = (grid.node(i - 1), grid.node(i));
    let root = match exact_node {
        Some(node) => node,
        None => {
            let linear = lo + (hi - lo) * values[i - 1] / (values[i - 1] - values[i]);
            match refine {
                Some(f) => bisect(f, lo, hi).unwrap_or(linear),
                None => linear,
            }
        }
    };

    if root > cap + grid.spacing() {
        return Err(Error::BoundaryAboveCap { root, cap });
    }
    Ok(root)
}

/// Bisection for a sign change of `f` on `[lo, hi]`; `None` if the ends do not bracket.
fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo >= 0.0 || f_hi < 0.0 {
        return None;
    }
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Pasted candidate: `A_n G` below `b_n`, `g_n` at and above it.
#[derive(Debug, Clone)]
pub struct Pasted {
    pub v: GridFunction,
    pub a: f64,
}

/// Pastes the candidate value with `g_n(b_n)` taken from the linear interpolant of `g`.
pub fn paste_candidate(g: &GridFunction, b_n: f64, d: &DerivedParams) -> Result<Pasted> {
    paste_candidate_at(g, b_n, g.interpolate(b_n), d)
}

/// Pastes the candidate value using a caller-supplied `g_n(b_n)`.
pub fn paste_candidate_at(g: &GridFunction, b_n: f64, g_at_b: f64, d: &DerivedParams) -> Result<Pasted> {
    if !(b_n > 0.0 && b_n < 1.0) {
        return Err(Error::Domain { value: b_n, domain: "(0, 1)" });
    }
    if !(g_at_b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "payoff at the boundary must be positive, got {g_at_b} at {b_n}"
        )));
    }
    let a = g_at_b / harmonic_raw(b_n, d.gamma);
    let v = g.map(|pi, gv| if pi < b_n { a * harmonic_raw(pi, d.gamma) } else { gv });
    Ok(Pasted { v, a })
}

/// Root of the payoff, `g(pi0) = 0`.
fn payoff_root(g: &GridFunction, payoff: &Payoff<'_>) -> f64 {
    let grid = g.grid();
    let values = g.values();
    let i = values.iter().position(|&v| v >= 0.0).unwrap_or(grid.len() - 1).max(1);
    let f = |x: f64| payoff.eval(x).0;
    bisect(&f, grid.node(i - 1), grid.node(i)).unwrap_or(grid.node(i))
}

/// Discrete `(L g)(pi_i) = a(pi_i) F''(pi_i) - r g(pi_i)` on interior nodes (index `i - 1`).
pub(crate) fn generator_of_payoff(g: &GridFunction, f_prev: &GridFunction, d: &DerivedParams, r: f64) -> Vec<f64> {
    let grid = g.grid();
    let h2 = grid.spacing() * grid.spacing();
    f_prev
        .second_differences()
        .iter()
        .enumerate()
        .map(|(j, dd)| {
            let i = j + 1;
            d.diffusion(grid.node(i)) * dd / h2 - r * g.values()[i]
        })
        .collect()
}

/// First positive-to-nonpositive crossing of the discrete `L g_n`.
fn generator_root(lg: &[f64], grid: PiGrid) -> Option<f64> {
    (1..lg.len()).find(|&j| lg[j - 1] > 0.0 && lg[j] <= 0.0).map(|j| {
        let (x0, x1) = (grid.node(j), grid.node(j + 1));
        x0 + (x1 - x0) * lg[j - 1] / (lg[j - 1] - lg[j])
    })
}

/// Solves levels `n = 1..=N` of the recursion on `grid`.
pub fn solve_sequence(p: &ModelParams, grid: PiGrid, cfg: &PdeConfig) -> Result<SolveResult> {
    let d = derive_params(p)?;
    cfg.validate()?;
    let b1_closed_form = single_right_boundary(&d);

    let mut levels: Vec<LevelResult> = Vec::with_capacity(p.n_rights);
    let mut cont = Continuation::Zero;
    let mut f_prev = GridFunction::zeros(grid);

    for n in 1..=p.n_rights {
        let at_level = |e: Error| Error::AtLevel { level: n, source: Box::new(e) };
        let payoff = Payoff { d: &d, cont: &cont };

        let g = build_g(&f_prev, &d);
        let h = GridFunction::new(
            grid,
            (0..grid.len())
                .map(|i| match i {
                    0 => 0.0,
                    i if i == grid.len() - 1 => 0.0,
                    i => payoff.smooth_fit(grid.node(i)),
                })
                .collect(),
        )
        .map_err(at_level)?;
        let refine = |x: f64| payoff.smooth_fit(x);
        let b = find_boundary(&h, b1_closed_form, Some(&refine)).map_err(at_level)?;

        let (g_b, dg_b) = payoff.eval(b);
        let pasted = paste_candidate_at(&g, b, g_b, &d).map_err(at_level)?;
        let residual = (pasted.a * harmonic_derivative_raw(b, d.gamma) - dg_b).abs();
        let pi0 = payoff_root(&g, &payoff);
        let pi_star = generator_root(&generator_of_payoff(&g, &f_prev, &d, p.r), grid);

        let right = n as f64 * (1.0 - d.k);
        let f_n = diffuse_expectation(&pasted.v, p.eps, &d, cfg, 0.0, right).map_err(at_level)?;

        cont = if p.eps == 0.0 {
            let mut pieces = match cont {
                Continuation::Exact(pieces) => pieces,
                _ => Vec::new(),
            };
            pieces.push((pasted.a, b));
            Continuation::Exact(pieces)
        } else {
            Continuation::Sampled(HermiteInterpolant::new(&f_n))
        };
        f_prev = f_n.clone();

        levels.push(LevelResult {
            n,
            b_n: b,
            a_n: pasted.a,
            v_n: pasted.v,
            f_n,
            g_n: g,
            pi0_n: pi0,
            pi_star_n: pi_star,
            smooth_fit_residual: residual,
        });
    }

    Ok(SolveResult { params: *p, derived: d, grid, pde: *cfg, b1_closed_form, levels })
}

/// Per-level health checks of a solved recursion.
#[derive(Debug, Clone, Serialize)]
pub struct LevelDiagnostics {
    pub n: usize,
    pub b_n: f64,
    pub pi0_n: f64,
    pub pi_star_n: Option<f64>,
    /// Largest violation of `n(pi-k)^+ <= max(0,g_n) <= V_n <= F_n <= n(1-k)pi` over the nodes.
    pub chain_violation: f64,
    /// Largest violation of `V_n <= F_n` alone.
    pub value_above_continuation: f64,
    /// Smallest divided second difference of `V_n` and `F_n`.
    pub min_second_difference_v: f64,
    pub min_second_difference_f: f64,
    pub smooth_fit_residual: f64,
    /// `b_n <= b_1 + h`.
    pub below_single_right_boundary: bool,
    /// Largest discrete `(L V_n)` at nodes at least `2h` from `b_n`.
    pub max_generator_of_value: f64,
    /// Largest increase of the discrete `(L g_n)` between neighbouring nodes.
    pub generator_of_payoff_increase: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub levels: Vec<LevelDiagnostics>,
    /// Whether `b_N <= ... <= b_1` held; reported, never required.
    pub boundaries_monotone_in_n: bool,
}

pub fn diagnostics(res: &SolveResult) -> Diagnostics {
    let d = &res.derived;
    let r = res.params.r;
    let grid = res.grid;
    let h = grid.spacing();
    let h2 = h * h;
    let nodes: Vec<f64> = grid.nodes().collect();

    let levels = res
        .levels
        .iter()
        .enumerate()
        .map(|(idx, level)| {
            let n = level.n as f64;
            let v = level.v_n.values();
            let f = level.f_n.values();
            let g = level.g_n.values();
            let mut chain = 0.0_f64;
            let mut value_above = 0.0_f64;
            for (i, &pi) in nodes.iter().enumerate() {
                let lower = n * (pi - d.k).max(0.0);
                let payoff = g[i].max(0.0);
                let upper = n * (1.0 - d.k) * pi;
                chain = chain
                    .max(lower - payoff)
                    .max(payoff - v[i])
                    .max(v[i] - f[i])
                    .max(f[i] - upper);
                value_above = value_above.max(v[i] - f[i]);
            }

            let mut max_lv = f64::NEG_INFINITY;
            for i in 1..nodes.len() - 1 {
                if (nodes[i] - level.b_n).abs() < 2.0 * h {
                    continue;
                }
                let lv = d.diffusion(nodes[i]) * (v[i - 1] - 2.0 * v[i] + v[i + 1]) / h2 - r * v[i];
                max_lv = max_lv.max(lv);
            }

            let f_prev = if idx == 0 { GridFunction::zeros(grid) } else { res.levels[idx - 1].f_n.clone() };
            let lg = generator_of_payoff(&level.g_n, &f_prev, d, r);
            let lg_increase = lg.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);

            LevelDiagnostics {
                n: level.n,
                b_n: level.b_n,
                pi0_n: level.pi0_n,
                pi_star_n: level.pi_star_n,
                chain_violation: chain,
                value_above_continuation: value_above,
                min_second_difference_v: level.v_n.min_second_difference() / h2,
                min_second_difference_f: level.f_n.min_second_difference() / h2,
                smooth_fit_residual: level.smooth_fit_residual,
                below_single_right_boundary: level.b_n <= res.b1_closed_form + h,
                max_generator_of_value: max_lv,
                generator_of_payoff_increase: lg_increase,
            }
        })
        .collect();

    let boundaries_monotone_in_n = res.levels.windows(2).all(|w| w[1].b_n <= w[0].b_n);
    Diagnostics { levels, boundaries_monotone_in_n }
}
