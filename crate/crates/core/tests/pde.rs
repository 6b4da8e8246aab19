use proptest::prelude::*;
use stopgrid::pde::{diffuse_expectation, second_moment_check};
use stopgrid::{derive_params, DerivedParams, GridFunction, ModelParams, PdeConfig, PiGrid};

fn fig3() -> DerivedParams {
    derive_params(&ModelParams::new(-1.0, 1.0, 4.0, 0.1, 10, 0.1).unwrap()).unwrap()
}

fn diffuse(v: &GridFunction, eps: f64, cfg: &PdeConfig) -> GridFunction {
    let x = v.values();
    diffuse_expectation(v, eps, &fig3(), cfg, x[0], x[x.len() - 1]).unwrap()
}

fn implicit() -> PdeConfig {
    PdeConfig { theta: 1.0, ..PdeConfig::default() }
}

/// Piecewise-linear nodal data from a handful of knots.
fn knots() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 6)
}

fn sample(grid: PiGrid, k: &[f64]) -> GridFunction {
    let segs = (k.len() - 1) as f64;
    grid.sample(|x| {
        let s = (x * segs).min(segs - 1e-12);
        let i = s.floor() as usize;
        k[i] + (s - i as f64) * (k[i + 1] - k[i])
    })
}

#[test]
fn martingale_identity_is_preserved() {
    let grid = PiGrid::new(801).unwrap();
    let out = diffuse(&grid.sample(|x| x), 0.3, &PdeConfig::default());
    for (x, y) in grid.nodes().zip(out.values()) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn conditional_variance_matches_leading_order() {
    let d = fig3();
    let grid = PiGrid::new(2001).unwrap();
    for pi in [0.2, 0.5, 0.8] {
        let eps = 1e-3;
        let var = second_moment_check(pi, eps, &d, grid, &PdeConfig::default()).unwrap();
        let leading = d.rho * d.rho * pi * pi * (1.0 - pi) * (1.0 - pi) * eps;
        assert!((var / leading - 1.0).abs() < 2e-2, "{pi}: {var} vs {leading}");
    }
}

#[test]
fn zero_horizon_is_identity() {
    let grid = PiGrid::new(101).unwrap();
    let v = grid.sample(|x| (x - 0.4).max(0.0));
    assert_eq!(diffuse(&v, 0.0, &PdeConfig::default()), v);
}

#[test]
fn inconsistent_endpoints_rejected() {
    let grid = PiGrid::new(101).unwrap();
    let v = grid.sample(|x| x);
    assert!(diffuse_expectation(&v, 0.1, &fig3(), &PdeConfig::default(), 0.0, 2.0).is_err());
}

/// Successive differences at pi = 0.5 shrink by about 4 when the grid is halved.
#[test]
fn second_order_in_space() {
    let cfg = PdeConfig { theta: 0.5, dt_target: Some(0.1 / 256.0), smoothing_steps: 0 };
    let at_half = |m: usize| {
        let grid = PiGrid::new(m).unwrap();
        diffuse(&grid.sample(|x| x.powi(3) + (3.0 * x).sin()), 0.1, &cfg).interpolate(0.5)
    };
    let (u1, u2, u3) = (at_half(101), at_half(201), at_half(401));
    let ratio = (u1 - u2) / (u2 - u3);
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn comparison_principle(a in knots(), bump in knots(), eps in 0.01..0.5f64) {
        let grid = PiGrid::new(201).unwrap();
        let lo = sample(grid, &a);
        let hi = lo.map(|x, v| v + sample(grid, &bump).interpolate(x).abs());
        let (dl, dh) = (diffuse(&lo, eps, &implicit()), diffuse(&hi, eps, &implicit()));
        for (l, h) in dl.values().iter().zip(dh.values()) {
            prop_assert!(l <= &(h + 1e-12));
        }
    }

    #[test]
    fn linear_in_data(a in knots(), b in knots(), s in -3.0..3.0f64, eps in 0.01..0.5f64) {
        let grid = PiGrid::new(201).unwrap();
        let (u, w) = (sample(grid, &a), sample(grid, &b));
        let combo = u.map(|x, v| v + s * w.interpolate(x));
        let cfg = PdeConfig::default();
        let lhs = diffuse(&combo, eps, &cfg);
        let (du, dw) = (diffuse(&u, eps, &cfg), diffuse(&w, eps, &cfg));
        let rhs = du.map(|x, v| v + s * dw.interpolate(x));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
    }

    #[test]
    fn convexity_preserved(c in 0.05..0.95f64, slope in 0.1..3.0f64, q in 0.0..2.0f64, eps in 0.01..0.5f64) {
        let grid = PiGrid::new(401).unwrap();
        let v = grid.sample(|x| slope * (x - c).max(0.0) + q * x * x);
        let out = diffuse(&v, eps, &PdeConfig::default());
        prop_assert!(out.min_second_difference() >= -1e-10, "{}", out.min_second_difference());
    }

    #[test]
    fn bounds_propagate(a in knots(), eps in 0.01..0.5f64) {
        let grid = PiGrid::new(201).unwrap();
        let v = sample(grid, &a);
        let (lo, hi) = v.values().iter().fold((f64::MAX, f64::MIN), |(l, h), &x| (l.min(x), h.max(x)));
        let out = diffuse(&v, eps, &implicit());
        for &y in out.values() {
            prop_assert!(y >= lo - 1e-12 && y <= hi + 1e-12);
        }
    }
}
