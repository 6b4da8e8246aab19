use proptest::prelude::*;
use stopgrid::model::{single_right_boundary, single_right_value};
use stopgrid::monte_carlo::{
    estimate_f, estimate_single_stop, paired_difference, simulate_full_strategy, strategy_outcomes,
};
use stopgrid::{derive_params, solve_sequence, McConfig, ModelParams, PdeConfig, PiGrid};

fn fig3(n: usize) -> ModelParams {
    ModelParams::with_total_learning(-1.0, 1.0, 4.0, 0.1, n, n as f64 / 10.0).unwrap()
}

#[test]
fn belief_is_a_martingale() {
    let p = fig3(1);
    let d = derive_params(&p).unwrap();
    let grid = PiGrid::new(1001).unwrap();
    let cfg = McConfig::new(20_000, 7, p.r);
    for x in [0.1, 0.5, 0.9] {
        let e = estimate_f(x, &grid.sample(|y| y), 0.5, &d, &cfg).unwrap();
        assert!((e.mean - x).abs() <= 4.0 * e.std_error, "{x}: {} +- {}", e.mean, e.std_error);
    }
}

#[test]
fn same_seed_same_numbers() {
    let p = fig3(3);
    let b = solve_sequence(&p, PiGrid::new(801).unwrap(), &PdeConfig::default()).unwrap().boundaries();
    let cfg = McConfig::new(2_000, 11, p.r);
    let (a, c) = (simulate_full_strategy(0.5, &b, &p, &cfg).unwrap(), simulate_full_strategy(0.5, &b, &p, &cfg).unwrap());
    assert_eq!(a.totals, c.totals);
    let other = simulate_full_strategy(0.5, &b, &p, &McConfig { seed: 12, ..cfg }).unwrap();
    assert_ne!(a.totals, other.totals);
    let d = derive_params(&p).unwrap();
    let s1 = estimate_single_stop(0.4, 0.7, |x| x - d.k, &p, &cfg).unwrap();
    let s2 = estimate_single_stop(0.4, 0.7, |x| x - d.k, &p, &cfg).unwrap();
    assert_eq!(s1, s2);
}

#[test]
fn starting_above_threshold_stops_at_once() {
    let p = fig3(1);
    let e = estimate_single_stop(0.8, 0.7, |x| x - 0.5, &p, &McConfig::new(100, 1, p.r)).unwrap();
    assert_eq!((e.mean, e.std_error), (0.8 - 0.5, 0.0));
}

#[test]
fn exercises_follow_the_policy() {
    let p = fig3(4);
    let b = solve_sequence(&p, PiGrid::new(801).unwrap(), &PdeConfig::default()).unwrap().boundaries();
    for o in strategy_outcomes(0.3, &b, &p, &McConfig::new(500, 3, p.r)).unwrap() {
        let mut last = 0.0;
        for (j, ex) in o.exercises.iter().enumerate() {
            assert_eq!(ex.rights_before, p.n_rights - j);
            assert!(ex.physical_time >= last);
            assert!(ex.information_time >= ex.physical_time);
            assert!((0.0..=1.0).contains(&ex.belief));
            last = ex.physical_time;
        }
    }
}

/// A coarse policy search over the first-investment threshold with two rights:
/// no alternative beats the solved `b_2` by more than the paired noise.
#[test]
fn solved_second_boundary_is_not_beaten() {
    let p = fig3(2);
    let b = solve_sequence(&p, PiGrid::new(2001).unwrap(), &PdeConfig::default()).unwrap().boundaries();
    let cfg = McConfig::new(10_000, 5, p.r);
    let base = simulate_full_strategy(0.5, &b, &p, &cfg).unwrap();
    for shift in [-0.1, -0.05, 0.05, 0.1] {
        let alt = simulate_full_strategy(0.5, &[b[0], b[1] + shift], &p, &cfg).unwrap();
        let gain = paired_difference(&base.totals, &alt.totals);
        assert!(gain.mean <= 3.0 * gain.std_error, "b_2 {shift:+}: gain {} SE {}", gain.mean, gain.std_error);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn totals_are_bounded(
        mu0 in -3.0..-0.3f64, mu1 in 0.3..3.0f64, n in 1..5usize, total in 0.0..2.0f64,
        x in 0.05..0.95f64, seed in any::<u64>(),
    ) {
        let p = ModelParams::with_total_learning(mu0, mu1, 4.0, 0.2, n, total).unwrap();
        let d = derive_params(&p).unwrap();
        let b = vec![single_right_boundary(&d); n];
        let cfg = McConfig::new(300, seed, p.r);
        let cap = n as f64 * d.k.max(1.0 - d.k);
        for t in simulate_full_strategy(x, &b, &p, &cfg).unwrap().totals {
            prop_assert!(t.abs() <= cap + 1e-12);
        }
    }

    #[test]
    fn single_stop_estimate_within_payoff_range(x in 0.05..0.6f64, seed in any::<u64>()) {
        let p = fig3(1);
        let d = derive_params(&p).unwrap();
        let b1 = single_right_boundary(&d);
        let e = estimate_single_stop(x, b1, |y| y - d.k, &p, &McConfig::new(500, seed, p.r)).unwrap();
        prop_assert!(e.mean >= 0.0 && e.mean <= 1.0 - d.k);
        prop_assert!(e.mean <= single_right_value(x, &d).unwrap() + 5.0 * e.std_error + 1e-3);
    }
}
