//! Check solved boundaries against simulated strategies.
//!
//! Prints the single-right value against its simulation, then the value of the
//! full N-right policy against V_N together with a few perturbed policies
//! compared on common random numbers.
//!
//! cargo run --release --example monte_carlo_check -- 20000

use stopgrid::model::{single_right_boundary, single_right_value};
use stopgrid::monte_carlo::{estimate_single_stops, paired_difference, simulate_full_strategy};
use stopgrid::{derive_params, solve_sequence, McConfig, ModelParams, PdeConfig, PiGrid};

fn main() -> stopgrid::Result<()> {
    let paths: usize = std::env::args().nth(1).map_or(20_000, |a| a.parse().expect("path count"));
    let start = 0.3;

    let p = ModelParams::with_total_learning(-1.0, 1.0, 4.0, 0.1, 5, 1.0)?;
    let d = derive_params(&p)?;
    let cfg = McConfig::new(paths, 1, p.r);

    let b1 = single_right_boundary(&d);
    let est = estimate_single_stops(start, &[b1 - 0.05, b1, b1 + 0.05], |x| x - d.k, &p, &cfg)?;
    println!("V_1({start}) = {:.6}", single_right_value(start, &d)?);
    for (t, e) in [b1 - 0.05, b1, b1 + 0.05].iter().zip(&est) {
        println!("  stop at {t:.4}: {:.6} +- {:.1e}", e.mean, e.std_error);
    }

    let res = solve_sequence(&p, PiGrid::new(2001)?, &PdeConfig::default())?;
    let b = res.boundaries();
    let base = simulate_full_strategy(start, &b, &p, &cfg)?;
    println!("V_5({start}) = {:.6}, simulated {:.6} +- {:.1e}", res.value_at(5, start), base.estimate.mean, base.estimate.std_error);
    for (n, shift) in [(1, 0.05), (3, -0.05), (5, 0.05)] {
        let mut alt = b.clone();
        alt[n - 1] += shift;
        let other = simulate_full_strategy(start, &alt, &p, &cfg)?;
        let gain = paired_difference(&base.totals, &other.totals);
        println!("  b_{n} {shift:+}: gain {:+.2e} ({:+.1} SE)", gain.mean, gain.mean / gain.std_error);
    }
    Ok(())
}
