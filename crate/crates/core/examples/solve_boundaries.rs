//! Solve the boundary recursion for several rights and print the thresholds.
//!
//! cargo run --example solve_boundaries -- 10 1.0

use stopgrid::{diagnostics, solve_sequence, ModelParams, PdeConfig, PiGrid};

fn main() -> stopgrid::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(10, |a| a.parse().expect("N"));
    let total: f64 = args.next().map_or(1.0, |a| a.parse().expect("total learning"));

    let p = ModelParams::with_total_learning(-1.0, 1.0, 4.0, 0.1, n, total)?;
    let res = solve_sequence(&p, PiGrid::new(2001)?, &PdeConfig::default())?;
    let diag = diagnostics(&res);

    println!("N = {n}, eps = {}, k = {}, closed-form b_1 = {:.9}", p.eps, res.derived.k, res.b1_closed_form);
    println!("{:>4} {:>12} {:>12} {:>12} {:>10}", "n", "b_n", "pi0_n", "a_n", "residual");
    for l in &res.levels {
        println!("{:>4} {:>12.8} {:>12.8} {:>12.6} {:>10.2e}", l.n, l.b_n, l.pi0_n, l.a_n, l.smooth_fit_residual);
    }
    println!("b_N <= ... <= b_1: {}", diag.boundaries_monotone_in_n);
    println!("V_{n}(0.3) = {:.6}", res.value_at(n, 0.3));
    Ok(())
}
