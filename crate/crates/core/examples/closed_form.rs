//! Single-right solution in closed form: derived constants, threshold and value.
//!
//! cargo run --example closed_form -- -1 1 4 0.1

use stopgrid::model::{harmonic, single_right_boundary, single_right_value};
use stopgrid::{derive_params, ModelParams};

fn main() -> stopgrid::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let [mu0, mu1, sigma, r] = match args.as_slice() {
        [a, b, c, d] => [*a, *b, *c, *d],
        _ => [-1.0, 1.0, 4.0, 0.1],
    };
    let p = ModelParams::new(mu0, mu1, sigma, r, 1, 0.0)?;
    let d = derive_params(&p)?;
    let b1 = single_right_boundary(&d);
    println!("k = {:.6}  rho = {:.6}  gamma = {:.6}", d.k, d.rho, d.gamma);
    println!("b_1 = {b1:.9}");
    println!("{:>6} {:>12} {:>12} {:>14}", "pi", "V_1", "(pi-k)+", "E[e^-r tau_b]");
    for i in 1..10 {
        let x = i as f64 / 10.0;
        let hit = if x < b1 { harmonic(x, d.gamma)? / harmonic(b1, d.gamma)? } else { 1.0 };
        println!("{x:>6.2} {:>12.6} {:>12.6} {hit:>14.6}", single_right_value(x, &d)?, (x - d.k).max(0.0));
    }
    Ok(())
}
