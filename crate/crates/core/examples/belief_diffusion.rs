//! Propagate a payoff through eps units of information time, by PDE and by simulation.

use stopgrid::monte_carlo::estimate_f;
use stopgrid::pde::{diffuse_expectation, second_moment_check};
use stopgrid::{derive_params, McConfig, ModelParams, PdeConfig, PiGrid};

fn main() -> stopgrid::Result<()> {
    let p = ModelParams::new(-1.0, 1.0, 4.0, 0.1, 1, 0.5)?;
    let d = derive_params(&p)?;
    let grid = PiGrid::new(2001)?;
    let payoff = grid.sample(|x| (x - d.k).max(0.0));
    let pde = diffuse_expectation(&payoff, p.eps, &d, &PdeConfig::default(), 0.0, 1.0 - d.k)?;

    let cfg = McConfig::new(20_000, 1, p.r);
    println!("E_pi[(Pi_eps - k)+] with eps = {}", p.eps);
    println!("{:>5} {:>10} {:>10} {:>9}", "pi", "PDE", "MC", "SE");
    for x in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let mc = estimate_f(x, &payoff, p.eps, &d, &cfg)?;
        println!("{x:>5.1} {:>10.6} {:>10.6} {:>9.1e}", pde.interpolate(x), mc.mean, mc.std_error);
    }

    let x = 0.5;
    let var = second_moment_check(x, 0.01, &d, grid, &PdeConfig::default())?;
    println!("Var(Pi_0.01 | pi = {x}) = {var:.3e}, leading order {:.3e}", d.rho.powi(2) * (x * (1.0 - x)).powi(2) * 0.01);
    Ok(())
}
