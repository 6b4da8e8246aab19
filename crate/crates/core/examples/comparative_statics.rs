//! Boundaries as one parameter moves, via the sweep driver.

use stopgrid::experiments::config::Numerics;
use stopgrid::experiments::presets;
use stopgrid::experiments::sweep::{parse_values, run_sweep, Axis, SweepSpec};
use stopgrid::{PdeConfig, PiGrid};

fn main() -> stopgrid::Result<()> {
    let numerics = Numerics { grid: PiGrid::new(1001)?, pde: PdeConfig::default(), curve_stride: 10 };
    for (axis, values) in [(Axis::Sigma, "1,4,10"), (Axis::R, "0.01,0.1,0.5"), (Axis::EpsTotal, "0.5,1,5,10"), (Axis::N, "10,20,100")] {
        let spec = SweepSpec::new(presets::base(), axis, parse_values(axis, values)?, numerics)?;
        let report = run_sweep(spec)?;
        println!("{axis}:");
        for run in &report.runs {
            let levels = run.levels.as_ref().expect("solved");
            let (b1, bn) = (levels[0].1, levels[levels.len() - 1].1);
            println!("  {:<16} b_1 = {b1:.6}  b_N = {bn:.6}", run.run_id);
        }
        for c in &report.summaries {
            println!("  {}: {} ({})", c.check, if c.holds { "holds" } else { "violated" }, c.detail);
        }
    }
    Ok(())
}
