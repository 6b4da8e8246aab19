//! Write the data series of every figure into a directory (default ./figures).
//!
//! cargo run --release --example figure_data -- out/figures

use stopgrid::experiments::config::Numerics;
use stopgrid::experiments::figures::write_figure;
use stopgrid::experiments::presets::{figure, FIGURES};
use stopgrid::{PdeConfig, PiGrid};

fn main() -> stopgrid::Result<()> {
    let dir = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    let numerics = Numerics { grid: PiGrid::new(2001)?, pde: PdeConfig::default(), curve_stride: 10 };
    for n in FIGURES {
        let fig = figure(n)?;
        let files = write_figure(&fig, &numerics, &dir)?;
        println!("figure {n} ({}): {} files", fig.title, files.len());
    }
    println!("written to {}", dir.display());
    Ok(())
}
