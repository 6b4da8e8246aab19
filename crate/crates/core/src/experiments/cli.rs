//! The `stopgrid` command: `solve`, `verify`, `sweep` and `figures`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 bad input, 3 numerical failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::boundary::solve_sequence;
use crate::error::{Error, Result};
use crate::experiments::config::{resolved_config, Layers, MonteCarlo, Numerics};
use crate::experiments::figures::write_figure;
use crate::experiments::output::{boundary_table, curve_table, fmt_float, prepare, write_json, DerivedRecord};
use crate::experiments::presets::{figure, FIGURES};
use crate::experiments::sweep::{parse_values, run_sweep, Axis, SweepSpec};
use crate::experiments::verify::{read_boundaries, verify};
use crate::model::ModelParams;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable naming the default output directory.
pub const OUTDIR_ENV: &str = "STOPGRID_OUTDIR";

#[derive(Parser, Debug)]
#[command(name = "stopgrid", version, about = "Investment boundaries for multiple stopping with learning from the past")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the boundary recursion and write boundaries.csv, curves.csv and a manifest.
    #[command(allow_negative_numbers = true)]
    Solve {
        #[command(flatten)]
        common: Common,
        /// Label written in the run_id column.
        #[arg(long, default_value = "solve")]
        run_id: String,
    },
    /// Check solver invariants and compare against Monte Carlo simulation.
    #[command(allow_negative_numbers = true)]
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: McArgs,
        /// Boundaries to simulate instead of the solver's (CSV with n and b_n columns).
        #[arg(long)]
        boundaries: Option<PathBuf>,
    },
    /// Solve once per value of one parameter.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[command(flatten)]
        common: Common,
        /// sigma, r, eps_total, N or mu_pair.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated values; drift pairs as mu0:mu1, e.g. "-5:1,-1:1".
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
    },
    /// Write the data series of the published figures.
    #[command(allow_negative_numbers = true)]
    Figures {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8), conflicts_with = "all", required_unless_present = "all")]
        figure: Option<u8>,
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        numerics: NumericArgs,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, visible_alias = "outdir")]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Flat key = value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mu0: Option<f64>,
    #[arg(long)]
    mu1: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    /// Number of investment rights.
    #[arg(long = "N", short = 'N')]
    n_rights: Option<usize>,
    /// Information time gained per investment.
    #[arg(long, conflicts_with = "total_learning")]
    eps: Option<f64>,
    /// N * eps.
    #[arg(long)]
    total_learning: Option<f64>,
    #[command(flatten)]
    numerics: NumericArgs,
    /// Output directory (default: $STOPGRID_OUTDIR, else the current directory).
    #[arg(long, visible_alias = "outdir")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct NumericArgs {
    /// Number of belief grid nodes.
    #[arg(long)]
    grid: Option<usize>,
    /// PDE time step (default eps / 64).
    #[arg(long)]
    dt_target: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    smoothing_steps: Option<usize>,
    /// Write every k-th grid node to curve files.
    #[arg(long)]
    curve_stride: Option<usize>,
}

#[derive(Args, Debug)]
struct McArgs {
    #[arg(long)]
    paths: Option<usize>,
    /// Euler step.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    start_pi: Option<f64>,
    /// Paths per run of the policy-dominance comparison.
    #[arg(long)]
    dominance_paths: Option<usize>,
}

impl NumericArgs {
    fn apply(&self, l: &mut Layers) {
        l.set_opt("grid", self.grid);
        l.set_opt("dt-target", self.dt_target);
        l.set_opt("theta", self.theta);
        l.set_opt("smoothing-steps", self.smoothing_steps);
        l.set_opt("curve-stride", self.curve_stride);
    }
}

impl Common {
    fn flags(&self) -> Layers {
        let mut l = Layers::default();
        l.set_opt("mu0", self.mu0);
        l.set_opt("mu1", self.mu1);
        l.set_opt("sigma", self.sigma);
        l.set_opt("r", self.r);
        l.set_opt("N", self.n_rights);
        l.set_opt("eps", self.eps);
        l.set_opt("total-learning", self.total_learning);
        self.numerics.apply(&mut l);
        l.set_opt("out", self.out.as_ref().map(|p| p.display()));
        l
    }
}

impl McArgs {
    fn apply(&self, l: &mut Layers) {
        l.set_opt("paths", self.paths);
        l.set_opt("dt", self.dt);
        l.set_opt("t-max", self.t_max);
        l.set_opt("seed", self.seed);
        l.set_opt("start-pi", self.start_pi);
        l.set_opt("dominance-paths", self.dominance_paths);
    }
}

/// defaults, then the config file, then `flags`.
fn resolve(config: Option<&Path>, flags: &Layers) -> Result<Layers> {
    let mut l = Layers::defaults();
    if let Some(path) = config {
        l = l.overlay(&Layers::read(path)?)?;
    }
    l.overlay(flags)
}

fn out_dir(l: &Layers) -> PathBuf {
    l.raw("out")
        .map(PathBuf::from)
        .or_else(|| std::env::var_os(OUTDIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

#[derive(Serialize)]
struct SolveManifest<'a> {
    command: &'static str,
    run_id: &'a str,
    params: &'a ModelParams,
    derived: DerivedRecord,
    numerics: &'a Numerics,
    files: [&'static str; 3],
}

fn solve_cmd(common: &Common, run_id: &str) -> Result<i32> {
    let l = resolve(common.config.as_deref(), &common.flags())?;
    let (p, num) = (l.model()?, l.numerics()?);
    let res = solve_sequence(&p, num.grid, &num.pde)?;
    let dir = out_dir(&l);
    boundary_table(run_id, &res).write(&prepare(&dir, "boundaries.csv")?)?;
    curve_table(&res, num.curve_stride).write(&dir.join("curves.csv"))?;
    std::fs::write(dir.join("resolved.conf"), resolved_config(&p, &num, None))?;
    let manifest = SolveManifest {
        command: "solve",
        run_id,
        params: &p,
        derived: DerivedRecord::new(&p, &res.derived, res.b1_closed_form),
        numerics: &num,
        files: ["boundaries.csv", "curves.csv", "resolved.conf"],
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    println!("b_1 closed form {}", fmt_float(res.b1_closed_form));
    for lvl in &res.levels {
        println!("b_{} = {}", lvl.n, fmt_float(lvl.b_n));
    }
    println!("wrote {}", dir.display());
    Ok(EXIT_OK)
}

fn verify_cmd(common: &Common, mc: &McArgs, boundaries: Option<&Path>) -> Result<i32> {
    let mut flags = common.flags();
    mc.apply(&mut flags);
    flags.set_opt("boundaries", boundaries.map(|p| p.display()));
    let l = resolve(common.config.as_deref(), &flags)?;
    let (p, num) = (l.model()?, l.numerics()?);
    let m: MonteCarlo = l.monte_carlo(p.r)?;
    let supplied = match l.raw("boundaries") {
        Some(path) => Some(read_boundaries(Path::new(path), p.n_rights)?),
        None => None,
    };
    let report = verify(&p, &num, &m, l.require("dominance-paths")?, supplied)?;
    let dir = out_dir(&l);
    let text = report.text();
    std::fs::write(prepare(&dir, "verify_report.txt")?, &text)?;
    write_json(&dir.join("verify_report.json"), &report)?;
    std::fs::write(dir.join("resolved.conf"), resolved_config(&p, &num, Some(&m)))?;
    print!("{text}");
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

#[derive(Serialize)]
struct SweepManifest<'a> {
    command: &'static str,
    axis: Axis,
    values: &'a [crate::experiments::sweep::AxisValue],
    base: &'a ModelParams,
    numerics: &'a Numerics,
    failed_runs: usize,
    summaries: &'a [crate::experiments::sweep::SummaryCheck],
}

fn sweep_cmd(common: &Common, axis: Option<&str>, values: Option<&str>) -> Result<i32> {
    let mut flags = common.flags();
    flags.set_opt("axis", axis);
    flags.set_opt("values", values);
    let l = resolve(common.config.as_deref(), &flags)?;
    let axis: Axis = l.require::<String>("axis")?.parse()?;
    let values = parse_values(axis, &l.require::<String>("values")?)?;
    let spec = SweepSpec::new(l.model()?, axis, values, l.numerics()?)?;
    let report = run_sweep(spec)?;
    let dir = out_dir(&l);
    report.table().write(&prepare(&dir, "sweep.csv")?)?;
    report.summary_table().write(&dir.join("sweep_summary.csv"))?;
    write_json(
        &dir.join("sweep_manifest.json"),
        &SweepManifest {
            command: "sweep",
            axis,
            values: &report.spec.values,
            base: &report.spec.base,
            numerics: &report.spec.numerics,
            failed_runs: report.failed_runs(),
            summaries: &report.summaries,
        },
    )?;
    for run in &report.runs {
        if let Err(msg) = &run.levels {
            eprintln!("run {} failed: {msg}", run.run_id);
        }
    }
    for s in &report.summaries {
        println!("{} {}: {}", if s.holds { "PASS" } else { "FAIL" }, s.check, s.detail);
    }
    println!("wrote {}", dir.display());
    Ok(if report.all_ok() { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn figures_cmd(which: Option<u8>, numerics: &NumericArgs, config: Option<&Path>, out: Option<&Path>) -> Result<i32> {
    let mut flags = Layers::default();
    numerics.apply(&mut flags);
    flags.set_opt("out", out.map(|p| p.display()));
    let l = resolve(config, &flags)?;
    let num = l.numerics()?;
    let dir = out_dir(&l);
    let list: Vec<u8> = match which {
        Some(f) => vec![f],
        None => FIGURES.collect(),
    };
    for f in list {
        for path in write_figure(&figure(f)?, &num, &dir)? {
            println!("{}", path.display());
        }
    }
    Ok(EXIT_OK)
}

/// Exit code for a failed command.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical_failure() {
        EXIT_NUMERICAL
    } else {
        EXIT_BAD_INPUT
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match &cli.command {
        Command::Solve { common, run_id } => solve_cmd(common, run_id),
        Command::Verify { common, mc, boundaries } => verify_cmd(common, mc, boundaries.as_deref()),
        Command::Sweep { common, axis, values } => sweep_cmd(common, axis.as_deref(), values.as_deref()),
        Command::Figures { figure, all: _, numerics, config, out } => {
            figures_cmd(*figure, numerics, config.as_deref(), out.as_deref())
        }
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
