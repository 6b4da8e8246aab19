//! Optimal multiple investment under incomplete information with learning from the past.
//!
//! An investor holds `N` rights to invest in a project whose drift is either
//! negative or positive and is only observed through noise. Each investment
//! reveals an extra `eps` of observation time instantly. The optimal policy is a
//! sequence of belief thresholds `b_N, ..., b_1`: with `n` rights left, invest as
//! soon as the posterior probability of the good drift reaches `b_n`.
//!
//! - [`model`]: parameters, the r-harmonic function `G` and the closed-form single-right solution.
//! - [`pde`]: expectations over the belief diffusion by finite differences.
//! - [`boundary`]: the backward recursion producing `b_n` and the value functions.
//! - [`monte_carlo`]: belief-path simulation used as an independent oracle.
//! - [`experiments`]: presets, sweeps, CSV/JSON output and the `stopgrid` command driver.
//!
//! ```
//! use stopgrid::{solve_sequence, ModelParams, PdeConfig, PiGrid};
//!
//! let params = ModelParams::with_total_learning(-1.0, 1.0, 4.0, 0.1, 3, 0.3).unwrap();
//! let res = solve_sequence(&params, PiGrid::new(501).unwrap(), &PdeConfig::default()).unwrap();
//! assert!((res.level(1).b_n - res.b1_closed_form).abs() < 1e-6);
//! assert!(res.boundaries().iter().all(|&b| b > 0.5 && b <= res.b1_closed_form + 1e-3));
//! ```

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod model;
pub mod monte_carlo;
pub mod pde;
pub mod tridiag;

pub use boundary::{diagnostics, solve_sequence, Diagnostics, LevelResult, SolveResult};
pub use error::{Error, Result};
pub use grid::{GridFunction, PiGrid};
pub use model::{derive_params, DerivedParams, ModelParams};
pub use monte_carlo::{Estimate, McConfig};
pub use pde::PdeConfig;
