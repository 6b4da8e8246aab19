//! Presets, sweeps, verification and file output behind the `stopgrid` command.

pub mod cli;
pub mod config;
pub mod figures;
pub mod output;
pub mod presets;
pub mod sweep;
pub mod verify;
