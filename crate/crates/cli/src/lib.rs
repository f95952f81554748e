//! Configuration-driven runs of the three-wave-mixing propagator: single
//! simulations, error sweeps and self-phase-modulation scans.

pub mod build;
pub mod config;
pub mod diag;
pub mod plot;
pub mod run;

pub use config::{load, LoadedConfig, ScenarioConfig};
pub use diag::{HarnessError, HarnessResult};
pub use run::{evaluate, simulate, spm_scan, sweep, RunOptions};
