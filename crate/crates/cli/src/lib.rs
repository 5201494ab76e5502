//! Command-line runner: experiment configs, presets, sweeps and output files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod run;

pub use config::{preset, Diagnostics, ExperimentConfig, ExperimentKind, PRESETS};
pub use run::{run, RunManifest};
