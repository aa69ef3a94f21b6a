//! Config-driven experiment runner for `shiftwave-core`: TOML configs, study
//! drivers, the Godunov comparison and CSV / JSON output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod config;
pub mod output;
pub mod study;

pub use config::{Experiment, ExperimentConfig, StudyKind};
pub use study::{Check, StudyOutcome, Table};
