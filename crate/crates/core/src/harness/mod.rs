//! Experiment harness: configuration, single runs, convergence sweeps,
//! field export and a quick self-test.

pub mod config;
pub mod field;
pub mod report;
pub mod run;
pub mod selftest;

pub use config::{MethodKind, RunConfig};
pub use report::{RunReport, SweepRow};
pub use run::{convergence_sweep, reference_run, run, run_with_reference, RunOutput};
