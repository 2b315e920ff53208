//! Command-line front end: parameter sweeps to CSV, a reproducibility
//! manifest and an oracle-check report.

pub mod args;
pub mod spec;
pub mod sweep;
pub mod validate;

pub use args::{execute, run_from, Cli, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};
pub use spec::{Grid, Output, Settings, SweepSpec};
pub use sweep::{run_sweep, SweepReport};
pub use validate::{validate, Check, ValidationReport};
