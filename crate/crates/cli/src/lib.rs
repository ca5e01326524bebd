//! Command-line front end for the ring solvers: configuration parsing, runs,
//! sweeps and CSV/JSON output.

pub mod config;
pub mod error;
pub mod io;
pub mod run;

pub use config::{Mode, RawConfig, RunConfig, SweepSolver};
pub use error::{CliError, Result};
pub use io::{Manifest, Table};
pub use run::{resolve_output_dir, run, sweep, RunReport, RunStatus, SweepReport, OUTPUT_ENV};
