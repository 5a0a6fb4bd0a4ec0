//! Command-line harness for the shortage-absence estimators: configuration,
//! sample ingestion, mode dispatch, reproduction of the published benchmark
//! table, and CSV / JSON output.
//!
//! Exit status: 0 on success, 2 on usage or input errors (including samples
//! too small to draw from), 3 on numeric failure.

pub mod config;
pub mod error;
pub mod ingest;
pub mod output;
pub mod run;
pub mod table1;

pub use config::{Cli, ExperimentConfig, Format, Mode};
pub use error::{CliError, CliResult};
pub use ingest::{ingest_sample, parse_sample};
pub use run::{execute, main_with_args, run_mode, RunOutput};
pub use table1::{run_table1, Table1Options, Table1Row};
