//! Command-line driver for the damped Jaynes–Cummings simulator: run
//! configuration, time series for several methods, convergence studies and
//! CSV/JSON export.

pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod run;
pub mod study;

pub use config::{ConfigFile, InitialConfig, Method, OutputFormat, Overrides, RunConfig, SplitStep};
pub use error::{CliError, CliResult};
pub use plot::emit_plotscript;
pub use run::{run, ObservableRow, RunOutput};
pub use study::{convergence_study, Slope, StudyTable};
