//! Experiment driver for `phunmix`: seeded Monte-Carlo sweeps of the phase
//! unmixing solvers and STFT-domain separation runs, with CSV and JSON
//! reports.

pub mod config;
pub mod error;
pub mod separation;
pub mod sweep;

pub use config::{SweepConfig, DEFAULT_TRIALS};
pub use error::{BenchError, Result};
pub use separation::{run_separation, SeparationReport, SeparationRun, SeparationScore, SourceSet};
pub use sweep::{
    loglog_slope, median, read_csv, run_sweep, summarize, trial_instance, trial_seed, write_csv, ReportRow,
    Summary, CSV_HEADER,
};
