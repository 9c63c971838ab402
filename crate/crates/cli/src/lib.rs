//! Command-line pipeline around `tabx-core`: staged runs, diagnosis
//! reports, comparison tables and plots, all written to a checksummed run
//! directory.

pub mod compare;
pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod plot;
pub mod report;
pub mod rundir;
pub mod stages;

pub use config::RunConfig;
pub use error::CliError;
pub use pipeline::run_pipeline;
