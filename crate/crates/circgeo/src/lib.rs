//! Command-line front end for the circulant-metric toolkit.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{cmd_eval, cmd_scan, cmd_verify, EvalTarget};
pub use config::{Format, GradModeSpec, GridSpec, RunConfig, StencilSpec, Tolerances};
pub use error::CliError;
pub use report::{Record, Status, Summary, VerificationReport};
