//! Experiment harness behind the `tvsr` command-line tool.

pub mod certify;
pub mod error;
pub mod experiments;
pub mod pgm;

pub use error::CliError;
