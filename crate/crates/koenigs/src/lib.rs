//! Command line, CSV figure data and consistency suites on top of
//! [`koenigs_core`].

pub mod check;
pub mod cli;
pub mod error;
pub mod eval;
pub mod figures;
pub mod params;
pub mod sim;
pub mod table;

pub use error::{exit, CliError, CliResult};
