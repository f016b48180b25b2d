//! Command-line front end for kmboot.

pub mod app;
pub mod error;
pub mod ingest;
pub mod scenario;

pub use app::{execute, Cli, Command, Envelope};
pub use error::{CliError, CliResult};
