//! File formats, loss-file ingestion and the `fricshare` command line on
//! top of [`fricshare_core`].

pub mod cli;
pub mod error;
pub mod ingest;
pub mod io;
pub mod output;

pub use error::{CliError, CliResult};
