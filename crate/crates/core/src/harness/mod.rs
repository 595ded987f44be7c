//! Fragment server, benchmark runner and report rendering.

mod analogs;
mod bench;
mod report;
mod server;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub use analogs::{query_analogs, QueryAnalog};
pub use bench::{run_bench, BenchConfig, CriterionKind, FragmentDir, QuerySource};
pub use report::{report, BenchReport, BenchRow, ReportFormat};
pub use server::{serve, DocumentServer, ServeOptions};

use crate::fragmenter::FragmentError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot listen on port {port}: {message}")]
    Bind { port: u16, message: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Fragment(#[from] FragmentError),
    #[error("malformed report: {0}")]
    Report(String),
}
