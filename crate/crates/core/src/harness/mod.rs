//! Configuration, end-to-end pipelines, artifacts and benchmarks.

mod bench;
mod config;
mod io;
mod pipeline;

pub use bench::{benchmark_domain, run_benchmark, BenchReport, ParallelTiming};
pub use config::{
    AnalysisConfig, AutoKeyword, OracleConfig, PulseConfig, RunConfig, TimeStep, WindowKind,
};
pub use io::{resample, write_json, write_wav, write_with, LISTENING_RATE};
pub use pipeline::*;

use std::path::PathBuf;

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::geometry::GeometryError;
use crate::oracle::OracleError;
use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Wav { path: PathBuf, message: String },
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("solver: {0}")]
    Solver(#[from] SolverError),
    #[error("analysis: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
}

impl HarnessError {
    /// 1 for invalid input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io { .. } | HarnessError::Wav { .. } => 2,
            HarnessError::Geometry(GeometryError::Io { .. }) => 2,
            HarnessError::Solver(SolverError::Divergence { .. }) => 2,
            _ => 1,
        }
    }
}
