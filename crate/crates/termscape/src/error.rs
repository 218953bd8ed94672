use std::path::PathBuf;

use termscape_core::cluster::ClusterError;
use termscape_core::corpus::CorpusError;
use termscape_core::evaluate::EvalError;
use termscape_core::geometry::GeometryError;
use termscape_core::reduce::ReduceError;
use termscape_core::session::SessionError;
use termscape_core::synth::SynthError;
use termscape_core::vecstore::VecStoreError;
use thiserror::Error;

use crate::formats::FormatError;

/// Everything a pipeline step can fail with. IO problems map to exit code 2,
/// everything else is a contract violation (exit code 1).
#[derive(Debug, Error)]
pub enum WorkbenchError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    VecStore(#[from] VecStoreError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{0}")]
    Invalid(String),
}

impl WorkbenchError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, source: FormatError) -> Self {
        Self::Format { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = WorkbenchError> = std::result::Result<T, E>;
