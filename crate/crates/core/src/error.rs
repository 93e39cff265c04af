use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, BclError>;

#[derive(Debug, Error)]
pub enum BclError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("edge endpoint {node} out of range for graph with {num_nodes} nodes")]
    DanglingEndpoint { node: usize, num_nodes: usize },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: String,
        expected: String,
        actual: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Divergence { epoch: usize, loss: f64 },

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("seed {seed}, stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        seed: u64,
        #[source]
        source: Box<BclError>,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl BclError {
    pub fn dims(context: impl Into<String>, expected: impl ToString, actual: impl ToString) -> Self {
        BclError::DimensionMismatch {
            context: context.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BclError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_stage(self, stage: &'static str, seed: u64) -> Self {
        BclError::Stage {
            stage,
            seed,
            source: Box::new(self),
        }
    }
}
