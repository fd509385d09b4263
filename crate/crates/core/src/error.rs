use thiserror::Error;

use crate::search::SynthesisReport;

/// Errors produced across the synthesis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Dimension mismatch or a matrix beyond the supported size.
    #[error("size error: {0}")]
    Size(String),

    /// Wrong number of parameters supplied to a gate or circuit.
    #[error("arity error: {0}")]
    Arity(String),

    /// Input fails a structural invariant (non-unitary, non-Hermitian,
    /// disconnected topology, out-of-tolerance circuit, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// An impossible or out-of-range configuration value.
    #[error("configuration error: {0}")]
    Config(String),

    /// Benchmark name that does not resolve to a registered generator.
    #[error("unknown benchmark '{0}'")]
    UnknownBenchmark(String),

    /// Malformed input text (JSON, QASM, gate-set string, ...).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// The search exhausted its depth budget without reaching epsilon.
    /// Carries the best circuit found so callers can still emit it.
    #[error("depth limit reached without solution (best distance {best:.3e})")]
    DepthLimit {
        best: f64,
        report: Box<SynthesisReport>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
