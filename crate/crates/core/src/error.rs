use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("singular matrix: no pivot above {tolerance:e} in column {column}")]
    SingularMatrix { column: usize, tolerance: f64 },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("matrix is not row-stochastic: {reason}")]
    NotStochastic { reason: String },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("node {node} out of range 1..={n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error(
        "integration produced a non-finite state at t = {time} (step too large for the flow?)"
    )]
    IntegrationNonFinite { time: f64 },
    #[error("equilibrium equation `{equation}` is inconsistent (residual {residual:e})")]
    Inconsistent {
        equation: &'static str,
        residual: f64,
    },
    #[error(
        "equilibrium report is for a {report} flow but the trajectory comes from a {flow} flow"
    )]
    KindMismatch {
        flow: &'static str,
        report: &'static str,
    },
    #[error("unknown block `{0}`")]
    UnknownBlock(String),
}
