use crate::graph::MatrixId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("duplicate insert of {matrix:?}({x},{y})")]
    DuplicateInsert { matrix: MatrixId, x: u32, y: u32 },
    #[error("delete of missing edge {matrix:?}({x},{y})")]
    MissingDelete { matrix: MatrixId, x: u32, y: u32 },
    #[error("layer mismatch: {0}")]
    LayerMismatch(String),
    #[error("self loop on vertex {0}")]
    SelfLoop(u32),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("deadline missed: {0}")]
    DeadlineMissed(String),
    #[error("no feasible parameter point on the grid")]
    Infeasible,
    #[error("reference edge count {m_hat} below bootstrap minimum {min}")]
    BootstrapRange { m_hat: u64, min: u64 },
    #[error("edge count {m} left the rebuild window around {m_hat}")]
    RebuildRequired { m: u64, m_hat: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
