use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    SpecMismatch(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("node ({i}, {j}) is on the boundary")]
    BoundaryNode { i: usize, j: usize },

    #[error("degenerate cell ({i}, {j}): zero-length edge")]
    DegenerateCell { i: usize, j: usize },

    #[error("transformation folds: minimum interior Jacobian {min_jacobian} at node ({i}, {j})")]
    Folded {
        min_jacobian: f64,
        i: usize,
        j: usize,
    },

    #[error("infeasible monitor: {0}")]
    InfeasibleMonitor(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
