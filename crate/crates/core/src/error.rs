use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid matrix shape: {0}")]
    InvalidShape(String),

    /// A pivot column has (numerically) no mass left below the diagonal.
    #[error(
        "rank deficiency at column {column}: remaining tail norm {tail_norm:e} is below tolerance"
    )]
    RankDeficient { column: usize, tail_norm: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("columns are not orthonormal (max |XᵀX - I| = {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("vector is not orthogonal to col(X) (max |Xᵀx| = {residual:e})")]
    NotOrthogonal { residual: f64 },

    #[error("invalid row selection: {0}")]
    InvalidSelection(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical check failed: {0}")]
    CheckFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
