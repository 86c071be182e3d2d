use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("jet order {0} exceeds the supported maximum")]
    OrderTooHigh(usize),
    #[error("Newton iteration did not converge (residual {residual:e})")]
    NewtonDiverged { residual: f64 },
    #[error("bundle file error at line {line}: {message}")]
    BundleFile { line: usize, message: String },
    #[error("refused: {0}")]
    Refused(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
