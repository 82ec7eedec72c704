//! Shared numeric substrate: exact second-order jets, finite-difference
//! checks, a Jacobi eigensolver, orthonormalization and numerical rank.

mod expr;
mod fd;
mod jet;
mod linalg;
mod optimize;

pub use expr::{Expr, MapExpr, Scalar};
pub use fd::{finite_diff_second, jet_relative_error, DEFAULT_FD_STEP};
pub use jet::{jet_eval, Jet2};
pub use linalg::{
    gram_schmidt, haar_rotation, null_space, numerical_rank, orthonormal_complement,
    orthonormal_complement_with_pivots, rref, singular_values, sym_eig, Complement, GramSchmidt,
    SymEigen, SymMatrix, DEFAULT_RANK_TOL, JACOBI_MAX_SWEEPS,
};
pub use optimize::{levenberg_marquardt, LmOptions, LmOutcome};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("domain violation in `{primitive}` at argument {value}")]
    Domain { primitive: &'static str, value: f64 },
    #[error("variable x{index} out of range for {len} inputs")]
    VariableOutOfRange { index: usize, len: usize },
    #[error("expected {expected} inputs, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("column {column} is numerically dependent on earlier columns")]
    RankDeficient { column: usize },
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },
    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),
}
