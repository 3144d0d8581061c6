//! Dense matrices, symmetric eigendecomposition and the Sylvester solvers
//! used by the centroid update.

mod dense;
mod eigen;
mod sylvester;

pub use dense::{dot, norm2, sq_dist, DenseMatrix};
pub use eigen::{eig_symmetric, SymmetricEigen, JACOBI_MAX_SWEEPS};
pub use sylvester::{
    build_mn, solve_sylvester, CompleteGraphSylvester, SpectralSylvester, StepSizes,
    SylvesterSolve, SINGULAR_PAIR_THRESHOLD,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    AsymmetricInput(f64),
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("invalid step size {name} = {value}")]
    BadStepSize { name: &'static str, value: f64 },
    #[error("Sylvester equation is singular: min eigenvalue sum {0:e}")]
    SingularPair(f64),
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}
