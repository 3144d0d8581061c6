//! Sparse convex biclustering.
//!
//! Rows and columns of a data matrix are clustered jointly by shrinking a
//! centroid matrix with fusion penalties on row and column differences,
//! while a group-lasso penalty on centroid columns removes uninformative
//! features. The problem is convex and is solved by ADMM whose centroid
//! update is a Sylvester equation.
//!
//! Modules:
//! - [`linalg`]: dense matrices, Jacobi eigensolver, Sylvester solvers
//! - [`prox`]: proximal maps for the L1, L2 and L∞ norms
//! - [`weights`]: kNN-Gaussian fusion weights and adaptive feature factors
//! - [`admm`]: the iteration, objective and warm-startable state
//! - [`select`]: grid search, validation-ARI tuning, stability selection
//! - [`metrics`]: cluster extraction, ARI, FNR/FPR and AUC
//! - [`simgen`]: checkerboard simulations
//! - [`io`]: CSV, PGM and JSON report formats

pub mod admm;
pub mod data;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod par;
pub mod prox;
pub mod select;
pub mod simgen;
pub mod weights;

pub use admm::{fit, FitReport, FusionPenalty, PenaltyConfig};
pub use data::{DataMatrix, Scaling, Standardizer};
pub use linalg::DenseMatrix;
pub use par::Execution;
pub use prox::ProxKind;
pub use weights::WeightSet;
