//! The sparse convex biclustering ADMM.
//!
//! Each iteration solves a Sylvester equation for the centroid matrix `A`,
//! applies proximal maps to the row-fusion (V), column-fusion (Z) and
//! feature-sparsity (G) slacks, then takes a dual ascent step. Fusion terms
//! range over all row pairs and all column pairs, which is what gives the
//! Sylvester coefficients their closed form.

mod engine;
mod state;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{DenseMatrix, LinalgError, StepSizes};
use crate::prox::{ProxError, ProxKind};
use crate::weights::WeightSet;

pub use engine::{AdmmEngine, Blocks};
pub use state::{AdmmState, EdgeBlock, IterationRecord};

pub const DEFAULT_TOL: f64 = 1e-5;
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Any centroid entry beyond this magnitude aborts the fit.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Prox(#[from] ProxError),
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("iterate diverged at iteration {iteration}")]
    NonFiniteEncountered { iteration: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("weights: {0}")]
    Weights(String),
}

/// Fusion tuning: separate row/column parameters or one shared parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum FusionPenalty {
    Separate { gamma1: f64, gamma2: f64 },
    Combined { gamma: f64 },
}

impl FusionPenalty {
    /// `(γ1, γ2)`; the combined form uses its single γ for both.
    pub fn gammas(&self) -> (f64, f64) {
        match *self {
            FusionPenalty::Separate { gamma1, gamma2 } => (gamma1, gamma2),
            FusionPenalty::Combined { gamma } => (gamma, gamma),
        }
    }
}

/// Which Sylvester solver performs the centroid update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Closed-form eigenstructure of the complete-graph coefficients.
    #[default]
    CompleteGraph,
    /// Jacobi eigendecomposition of M and N.
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub fusion: FusionPenalty,
    pub gamma3: f64,
    pub nu: StepSizes,
    pub q: ProxKind,
    pub weights: WeightSet,
    pub tol: f64,
    pub max_iter: usize,
    #[serde(default)]
    pub solver: SolverKind,
}

impl PenaltyConfig {
    /// Defaults for everything except the penalties and weights.
    pub fn new(fusion: FusionPenalty, gamma3: f64, weights: WeightSet) -> Self {
        Self {
            fusion,
            gamma3,
            nu: StepSizes::default(),
            q: ProxKind::L2,
            weights,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            solver: SolverKind::default(),
        }
    }

    pub fn gammas(&self) -> (f64, f64, f64) {
        let (g1, g2) = self.fusion.gammas();
        (g1, g2, self.gamma3)
    }

    pub fn validate(&self) -> Result<(), FitError> {
        let (g1, g2, g3) = self.gammas();
        for (name, g) in [("gamma1", g1), ("gamma2", g2), ("gamma3", g3)] {
            if !(g.is_finite() && g >= 0.0) {
                return Err(FitError::InvalidConfig(format!("{name} = {g}")));
            }
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(FitError::InvalidConfig(format!("tol = {}", self.tol)));
        }
        self.nu.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub state: AdmmState,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    #[serde(with = "duration_secs")]
    pub wall_time: Duration,
}

mod duration_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

/// Penalized objective at the feasible point determined by `a`:
/// `½‖X − A‖² + γ1 Σ w‖A_i· − A_j·‖_q + γ2 Σ w̃‖a_i − a_j‖_q + γ3 Σ u_j‖a_j‖₂`.
pub fn objective_at(x: &DenseMatrix, a: &DenseMatrix, config: &PenaltyConfig) -> Result<f64, FitError> {
    if x.shape() != a.shape() {
        return Err(FitError::ShapeMismatch {
            expected: x.shape(),
            found: a.shape(),
        });
    }
    let ws = &config.weights;
    if (ws.n, ws.p) != a.shape() {
        return Err(FitError::ShapeMismatch {
            expected: (ws.n, ws.p),
            found: a.shape(),
        });
    }
    let (g1, g2, g3) = config.gammas();
    let fidelity = 0.5 * x.sub(a)?.as_slice().iter().map(|v| v * v).sum::<f64>();

    let mut buf = vec![0.0; a.cols()];
    let mut row_pen = 0.0;
    for e in ws.active_row_edges() {
        for ((b, x1), x2) in buf.iter_mut().zip(a.row(e.i)).zip(a.row(e.j)) {
            *b = x1 - x2;
        }
        row_pen += e.weight * config.q.norm(&buf);
    }

    let at = a.transpose();
    let mut buf = vec![0.0; a.rows()];
    let mut col_pen = 0.0;
    for e in ws.active_col_edges() {
        for ((b, x1), x2) in buf.iter_mut().zip(at.row(e.i)).zip(at.row(e.j)) {
            *b = x1 - x2;
        }
        col_pen += e.weight * config.q.norm(&buf);
    }

    let sparsity: f64 = a
        .col_norms()
        .iter()
        .zip(&ws.feature_factors)
        .map(|(norm, u)| u * norm)
        .sum();

    Ok(fidelity + g1 * row_pen + g2 * col_pen + g3 * sparsity)
}

pub fn objective(x: &DenseMatrix, state: &AdmmState, config: &PenaltyConfig) -> Result<f64, FitError> {
    objective_at(x, &state.a, config)
}

/// Runs the sparse ADMM from `init` (warm start) or from `A = X`.
///
/// Converges when `‖Aᵐ − Aᵐ⁻¹‖_F / max(1, ‖Aᵐ⁻¹‖_F) ≤ tol` and every
/// slack is within `tol · max(1, ‖Aᵐ‖_F)` of its constraint. Hitting
/// `max_iter` returns the last iterate with `converged = false`.
pub fn fit(x: &DenseMatrix, config: &PenaltyConfig, init: Option<&AdmmState>) -> Result<FitReport, FitError> {
    AdmmEngine::new(x, config, Blocks::Sparse)?.run(init)
}

/// Plain convex biclustering: the same iteration with the sparsity block
/// (G, Λ3 and the ν3 term) removed. `gamma3` and the factors are ignored.
pub fn fit_without_sparsity(
    x: &DenseMatrix,
    config: &PenaltyConfig,
    init: Option<&AdmmState>,
) -> Result<FitReport, FitError> {
    AdmmEngine::new(x, config, Blocks::FusionOnly)?.run(init)
}
