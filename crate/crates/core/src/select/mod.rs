//! Tuning-parameter search.
//!
//! A grid is a set of fusion settings crossed with an ascending γ3 ladder.
//! Each fusion setting's ladder runs in order, each fit warm-started from
//! the previous converged state; distinct ladders may run in parallel.

mod distance;
mod stability;
mod tune;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::admm::{
    fit, AdmmState, FitError, FitReport, FusionPenalty, PenaltyConfig, SolverKind, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use crate::data::{standardize, Scaling, Standardizer};
use crate::linalg::{DenseMatrix, StepSizes};
use crate::metrics::{MetricError, DEFAULT_EPS};
use crate::par::{map_slice, Execution};
use crate::prox::ProxKind;
use crate::weights::{raw_adaptive_factors, WeightError, WeightSet, DEFAULT_NEIGHBORS, DEFAULT_PHI};

pub use distance::clustering_distance;
pub use stability::{stability_select, StabilityOutcome, StabilityScore, DEFAULT_BOOTSTRAPS};
pub use stability::bootstrap_pair;
pub use tune::{ari_tune, extend_rows, AriOutcome, AriScore};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("no grid point produced a usable fit")]
    NothingSelectable,
    #[error("need at least one bootstrap pair")]
    NoBootstraps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridMode {
    /// One γ shared by the row and column fusion terms.
    TwoParameter,
    /// `gamma_ladder` tunes γ1 and this ladder tunes γ2.
    ThreeParameter { gamma2_ladder: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub gamma_ladder: Vec<f64>,
    pub gamma3_ladder: Vec<f64>,
    pub mode: GridMode,
}

/// `count` points from `e^lo` to `e^hi`, evenly spaced in the exponent.
pub fn log_ladder(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo.exp()],
        _ => (0..count)
            .map(|k| (lo + (hi - lo) * k as f64 / (count - 1) as f64).exp())
            .collect(),
    }
}

fn check_ladder(name: &str, ladder: &[f64], positive: bool) -> Result<(), SelectError> {
    if ladder.is_empty() {
        return Err(SelectError::InvalidGrid(format!("{name} is empty")));
    }
    for (k, &g) in ladder.iter().enumerate() {
        let ok = g.is_finite() && if positive { g > 0.0 } else { g >= 0.0 };
        if !ok {
            return Err(SelectError::InvalidGrid(format!("{name}[{k}] = {g}")));
        }
    }
    if ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SelectError::InvalidGrid(format!("{name} is not strictly increasing")));
    }
    Ok(())
}

impl GridSpec {
    pub fn two_parameter(gamma_ladder: Vec<f64>, gamma3_ladder: Vec<f64>) -> Self {
        Self {
            gamma_ladder,
            gamma3_ladder,
            mode: GridMode::TwoParameter,
        }
    }

    pub fn validate(&self) -> Result<(), SelectError> {
        check_ladder("gamma_ladder", &self.gamma_ladder, true)?;
        check_ladder("gamma3_ladder", &self.gamma3_ladder, false)?;
        if let GridMode::ThreeParameter { gamma2_ladder } = &self.mode {
            check_ladder("gamma2_ladder", gamma2_ladder, true)?;
        }
        Ok(())
    }

    /// Fusion settings in ladder order.
    pub fn fusions(&self) -> Vec<FusionPenalty> {
        match &self.mode {
            GridMode::TwoParameter => self
                .gamma_ladder
                .iter()
                .map(|&gamma| FusionPenalty::Combined { gamma })
                .collect(),
            GridMode::ThreeParameter { gamma2_ladder } => self
                .gamma_ladder
                .iter()
                .flat_map(|&gamma1| {
                    gamma2_ladder
                        .iter()
                        .map(move |&gamma2| FusionPenalty::Separate { gamma1, gamma2 })
                })
                .collect(),
        }
    }

    /// All points, fusion-major; the flat index is
    /// `fusion_index * gamma3_ladder.len() + gamma3_index`.
    pub fn points(&self) -> Vec<GridPoint> {
        self.fusions()
            .into_iter()
            .flat_map(|fusion| {
                self.gamma3_ladder
                    .iter()
                    .map(move |&gamma3| GridPoint { fusion, gamma3 })
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.fusions().len() * self.gamma3_ladder.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub fusion: FusionPenalty,
    pub gamma3: f64,
}

impl GridPoint {
    /// Total fusion strength, used to order points on ties.
    pub fn fusion_strength(&self) -> f64 {
        let (g1, g2) = self.fusion.gammas();
        g1 + g2
    }
}

/// Everything about a fit except the penalties and weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitSettings {
    pub nu: StepSizes,
    pub q: ProxKind,
    pub tol: f64,
    pub max_iter: usize,
    pub solver: SolverKind,
    /// Replace uniform sparsity factors by adaptive ones from a γ3 = 0 pilot.
    pub adaptive: bool,
    pub warm_start: bool,
    pub scaling: Scaling,
    pub neighbors: usize,
    pub phi: f64,
    /// Cluster-extraction threshold.
    pub eps: f64,
    pub execution: Execution,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            nu: StepSizes::default(),
            q: ProxKind::L2,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            solver: SolverKind::default(),
            adaptive: true,
            warm_start: true,
            scaling: Scaling::default(),
            neighbors: DEFAULT_NEIGHBORS,
            phi: DEFAULT_PHI,
            eps: DEFAULT_EPS,
            execution: Execution::default(),
        }
    }
}

impl FitSettings {
    pub fn config(&self, point: &GridPoint, weights: WeightSet) -> PenaltyConfig {
        PenaltyConfig {
            fusion: point.fusion,
            gamma3: point.gamma3,
            nu: self.nu,
            q: self.q,
            weights,
            tol: self.tol,
            max_iter: self.max_iter,
            solver: self.solver,
        }
    }
}

/// Scaled data and fusion weights ready for fitting.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub x: DenseMatrix,
    pub standardizer: Standardizer,
    pub weights: WeightSet,
}

/// Scales `raw` and builds its weights under `settings`.
pub fn prepare(raw: &DenseMatrix, settings: &FitSettings) -> Result<Prepared, SelectError> {
    let (x, standardizer) = standardize(raw, settings.scaling);
    let weights = WeightSet::from_data(&x, settings.neighbors, settings.phi, settings.execution)?;
    Ok(Prepared {
        x,
        standardizer,
        weights,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFit {
    pub index: usize,
    pub point: GridPoint,
    pub outcome: Result<FitReport, FitError>,
}

impl GridFit {
    pub fn report(&self) -> Option<&FitReport> {
        self.outcome.as_ref().ok()
    }
}

/// Weights for a ladder at `fusion`. With adaptive factors this fits the
/// γ3 = 0 pilot and also returns its state when it converged, as a warm
/// start for the first point.
pub fn pilot_weights(
    x: &DenseMatrix,
    weights: &WeightSet,
    fusion: FusionPenalty,
    settings: &FitSettings,
) -> Result<(WeightSet, Option<AdmmState>), FitError> {
    if !settings.adaptive {
        return Ok((weights.clone(), None));
    }
    let pilot_point = GridPoint { fusion, gamma3: 0.0 };
    let pilot = fit(x, &settings.config(&pilot_point, weights.clone()), None)?;
    let w = weights
        .clone()
        .with_factors(&raw_adaptive_factors(&pilot.state.a))
        .map_err(|e| FitError::Weights(e.to_string()))?;
    Ok((w, pilot.converged.then_some(pilot.state)))
}

/// Runs one γ3 ladder at a fixed fusion setting.
fn run_ladder(
    x: &DenseMatrix,
    weights: &WeightSet,
    fusion: FusionPenalty,
    fusion_index: usize,
    gamma3_ladder: &[f64],
    settings: &FitSettings,
) -> Vec<GridFit> {
    let base = fusion_index * gamma3_ladder.len();
    let points: Vec<GridPoint> = gamma3_ladder
        .iter()
        .map(|&gamma3| GridPoint { fusion, gamma3 })
        .collect();

    let (ladder_weights, mut warm) = match pilot_weights(x, weights, fusion, settings) {
        Ok(w) => w,
        Err(e) => {
            return points
                .into_iter()
                .enumerate()
                .map(|(k, point)| GridFit {
                    index: base + k,
                    point,
                    outcome: Err(e.clone()),
                })
                .collect();
        }
    };
    if !settings.warm_start {
        warm = None;
    }

    let mut out = Vec::with_capacity(points.len());
    for (k, point) in points.into_iter().enumerate() {
        let config = settings.config(&point, ladder_weights.clone());
        let outcome = fit(x, &config, warm.as_ref());
        warm = match &outcome {
            Ok(report) if settings.warm_start && report.converged => Some(report.state.clone()),
            _ => None,
        };
        out.push(GridFit {
            index: base + k,
            point,
            outcome,
        });
    }
    out
}

/// One fit per grid point, ordered by flat index. Failures are recorded in
/// place and the ladder continues from a cold start.
pub fn grid_search(
    x: &DenseMatrix,
    weights: &WeightSet,
    grid: &GridSpec,
    settings: &FitSettings,
) -> Result<Vec<GridFit>, SelectError> {
    grid.validate()?;
    let fusions: Vec<(usize, FusionPenalty)> = grid.fusions().into_iter().enumerate().collect();
    let ladders = map_slice(settings.execution, &fusions, |&(f, fusion)| {
        run_ladder(x, weights, fusion, f, &grid.gamma3_ladder, settings)
    });
    Ok(ladders.into_iter().flatten().collect())
}

/// One row of a grid report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma2: Option<f64>,
    pub gamma3: f64,
    pub iterations: usize,
    pub objective: Option<f64>,
    pub converged: bool,
    pub score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl PointReport {
    pub fn new(point: &GridPoint, outcome: Option<&Result<FitReport, FitError>>, score: Option<f64>) -> Self {
        let (gamma, gamma1, gamma2) = match point.fusion {
            FusionPenalty::Combined { gamma } => (Some(gamma), None, None),
            FusionPenalty::Separate { gamma1, gamma2 } => (None, Some(gamma1), Some(gamma2)),
        };
        let (iterations, objective, converged, error) = match outcome {
            Some(Ok(r)) => (r.iterations, Some(r.objective), r.converged, None),
            Some(Err(e)) => (0, None, false, Some(e.to_string())),
            None => (0, None, false, None),
        };
        Self {
            gamma,
            gamma1,
            gamma2,
            gamma3: point.gamma3,
            iterations,
            objective,
            converged,
            score,
            error,
        }
    }
}

/// Per-point grid summary without scores.
pub fn grid_report(fits: &[GridFit]) -> Vec<PointReport> {
    fits.iter()
        .map(|f| PointReport::new(&f.point, Some(&f.outcome), None))
        .collect()
}
