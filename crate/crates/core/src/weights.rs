//! Fusion weights over all row pairs and column pairs, plus the per-feature
//! sparsity factors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::admm::{fit, FitError, FitReport, PenaltyConfig};
use crate::linalg::{sq_dist, DenseMatrix};
use crate::par::{map_range, Execution};

/// Neighbour count used when none is given.
pub const DEFAULT_NEIGHBORS: usize = 5;
/// Gaussian kernel bandwidth used when none is given.
pub const DEFAULT_PHI: f64 = 0.5;
/// Column norms below this are treated as zero when forming factors.
pub const FACTOR_NORM_FLOOR: f64 = 1e-8;

const RESCALE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("neighbour count {m} must be in 1..{len}")]
    BadNeighborCount { m: usize, len: usize },
    #[error("kernel bandwidth must be finite and nonnegative, got {0}")]
    BadBandwidth(f64),
    #[error("{0} weights are all zero")]
    AllZeroWeights(&'static str),
    #[error("invalid edge list: {0}")]
    InvalidEdges(String),
    #[error("expected {expected} factors, got {found}")]
    FactorLength { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Rows,
    Cols,
}

/// A weighted pair `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Sums the three weight groups are rescaled to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleTargets {
    pub row: f64,
    pub col: f64,
    pub factor: f64,
}

impl ScaleTargets {
    /// `1/√p`, `1/√n`, `1/√n`.
    pub fn for_shape(n: usize, p: usize) -> Self {
        Self {
            row: 1.0 / (p as f64).sqrt(),
            col: 1.0 / (n as f64).sqrt(),
            factor: 1.0 / (n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSet {
    pub n: usize,
    pub p: usize,
    /// All `n(n−1)/2` row pairs in lexicographic order.
    pub row_edges: Vec<Edge>,
    /// All `p(p−1)/2` column pairs in lexicographic order.
    pub col_edges: Vec<Edge>,
    pub feature_factors: Vec<f64>,
    pub targets: ScaleTargets,
}

/// Position of the pair `(i, j)`, `i < j`, in the lexicographic pair list
/// over `len` entities.
#[inline]
pub fn pair_index(len: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < len);
    i * (2 * len - i - 1) / 2 + (j - i - 1)
}

/// Gaussian-kernel weights restricted to m-nearest neighbours.
///
/// A pair gets `exp(−φ·d²)` when either endpoint is among the other's `m`
/// nearest neighbours (ties broken by index), and weight zero otherwise.
/// Every pair is returned.
pub fn knn_gaussian_weights(
    x: &DenseMatrix,
    axis: Axis,
    m: usize,
    phi: f64,
) -> Result<Vec<Edge>, WeightError> {
    knn_gaussian_weights_with(x, axis, m, phi, Execution::default())
}

pub fn knn_gaussian_weights_with(
    x: &DenseMatrix,
    axis: Axis,
    m: usize,
    phi: f64,
    exec: Execution,
) -> Result<Vec<Edge>, WeightError> {
    let entities = match axis {
        Axis::Rows => x.clone(),
        Axis::Cols => x.transpose(),
    };
    let len = entities.rows();
    if m == 0 || m >= len {
        return Err(WeightError::BadNeighborCount { m, len });
    }
    if !(phi.is_finite() && phi >= 0.0) {
        return Err(WeightError::BadBandwidth(phi));
    }

    // squared distances from each entity to every later one
    let upper: Vec<Vec<f64>> = map_range(exec, len, |i| {
        let ri = entities.row(i);
        ((i + 1)..len)
            .map(|j| sq_dist(ri, entities.row(j)))
            .collect()
    });
    let dist = |i: usize, j: usize| -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => upper[i][j - i - 1],
            std::cmp::Ordering::Greater => upper[j][i - j - 1],
            std::cmp::Ordering::Equal => 0.0,
        }
    };

    let neighbours: Vec<Vec<usize>> = map_range(exec, len, |i| {
        let mut others: Vec<usize> = (0..len).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| dist(i, a).total_cmp(&dist(i, b)).then(a.cmp(&b)));
        others.truncate(m);
        others
    });
    let mut linked = vec![false; len * (len - 1) / 2];
    for (i, list) in neighbours.iter().enumerate() {
        for &j in list {
            linked[pair_index(len, i.min(j), i.max(j))] = true;
        }
    }

    let mut edges = Vec::with_capacity(linked.len());
    for i in 0..len {
        for j in (i + 1)..len {
            let weight = if linked[pair_index(len, i, j)] {
                (-phi * dist(i, j)).exp()
            } else {
                0.0
            };
            edges.push(Edge { i, j, weight });
        }
    }
    Ok(edges)
}

/// `1 / max(‖a_j‖₂, 1e-8)` for each column of a pilot estimate.
pub fn raw_adaptive_factors(pilot: &DenseMatrix) -> Vec<f64> {
    pilot
        .col_norms()
        .into_iter()
        .map(|norm| 1.0 / norm.max(FACTOR_NORM_FLOOR))
        .collect()
}

/// Adaptive sparsity factors from a `γ3 = 0` fit of `x` under `config`'s
/// fusion settings, rescaled to sum to `1/√n`. The pilot report is returned
/// so callers can warm-start from it.
pub fn adaptive_factors(
    x: &DenseMatrix,
    config: &PenaltyConfig,
) -> Result<(Vec<f64>, FitReport), FitError> {
    let mut pilot_config = config.clone();
    pilot_config.gamma3 = 0.0;
    let pilot = fit(x, &pilot_config, None)?;
    let raw = raw_adaptive_factors(&pilot.state.a);
    let scaled = rescale_to(&raw, config.weights.targets.factor)
        .map_err(|e| FitError::Weights(e.to_string()))?;
    Ok((scaled, pilot))
}

fn rescale_to(values: &[f64], target: f64) -> Result<Vec<f64>, WeightError> {
    let total: f64 = values.iter().sum();
    if !(total > 0.0) {
        return Err(WeightError::AllZeroWeights("factor"));
    }
    let k = target / total;
    Ok(values.iter().map(|v| v * k).collect())
}

fn check_edges(edges: &[Edge], len: usize, what: &str) -> Result<(), WeightError> {
    if edges.len() != len * len.saturating_sub(1) / 2 {
        return Err(WeightError::InvalidEdges(format!(
            "{what}: expected all {} pairs, got {}",
            len * len.saturating_sub(1) / 2,
            edges.len()
        )));
    }
    let mut k = 0;
    for i in 0..len {
        for j in (i + 1)..len {
            let e = &edges[k];
            if e.i != i || e.j != j {
                return Err(WeightError::InvalidEdges(format!(
                    "{what}: edge {k} is ({}, {}), expected ({i}, {j})",
                    e.i, e.j
                )));
            }
            if !(e.weight.is_finite() && e.weight >= 0.0) {
                return Err(WeightError::InvalidEdges(format!(
                    "{what}: edge ({i}, {j}) has weight {}",
                    e.weight
                )));
            }
            k += 1;
        }
    }
    Ok(())
}

impl WeightSet {
    /// Assembles a weight set without rescaling.
    pub fn new(
        n: usize,
        p: usize,
        row_edges: Vec<Edge>,
        col_edges: Vec<Edge>,
        feature_factors: Vec<f64>,
    ) -> Result<Self, WeightError> {
        check_edges(&row_edges, n, "row")?;
        check_edges(&col_edges, p, "column")?;
        if feature_factors.len() != p {
            return Err(WeightError::FactorLength {
                expected: p,
                found: feature_factors.len(),
            });
        }
        if feature_factors.iter().any(|u| !(u.is_finite() && *u >= 0.0)) {
            return Err(WeightError::InvalidEdges(
                "factors must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            n,
            p,
            row_edges,
            col_edges,
            feature_factors,
            targets: ScaleTargets::for_shape(n, p),
        })
    }

    /// kNN-Gaussian fusion weights on both axes with uniform factors,
    /// rescaled. `m` is clamped to one less than the axis length so small
    /// matrices still get a connected neighbour graph.
    pub fn from_data(x: &DenseMatrix, m: usize, phi: f64, exec: Execution) -> Result<Self, WeightError> {
        let (n, p) = x.shape();
        let row_m = m.min(n.saturating_sub(1));
        let col_m = m.min(p.saturating_sub(1));
        let rows = knn_gaussian_weights_with(x, Axis::Rows, row_m, phi, exec)?;
        let cols = knn_gaussian_weights_with(x, Axis::Cols, col_m, phi, exec)?;
        Self::new(n, p, rows, cols, vec![1.0; p])?.rescale()
    }

    /// Scales each group to its target sum, preserving proportions.
    pub fn rescale(mut self) -> Result<Self, WeightError> {
        let row_sum: f64 = self.row_edges.iter().map(|e| e.weight).sum();
        let col_sum: f64 = self.col_edges.iter().map(|e| e.weight).sum();
        if !(row_sum > 0.0) {
            return Err(WeightError::AllZeroWeights("row"));
        }
        if !(col_sum > 0.0) {
            return Err(WeightError::AllZeroWeights("column"));
        }
        if self.is_rescaled() {
            return Ok(self);
        }
        let kr = self.targets.row / row_sum;
        let kc = self.targets.col / col_sum;
        self.row_edges.iter_mut().for_each(|e| e.weight *= kr);
        self.col_edges.iter_mut().for_each(|e| e.weight *= kc);
        self.feature_factors = rescale_to(&self.feature_factors, self.targets.factor)?;
        Ok(self)
    }

    /// Replaces the sparsity factors, rescaling them to the factor target.
    pub fn with_factors(mut self, factors: &[f64]) -> Result<Self, WeightError> {
        if factors.len() != self.p {
            return Err(WeightError::FactorLength {
                expected: self.p,
                found: factors.len(),
            });
        }
        self.feature_factors = rescale_to(factors, self.targets.factor)?;
        Ok(self)
    }

    pub fn is_rescaled(&self) -> bool {
        let close = |sum: f64, target: f64| (sum - target).abs() <= RESCALE_TOL * target;
        close(self.row_edges.iter().map(|e| e.weight).sum(), self.targets.row)
            && close(self.col_edges.iter().map(|e| e.weight).sum(), self.targets.col)
            && close(self.feature_factors.iter().sum(), self.targets.factor)
    }

    pub fn active_row_edges(&self) -> impl Iterator<Item = &Edge> {
        self.row_edges.iter().filter(|e| e.weight > 0.0)
    }

    pub fn active_col_edges(&self) -> impl Iterator<Item = &Edge> {
        self.col_edges.iter().filter(|e| e.weight > 0.0)
    }
}
