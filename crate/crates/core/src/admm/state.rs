use serde::{Deserialize, Serialize};

use crate::linalg::DenseMatrix;
use crate::weights::WeightSet;

use super::FitError;

/// Slack vectors and multipliers for one family of fusion constraints.
///
/// Only pairs with positive weight are stored. A zero-weight pair has a
/// zero-scale proximal step, so after any update its slack equals the
/// current difference and its multiplier is zero; both are reconstructed on
/// demand by [`AdmmState::row_block`] and [`AdmmState::col_block`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeBlock {
    pub pairs: Vec<(usize, usize)>,
    /// Length of each slack vector (p for rows, n for columns).
    pub dim: usize,
    /// Edge-major slack values, `pairs.len() × dim`.
    pub slack: Vec<f64>,
    /// Edge-major multipliers, same layout as `slack`.
    pub dual: Vec<f64>,
}

impl EdgeBlock {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    #[inline]
    pub fn slack(&self, e: usize) -> &[f64] {
        &self.slack[e * self.dim..(e + 1) * self.dim]
    }

    #[inline]
    pub fn dual(&self, e: usize) -> &[f64] {
        &self.dual[e * self.dim..(e + 1) * self.dim]
    }

    fn position(&self, pair: (usize, usize)) -> Option<usize> {
        self.pairs.binary_search(&pair).ok()
    }
}

/// Per-iteration diagnostics. Residuals are the largest Euclidean norm of a
/// constraint violation in each block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub r_v: f64,
    pub r_z: f64,
    pub r_g: f64,
    pub delta_a: f64,
}

/// The full ADMM iterate.
///
/// Field order is the serialization order: `a`, `rows` (V, Λ1), `cols`
/// (Z, Λ2), `feature_slack` (G, row j is g_j), `feature_dual` (Λ3, row j is
/// λ3j), `iterations`, `history`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmmState {
    pub a: DenseMatrix,
    pub rows: EdgeBlock,
    pub cols: EdgeBlock,
    pub feature_slack: DenseMatrix,
    pub feature_dual: DenseMatrix,
    pub iterations: usize,
    pub history: Vec<IterationRecord>,
}

const SNAPSHOT_FORMAT: &str = "spacobi-admm-state";
const SNAPSHOT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Snapshot {
    format: String,
    version: u32,
    state: AdmmState,
}

fn diff_rows(a: &DenseMatrix, i: usize, j: usize) -> Vec<f64> {
    a.row(i).iter().zip(a.row(j)).map(|(x, y)| x - y).collect()
}

fn diff_cols(a: &DenseMatrix, i: usize, j: usize) -> Vec<f64> {
    (0..a.rows()).map(|r| a[(r, i)] - a[(r, j)]).collect()
}

impl AdmmState {
    /// `A = X`, slacks at their feasible values, multipliers zero.
    pub fn cold_start(x: &DenseMatrix, weights: &WeightSet) -> Self {
        Self::from_centroids(x.clone(), weights)
    }

    /// Feasible state at the given centroids with zero multipliers.
    pub fn from_centroids(a: DenseMatrix, weights: &WeightSet) -> Self {
        let (n, p) = a.shape();
        let row_pairs: Vec<(usize, usize)> = weights.active_row_edges().map(|e| (e.i, e.j)).collect();
        let col_pairs: Vec<(usize, usize)> = weights.active_col_edges().map(|e| (e.i, e.j)).collect();
        let row_slack = row_pairs.iter().flat_map(|&(i, j)| diff_rows(&a, i, j)).collect();
        let col_slack = col_pairs.iter().flat_map(|&(i, j)| diff_cols(&a, i, j)).collect();
        let rows = EdgeBlock {
            dual: vec![0.0; row_pairs.len() * p],
            pairs: row_pairs,
            dim: p,
            slack: row_slack,
        };
        let cols = EdgeBlock {
            dual: vec![0.0; col_pairs.len() * n],
            pairs: col_pairs,
            dim: n,
            slack: col_slack,
        };
        Self {
            feature_slack: a.transpose(),
            feature_dual: DenseMatrix::zeros(p, n),
            a,
            rows,
            cols,
            iterations: 0,
            history: Vec::new(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.a.shape()
    }

    /// Re-indexes a state onto the active pairs of `weights`. Stored blocks are
    /// kept; pairs that were implicit become explicit at their implied values;
    /// stored pairs that are no longer active are dropped. Counters reset.
    pub fn aligned_to(&self, weights: &WeightSet) -> Result<Self, FitError> {
        self.validate()?;
        let (n, p) = self.a.shape();
        if (weights.n, weights.p) != (n, p) {
            return Err(FitError::ShapeMismatch {
                expected: (weights.n, weights.p),
                found: (n, p),
            });
        }
        let mut out = Self::from_centroids(self.a.clone(), weights);
        for (e, &pair) in out.rows.pairs.clone().iter().enumerate() {
            if let Some(src) = self.rows.position(pair) {
                out.rows.slack[e * p..(e + 1) * p].copy_from_slice(self.rows.slack(src));
                out.rows.dual[e * p..(e + 1) * p].copy_from_slice(self.rows.dual(src));
            }
        }
        for (e, &pair) in out.cols.pairs.clone().iter().enumerate() {
            if let Some(src) = self.cols.position(pair) {
                out.cols.slack[e * n..(e + 1) * n].copy_from_slice(self.cols.slack(src));
                out.cols.dual[e * n..(e + 1) * n].copy_from_slice(self.cols.dual(src));
            }
        }
        out.feature_slack = self.feature_slack.clone();
        out.feature_dual = self.feature_dual.clone();
        Ok(out)
    }

    /// Slack and multiplier for any row pair `i < j`, including implicit ones.
    pub fn row_block(&self, i: usize, j: usize) -> (Vec<f64>, Vec<f64>) {
        match self.rows.position((i, j)) {
            Some(e) => (self.rows.slack(e).to_vec(), self.rows.dual(e).to_vec()),
            None => (diff_rows(&self.a, i, j), vec![0.0; self.rows.dim]),
        }
    }

    /// Slack and multiplier for any column pair `i < j`, including implicit ones.
    pub fn col_block(&self, i: usize, j: usize) -> (Vec<f64>, Vec<f64>) {
        match self.cols.position((i, j)) {
            Some(e) => (self.cols.slack(e).to_vec(), self.cols.dual(e).to_vec()),
            None => (diff_cols(&self.a, i, j), vec![0.0; self.cols.dim]),
        }
    }

    pub fn validate(&self) -> Result<(), FitError> {
        let (n, p) = self.a.shape();
        let bad = |what: &str| Err(FitError::InvalidState(what.to_string()));
        if self.rows.dim != p || self.cols.dim != n {
            return bad("edge block dimension does not match centroids");
        }
        for block in [&self.rows, &self.cols] {
            if block.slack.len() != block.pairs.len() * block.dim
                || block.dual.len() != block.pairs.len() * block.dim
            {
                return bad("edge block length does not match its pair list");
            }
            if !block.pairs.windows(2).all(|w| w[0] < w[1]) {
                return bad("edge pairs must be strictly increasing");
            }
        }
        if self.rows.pairs.iter().any(|&(i, j)| i >= j || j >= n)
            || self.cols.pairs.iter().any(|&(i, j)| i >= j || j >= p)
        {
            return bad("edge pair out of range");
        }
        if self.feature_slack.shape() != (p, n) || self.feature_dual.shape() != (p, n) {
            return bad("feature block must be p x n");
        }
        let finite = self.a.all_finite()
            && self.feature_slack.all_finite()
            && self.feature_dual.all_finite()
            && [&self.rows, &self.cols]
                .iter()
                .all(|b| b.slack.iter().chain(&b.dual).all(|v| v.is_finite()));
        if !finite {
            return bad("state contains non-finite values");
        }
        Ok(())
    }

    /// Versioned JSON snapshot; floats round-trip exactly.
    pub fn to_json(&self) -> String {
        let snap = Snapshot {
            format: SNAPSHOT_FORMAT.to_string(),
            version: SNAPSHOT_VERSION,
            state: self.clone(),
        };
        serde_json::to_string(&snap).expect("state serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, FitError> {
        let snap: Snapshot =
            serde_json::from_str(s).map_err(|e| FitError::InvalidState(e.to_string()))?;
        if snap.format != SNAPSHOT_FORMAT || snap.version != SNAPSHOT_VERSION {
            return Err(FitError::InvalidState(format!(
                "unsupported snapshot {} v{}",
                snap.format, snap.version
            )));
        }
        snap.state.validate()?;
        Ok(snap.state)
    }
}
