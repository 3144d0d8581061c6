//! Reading clusters off a fitted centroid matrix and scoring them.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{norm2, sq_dist, DenseMatrix};

/// Default merge threshold for [`extract_clusters`].
pub const DEFAULT_EPS: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("label vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {0} entries")]
    TooShort(usize),
    #[error("truth must contain both positives and negatives")]
    DegenerateTruth,
    #[error("path needs at least two points")]
    EmptyPath,
}

/// Row and column partitions plus the retained-feature mask of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiclusterResult {
    pub row_labels: Vec<usize>,
    pub col_labels: Vec<usize>,
    pub feature_mask: Vec<bool>,
    /// Absolute distance under which rows, columns or column norms count as zero.
    pub threshold: f64,
    #[serde(skip)]
    pub centroids: Option<DenseMatrix>,
}

impl BiclusterResult {
    pub fn n_row_clusters(&self) -> usize {
        self.row_labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn n_col_clusters(&self) -> usize {
        self.col_labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn n_selected(&self) -> usize {
        self.feature_mask.iter().filter(|b| **b).count()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so labels follow member order
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }

    /// Contiguous labels numbered by each component's smallest member.
    fn labels(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut next = 0;
        let mut map = vec![usize::MAX; n];
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let r = self.find(i);
            if map[r] == usize::MAX {
                map[r] = next;
                next += 1;
            }
            out.push(map[r]);
        }
        out
    }
}

fn components(points: &DenseMatrix, threshold: f64) -> Vec<usize> {
    let n = points.rows();
    let mut uf = UnionFind::new(n);
    let t2 = threshold * threshold;
    for i in 0..n {
        for j in (i + 1)..n {
            if sq_dist(points.row(i), points.row(j)) <= t2 {
                uf.union(i, j);
            }
        }
    }
    uf.labels()
}

/// Groups rows (and columns) whose centroid differences fall within
/// `eps·(1 + ‖Â‖_F/√(np))`, closing transitively, and marks a feature as
/// retained when its centroid column norm exceeds the same threshold.
pub fn extract_clusters(a_hat: &DenseMatrix, eps: f64) -> BiclusterResult {
    let (n, p) = a_hat.shape();
    let scale = if n * p > 0 {
        a_hat.frobenius_norm() / ((n * p) as f64).sqrt()
    } else {
        0.0
    };
    let threshold = eps * (1.0 + scale);
    let row_labels = components(a_hat, threshold);
    let col_labels = components(&a_hat.transpose(), threshold);
    let feature_mask = a_hat.col_norms().into_iter().map(|c| c > threshold).collect();
    BiclusterResult {
        row_labels,
        col_labels,
        feature_mask,
        threshold,
        centroids: Some(a_hat.clone()),
    }
}

/// Mean centroid row of each cluster, indexed by label.
pub fn cluster_centroids(a_hat: &DenseMatrix, labels: &[usize]) -> Vec<Vec<f64>> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let p = a_hat.cols();
    let mut sums = vec![vec![0.0; p]; k];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(a_hat.row(i)) {
            *s += v;
        }
    }
    for (s, c) in sums.iter_mut().zip(counts) {
        s.iter_mut().for_each(|v| *v /= c.max(1) as f64);
    }
    sums
}

/// Index of the nearest centroid (Euclidean, first on ties) for each row.
pub fn assign_nearest(x: &DenseMatrix, centroids: &[Vec<f64>]) -> Vec<usize> {
    (0..x.rows())
        .map(|i| {
            let row = x.row(i);
            centroids
                .iter()
                .enumerate()
                .map(|(k, c)| (k, sq_dist(row, c)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map_or(0, |(k, _)| k)
        })
        .collect()
}

fn choose2(k: u64) -> f64 {
    (k * k.saturating_sub(1) / 2) as f64
}

/// Hubert–Arabie adjusted Rand index.
///
/// When the chance-corrected denominator vanishes (both partitions are a
/// single cluster, or both are all singletons) the partitions agree and
/// the result is 1.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(MetricError::TooShort(2));
    }
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| choose2(c)).sum();
    let total = choose2(a.len() as u64);
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    let denom = max - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

/// Product partition of an n×p grid: cell (i, j) gets the pair of labels.
pub fn product_labels(rows: &[usize], cols: &[usize]) -> Vec<usize> {
    let width = cols.iter().max().map_or(1, |m| m + 1);
    rows.iter()
        .flat_map(|&r| cols.iter().map(move |&c| r * width + c))
        .collect()
}

/// `(FNR, FPR)` of a retained-feature mask against the informative truth.
pub fn selection_rates(mask: &[bool], truth: &[bool]) -> Result<(f64, f64), MetricError> {
    if mask.len() != truth.len() {
        return Err(MetricError::LengthMismatch(mask.len(), truth.len()));
    }
    let positives = truth.iter().filter(|t| **t).count();
    let negatives = truth.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(MetricError::DegenerateTruth);
    }
    let missed = mask.iter().zip(truth).filter(|(m, t)| **t && !**m).count();
    let retained_noise = mask.iter().zip(truth).filter(|(m, t)| !**t && **m).count();
    Ok((
        missed as f64 / positives as f64,
        retained_noise as f64 / negatives as f64,
    ))
}

/// Trapezoidal area under an (FPR, TPR) path, anchored at (0,0) and (1,1).
pub fn selection_auc(path: &[(f64, f64)]) -> Result<f64, MetricError> {
    if path.len() < 2 {
        return Err(MetricError::EmptyPath);
    }
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(path.len() + 2);
    pts.push((0.0, 0.0));
    pts.extend_from_slice(path);
    pts.push((1.0, 1.0));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let area = pts
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * 0.5 * (w[0].1 + w[1].1))
        .sum::<f64>();
    Ok(area.clamp(0.0, 1.0))
}

/// Euclidean norms of the centroid columns.
pub fn feature_norms(a_hat: &DenseMatrix) -> Vec<f64> {
    a_hat.col_norms()
}

/// Convenience for single vectors.
pub fn l2(v: &[f64]) -> f64 {
    norm2(v)
}
