use serde::{Deserialize, Serialize};

use super::{grid_search, GridFit, GridPoint, GridSpec, FitSettings, SelectError};
use crate::linalg::DenseMatrix;
use crate::metrics::{adjusted_rand_index, assign_nearest, cluster_centroids, extract_clusters};
use crate::weights::WeightSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AriScore {
    pub index: usize,
    pub point: GridPoint,
    /// Row ARI on the validation matrix; `None` when the fit failed.
    pub ari: Option<f64>,
    pub n_selected: usize,
}

#[derive(Debug, Clone)]
pub struct AriOutcome {
    pub fits: Vec<GridFit>,
    pub scores: Vec<AriScore>,
    pub best: usize,
}

/// Row labels for `x_new` from a fit: nearest centroid among the fitted
/// row clusters.
pub fn extend_rows(a_hat: &DenseMatrix, x_new: &DenseMatrix, eps: f64) -> Vec<usize> {
    let clusters = extract_clusters(a_hat, eps);
    let centroids = cluster_centroids(a_hat, &clusters.row_labels);
    assign_nearest(x_new, &centroids)
}

/// Fits every grid point on `x_train` and scores each by the row ARI its
/// clusters achieve on `x_val` against `val_rows`. `x_val` must be on the
/// same scale as `x_train`. Ties go to the model retaining fewer features.
pub fn ari_tune(
    x_train: &DenseMatrix,
    weights: &WeightSet,
    x_val: &DenseMatrix,
    val_rows: &[usize],
    grid: &GridSpec,
    settings: &FitSettings,
) -> Result<AriOutcome, SelectError> {
    if x_val.cols() != x_train.cols() || x_val.rows() != val_rows.len() {
        return Err(SelectError::InvalidGrid(format!(
            "validation matrix {:?} does not match training {:?} with {} labels",
            x_val.shape(),
            x_train.shape(),
            val_rows.len()
        )));
    }
    let fits = grid_search(x_train, weights, grid, settings)?;
    let mut scores = Vec::with_capacity(fits.len());
    for f in &fits {
        let (ari, n_selected) = match f.report() {
            Some(r) => {
                let labels = extend_rows(&r.state.a, x_val, settings.eps);
                let mask = extract_clusters(&r.state.a, settings.eps);
                (Some(adjusted_rand_index(&labels, val_rows)?), mask.n_selected())
            }
            None => (None, 0),
        };
        scores.push(AriScore {
            index: f.index,
            point: f.point,
            ari,
            n_selected,
        });
    }
    let best = scores
        .iter()
        .filter(|s| s.ari.is_some())
        .fold(None::<&AriScore>, |best, s| match best {
            None => Some(s),
            Some(b) => {
                let (sa, ba) = (s.ari.unwrap(), b.ari.unwrap());
                if sa > ba || (sa == ba && s.n_selected < b.n_selected) {
                    Some(s)
                } else {
                    Some(b)
                }
            }
        })
        .map(|s| s.index)
        .ok_or(SelectError::NothingSelectable)?;
    Ok(AriOutcome { fits, scores, best })
}
