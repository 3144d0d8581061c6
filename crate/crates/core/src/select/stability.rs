use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tune::extend_rows;
use super::{clustering_distance, grid_search, FitSettings, GridPoint, GridSpec, SelectError};
use crate::linalg::DenseMatrix;
use crate::par::map_range;
use crate::weights::WeightSet;

pub const DEFAULT_BOOTSTRAPS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityScore {
    pub index: usize,
    pub point: GridPoint,
    /// Mean clustering distance over the usable bootstrap pairs.
    pub distance: Option<f64>,
    /// Pairs in which both fits succeeded.
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityOutcome {
    pub scores: Vec<StabilityScore>,
    pub best: usize,
}

/// Row indices of the two bootstrap samples in pair `b`.
pub fn bootstrap_pair(n: usize, seed: u64, b: usize) -> [Vec<usize>; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(b as u64);
    let mut draw = || (0..n).map(|_| rng.random_range(0..n)).collect::<Vec<_>>();
    let first = draw();
    [first, draw()]
}

fn resample(x: &DenseMatrix, rows: &[usize]) -> DenseMatrix {
    DenseMatrix::from_fn(rows.len(), x.cols(), |i, j| x[(rows[i], j)])
}

/// Chooses the grid point whose clusterings are most reproducible across
/// bootstrap resamples of the rows.
///
/// For each of `bootstraps` pairs, both samples are fitted over the whole
/// grid, each fit's row clusters are extended to every row of `x` by
/// nearest centroid, and the two labelings are compared with
/// [`clustering_distance`]. The smallest mean distance wins; ties go to
/// the smaller γ3, then the smaller fusion penalty.
pub fn stability_select(
    x: &DenseMatrix,
    grid: &GridSpec,
    settings: &FitSettings,
    bootstraps: usize,
    seed: u64,
) -> Result<StabilityOutcome, SelectError> {
    if bootstraps == 0 {
        return Err(SelectError::NoBootstraps);
    }
    grid.validate()?;
    let n = x.rows();
    let points = grid.points();

    // one job per bootstrap sample; labels per grid point
    let jobs = map_range(settings.execution, 2 * bootstraps, |job| {
        let rows = &bootstrap_pair(n, seed, job / 2)[job % 2];
        let xb = resample(x, rows);
        let weights = WeightSet::from_data(&xb, settings.neighbors, settings.phi, settings.execution)?;
        let fits = grid_search(&xb, &weights, grid, settings)?;
        Ok::<_, SelectError>(
            fits.into_iter()
                .map(|f| f.report().map(|r| extend_rows(&r.state.a, x, settings.eps)))
                .collect::<Vec<_>>(),
        )
    });
    let jobs = jobs.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut scores = Vec::with_capacity(points.len());
    for (index, point) in points.into_iter().enumerate() {
        let mut total = 0.0;
        let mut pairs = 0;
        for b in 0..bootstraps {
            if let (Some(l1), Some(l2)) = (&jobs[2 * b][index], &jobs[2 * b + 1][index]) {
                total += clustering_distance(l1, l2)?;
                pairs += 1;
            }
        }
        scores.push(StabilityScore {
            index,
            point,
            distance: (pairs > 0).then(|| total / pairs as f64),
            pairs,
        });
    }

    let best = scores
        .iter()
        .filter_map(|s| s.distance.map(|d| (d, s)))
        .min_by(|(da, a), (db, b)| {
            da.total_cmp(db)
                .then(a.point.gamma3.total_cmp(&b.point.gamma3))
                .then(a.point.fusion_strength().total_cmp(&b.point.fusion_strength()))
        })
        .map(|(_, s)| s.index)
        .ok_or(SelectError::NothingSelectable)?;
    Ok(StabilityOutcome { scores, best })
}
