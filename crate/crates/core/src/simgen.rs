//! Checkerboard simulations with informative and noise features.
//!
//! Rows are split into `K` classes and the first `p_true` columns into `R`
//! classes; entry `(i, j)` of the informative block is `N(μ_kr, σ²)` with a
//! mean table drawn once per replicate. The remaining columns are pure
//! `N(0, noise_variance)`. Generation uses ChaCha8 seeded from
//! `SimSpec::seed`, so a seed reproduces the matrix bit for bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::DenseMatrix;

/// Give up after this many draws that leave a class empty.
const MAX_RESAMPLES: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation spec: {0}")]
    BadSpec(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub n: usize,
    pub p: usize,
    pub p_true: usize,
    pub k: usize,
    pub r: usize,
    pub mean_grid: Vec<i64>,
    /// Standard deviation of informative entries.
    pub sigma: f64,
    pub noise_variance: f64,
    pub seed: u64,
}

impl Default for SimSpec {
    fn default() -> Self {
        Self {
            n: 60,
            p: 200,
            p_true: 40,
            k: 4,
            r: 4,
            mean_grid: (-10..=10).collect(),
            sigma: 3.0,
            noise_variance: 9.0,
            seed: 0,
        }
    }
}

impl SimSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::BadSpec(msg));
        if self.p_true > self.p {
            return bad(format!("p_true {} exceeds p {}", self.p_true, self.p));
        }
        if self.k == 0 || self.k > self.n {
            return bad(format!("K = {} with n = {}", self.k, self.n));
        }
        if self.r == 0 || self.r > self.p_true {
            return bad(format!("R = {} with p_true = {}", self.r, self.p_true));
        }
        if self.mean_grid.is_empty() {
            return bad("empty mean grid".into());
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return bad(format!("sigma = {}", self.sigma));
        }
        if !(self.noise_variance.is_finite() && self.noise_variance > 0.0) {
            return bad(format!("noise_variance = {}", self.noise_variance));
        }
        Ok(())
    }

    /// The spec for replicate `r`: same parameters, seed `seed + r`.
    pub fn replicate(&self, r: u64) -> Self {
        Self {
            seed: self.seed.wrapping_add(r),
            ..self.clone()
        }
    }
}

/// Class structure shared by a training and a validation draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub row_labels: Vec<usize>,
    /// Labels of the informative columns only.
    pub col_labels: Vec<usize>,
    pub informative: Vec<bool>,
    /// `K × R` mean table, row-major.
    pub means: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulated {
    pub x: DenseMatrix,
    pub truth: Truth,
}

fn labels_covering(rng: &mut ChaCha8Rng, len: usize, classes: usize) -> Result<Vec<usize>, SimError> {
    for _ in 0..MAX_RESAMPLES {
        let labels: Vec<usize> = (0..len).map(|_| rng.random_range(0..classes)).collect();
        let mut seen = vec![false; classes];
        labels.iter().for_each(|&l| seen[l] = true);
        if seen.iter().all(|s| *s) {
            return Ok(labels);
        }
    }
    Err(SimError::BadSpec(format!(
        "could not realize {classes} nonempty classes over {len} items"
    )))
}

fn draw_truth(spec: &SimSpec, rng: &mut ChaCha8Rng) -> Result<Truth, SimError> {
    let row_labels = labels_covering(rng, spec.n, spec.k)?;
    let col_labels = labels_covering(rng, spec.p_true, spec.r)?;
    let means = (0..spec.k * spec.r)
        .map(|_| spec.mean_grid[rng.random_range(0..spec.mean_grid.len())] as f64)
        .collect();
    let informative = (0..spec.p).map(|j| j < spec.p_true).collect();
    Ok(Truth {
        row_labels,
        col_labels,
        informative,
        means,
    })
}

fn draw_matrix(spec: &SimSpec, truth: &Truth, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let signal = Normal::new(0.0, spec.sigma).expect("sigma validated");
    let noise = Normal::new(0.0, spec.noise_variance.sqrt()).expect("variance validated");
    DenseMatrix::from_fn(spec.n, spec.p, |i, j| {
        if j < spec.p_true {
            let mu = truth.means[truth.row_labels[i] * spec.r + truth.col_labels[j]];
            mu + signal.sample(rng)
        } else {
            noise.sample(rng)
        }
    })
}

/// One checkerboard replicate.
pub fn generate(spec: &SimSpec) -> Result<Simulated, SimError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let truth = draw_truth(spec, &mut rng)?;
    let x = draw_matrix(spec, &truth, &mut rng);
    Ok(Simulated { x, truth })
}

/// Training and validation matrices drawn from one truth with independent
/// noise. The training matrix equals `generate(spec).x`.
pub fn generate_pair(spec: &SimSpec) -> Result<(DenseMatrix, DenseMatrix, Truth), SimError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let truth = draw_truth(spec, &mut rng)?;
    let train = draw_matrix(spec, &truth, &mut rng);
    let val = draw_matrix(spec, &truth, &mut rng);
    Ok((train, val, truth))
}
