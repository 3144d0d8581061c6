//! Labelled data matrices and the scaling applied before fitting.

use serde::{Deserialize, Serialize};

use crate::linalg::{DenseMatrix, LinalgError};

/// An n×p observation-by-feature matrix with optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    pub values: DenseMatrix,
    pub row_names: Option<Vec<String>>,
    pub col_names: Option<Vec<String>>,
}

impl DataMatrix {
    pub fn new(values: DenseMatrix) -> Self {
        Self {
            values,
            row_names: None,
            col_names: None,
        }
    }

    pub fn with_col_names(mut self, names: Vec<String>) -> Result<Self, LinalgError> {
        if names.len() != self.values.cols() {
            return Err(LinalgError::DimensionMismatch {
                expected: (1, self.values.cols()),
                found: (1, names.len()),
            });
        }
        self.col_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn p(&self) -> usize {
        self.values.cols()
    }
}

impl From<DenseMatrix> for DataMatrix {
    fn from(values: DenseMatrix) -> Self {
        Self::new(values)
    }
}

/// How the matrix is rescaled before weights and fits are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scaling {
    None,
    /// Divide by the Frobenius norm.
    Unit,
    /// Subtract column means, then divide by the Frobenius norm.
    #[default]
    CenterUnit,
}

/// Affine map `x ↦ (x − m_j)/s` recorded so fitted centroids can be mapped
/// back to the input scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub scaling: Scaling,
    pub col_means: Vec<f64>,
    pub scale: f64,
}

impl Standardizer {
    pub fn fit(x: &DenseMatrix, scaling: Scaling) -> Self {
        let (n, p) = x.shape();
        let col_means = match scaling {
            Scaling::CenterUnit => {
                let mut m = vec![0.0; p];
                for i in 0..n {
                    for (a, v) in m.iter_mut().zip(x.row(i)) {
                        *a += v;
                    }
                }
                m.iter_mut().for_each(|a| *a /= n as f64);
                m
            }
            _ => vec![0.0; p],
        };
        let scale = match scaling {
            Scaling::None => 1.0,
            _ => {
                let mut ss = 0.0;
                for i in 0..n {
                    for (v, m) in x.row(i).iter().zip(&col_means) {
                        ss += (v - m) * (v - m);
                    }
                }
                let s = ss.sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            }
        };
        Self {
            scaling,
            col_means,
            scale,
        }
    }

    pub fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        if self.scaling == Scaling::None {
            return x.clone();
        }
        DenseMatrix::from_fn(x.rows(), x.cols(), |i, j| {
            (x[(i, j)] - self.col_means[j]) / self.scale
        })
    }

    pub fn invert(&self, a: &DenseMatrix) -> DenseMatrix {
        if self.scaling == Scaling::None {
            return a.clone();
        }
        DenseMatrix::from_fn(a.rows(), a.cols(), |i, j| {
            a[(i, j)] * self.scale + self.col_means[j]
        })
    }
}

/// Convenience: fit and apply in one go.
pub fn standardize(x: &DenseMatrix, scaling: Scaling) -> (DenseMatrix, Standardizer) {
    let st = Standardizer::fit(x, scaling);
    (st.apply(x), st)
}
