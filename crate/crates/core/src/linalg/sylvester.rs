use serde::{Deserialize, Serialize};

use super::{eig_symmetric, DenseMatrix, LinalgError, SymmetricEigen};

/// Smallest admissible `min λ(M) + min μ(N)`.
pub const SINGULAR_PAIR_THRESHOLD: f64 = 1e-12;

/// Augmented-Lagrangian step sizes for the row, column and sparsity blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSizes {
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
}

impl Default for StepSizes {
    fn default() -> Self {
        Self {
            nu1: 1.0,
            nu2: 1.0,
            nu3: 1.0,
        }
    }
}

impl StepSizes {
    pub fn validate(&self) -> Result<(), LinalgError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.nu1) {
            return Err(LinalgError::BadStepSize {
                name: "nu1",
                value: self.nu1,
            });
        }
        if !ok(self.nu2) {
            return Err(LinalgError::BadStepSize {
                name: "nu2",
                value: self.nu2,
            });
        }
        if !(self.nu3.is_finite() && self.nu3 >= 0.0) {
            return Err(LinalgError::BadStepSize {
                name: "nu3",
                value: self.nu3,
            });
        }
        Ok(())
    }
}

/// The complete-graph system matrices
/// `M = (1 + nν1)Iₙ − ν1·11ᵀ` and `N = pν2·Iₚ − ν2·11ᵀ + ν3·Iₚ`.
pub fn build_mn(
    n: usize,
    p: usize,
    nu: StepSizes,
) -> Result<(DenseMatrix, DenseMatrix), LinalgError> {
    for d in [n, p] {
        if d < 2 {
            return Err(LinalgError::BadDimension(d));
        }
    }
    nu.validate()?;
    let m = DenseMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { 1.0 + n as f64 * nu.nu1 } else { 0.0 };
        diag - nu.nu1
    });
    let big_n = DenseMatrix::from_fn(p, p, |i, j| {
        let diag = if i == j { p as f64 * nu.nu2 + nu.nu3 } else { 0.0 };
        diag - nu.nu2
    });
    Ok((m, big_n))
}

/// A prepared solver for `M·A + A·N = H` with fixed `M` and `N`.
pub trait SylvesterSolve {
    fn shape(&self) -> (usize, usize);
    fn solve(&self, h: &DenseMatrix) -> Result<DenseMatrix, LinalgError>;
}

/// General path: diagonalize both symmetric coefficients once and divide
/// entrywise in the joint eigenbasis.
#[derive(Debug, Clone)]
pub struct SpectralSylvester {
    left: SymmetricEigen,
    right: SymmetricEigen,
}

impl SpectralSylvester {
    pub fn new(m: &DenseMatrix, n: &DenseMatrix) -> Result<Self, LinalgError> {
        let left = eig_symmetric(m)?;
        let right = eig_symmetric(n)?;
        let min_sum = left.eigenvalues[0] + right.eigenvalues[0];
        if min_sum.abs() <= SINGULAR_PAIR_THRESHOLD || !min_sum.is_finite() {
            return Err(LinalgError::SingularPair(min_sum));
        }
        // indefinite inputs can still hit a zero pair away from the minima
        for &l in &left.eigenvalues {
            for &mu in &right.eigenvalues {
                if (l + mu).abs() <= SINGULAR_PAIR_THRESHOLD {
                    return Err(LinalgError::SingularPair(l + mu));
                }
            }
        }
        Ok(Self { left, right })
    }
}

impl SylvesterSolve for SpectralSylvester {
    fn shape(&self) -> (usize, usize) {
        (self.left.eigenvalues.len(), self.right.eigenvalues.len())
    }

    fn solve(&self, h: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        let shape = self.shape();
        if h.shape() != shape {
            return Err(LinalgError::DimensionMismatch {
                expected: shape,
                found: h.shape(),
            });
        }
        let t = &self.left.eigenvectors;
        let s = &self.right.eigenvectors;
        // C̃ = Tᵀ H S
        let mut c = t.t_matmul(h)?.matmul(s)?;
        for i in 0..shape.0 {
            let li = self.left.eigenvalues[i];
            for (v, &mu) in c.row_mut(i).iter_mut().zip(&self.right.eigenvalues) {
                *v /= li + mu;
            }
        }
        // A = T Ã Sᵀ
        t.matmul(&c)?.matmul_t(s)
    }
}

/// Fast path for the matrices returned by [`build_mn`].
///
/// Any orthonormal basis containing `1/√n` diagonalizes `M` (eigenvalue 1 on
/// the ones direction, `1 + nν1` on its complement) and likewise for `N`
/// (`ν3` and `pν2 + ν3`). Splitting `H` into its grand-mean, row-mean,
/// column-mean and doubly-centred parts applies that basis in `O(np)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompleteGraphSylvester {
    n: usize,
    p: usize,
    m_ones: f64,
    m_rest: f64,
    n_ones: f64,
    n_rest: f64,
}

impl CompleteGraphSylvester {
    pub fn new(n: usize, p: usize, nu: StepSizes) -> Result<Self, LinalgError> {
        for d in [n, p] {
            if d < 2 {
                return Err(LinalgError::BadDimension(d));
            }
        }
        nu.validate()?;
        let solver = Self {
            n,
            p,
            m_ones: 1.0,
            m_rest: 1.0 + n as f64 * nu.nu1,
            n_ones: nu.nu3,
            n_rest: p as f64 * nu.nu2 + nu.nu3,
        };
        let min_sum = solver.m_ones + solver.n_ones;
        if min_sum <= SINGULAR_PAIR_THRESHOLD {
            return Err(LinalgError::SingularPair(min_sum));
        }
        Ok(solver)
    }
}

impl SylvesterSolve for CompleteGraphSylvester {
    fn shape(&self) -> (usize, usize) {
        (self.n, self.p)
    }

    fn solve(&self, h: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        let (n, p) = (self.n, self.p);
        if h.shape() != (n, p) {
            return Err(LinalgError::DimensionMismatch {
                expected: (n, p),
                found: h.shape(),
            });
        }
        let mut row_mean = vec![0.0; n];
        let mut col_mean = vec![0.0; p];
        for (i, rm) in row_mean.iter_mut().enumerate() {
            let row = h.row(i);
            *rm = row.iter().sum::<f64>() / p as f64;
            for (c, v) in col_mean.iter_mut().zip(row) {
                *c += v;
            }
        }
        col_mean.iter_mut().for_each(|c| *c /= n as f64);
        let grand = row_mean.iter().sum::<f64>() / n as f64;

        let d_oo = 1.0 / (self.m_ones + self.n_ones);
        let d_or = 1.0 / (self.m_ones + self.n_rest);
        let d_ro = 1.0 / (self.m_rest + self.n_ones);
        let d_rr = 1.0 / (self.m_rest + self.n_rest);

        let mut out = DenseMatrix::zeros(n, p);
        for i in 0..n {
            let ri = row_mean[i] - grand;
            let base = grand * d_oo + ri * d_ro;
            let h_row = h.row(i);
            for ((o, &hv), &cm) in out.row_mut(i).iter_mut().zip(h_row).zip(&col_mean) {
                let cj = cm - grand;
                let centred = hv - row_mean[i] - cm + grand;
                *o = base + cj * d_or + centred * d_rr;
            }
        }
        Ok(out)
    }
}

/// One-shot spectral solve of `M·A + A·N = H`.
pub fn solve_sylvester(
    m: &DenseMatrix,
    n: &DenseMatrix,
    h: &DenseMatrix,
) -> Result<DenseMatrix, LinalgError> {
    if h.rows() != m.rows() || h.cols() != n.rows() {
        return Err(LinalgError::DimensionMismatch {
            expected: (m.rows(), n.rows()),
            found: h.shape(),
        });
    }
    SpectralSylvester::new(m, n)?.solve(h)
}
