//! Test oracles shared by the integration tests: Kronecker algebra, a
//! dense linear solver and a textbook ADMM that keeps every edge.
#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spacobi::linalg::DenseMatrix;
use spacobi::weights::{Edge, WeightSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Symmetric positive definite with eigenvalues at least `floor`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> DenseMatrix {
    let b = random_matrix(rng, n, n);
    let mut s = b.t_matmul(&b).unwrap();
    for i in 0..n {
        s[(i, i)] += floor;
    }
    s
}

/// Kronecker product.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DenseMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Column-major vectorization.
pub fn vec_col(a: &DenseMatrix) -> Vec<f64> {
    let (r, c) = a.shape();
    (0..r * c).map(|k| a[(k % r, k / r)]).collect()
}

pub fn unvec_col(v: &[f64], rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |i, j| v[j * rows + i])
}

/// The permutation with `P·vec(A) = vec(Aᵀ)` for `A` of shape `rows × cols`.
pub fn commutation(rows: usize, cols: usize) -> DenseMatrix {
    let len = rows * cols;
    let mut p = DenseMatrix::zeros(len, len);
    for i in 0..rows {
        for j in 0..cols {
            // vec(A) index of A_ij is j*rows+i; vec(Aᵀ) index of (Aᵀ)_ji is i*cols+j
            p[(i * cols + j, j * rows + i)] = 1.0;
        }
    }
    p
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| m[r][col].abs().total_cmp(&m[s][col].abs()))
            .unwrap();
        m.swap(col, piv);
        x.swap(col, piv);
        let d = m[col][col];
        assert!(d.abs() > 1e-300, "singular system");
        for r in (col + 1)..n {
            let f = m[r][col] / d;
            if f != 0.0 {
                for c in col..n {
                    m[r][c] -= f * m[col][c];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for col in (0..n).rev() {
        let s: f64 = ((col + 1)..n).map(|c| m[col][c] * x[c]).sum();
        x[col] = (x[col] - s) / m[col][col];
    }
    x
}

/// Solves `M·A + A·N = H` through the vectorized system
/// `(I_p ⊗ M + Nᵀ ⊗ I_n)·vec(A) = vec(H)`.
pub fn vectorized_sylvester(m: &DenseMatrix, n: &DenseMatrix, h: &DenseMatrix) -> DenseMatrix {
    let (rows, cols) = h.shape();
    let lhs = kron(&DenseMatrix::identity(cols), m)
        .add(&kron(&n.transpose(), &DenseMatrix::identity(rows)))
        .unwrap();
    unvec_col(&dense_solve(&lhs, &vec_col(h)), rows, cols)
}

pub fn all_pairs(len: usize, mut weight: impl FnMut(usize, usize) -> f64) -> Vec<Edge> {
    let mut out = Vec::new();
    for i in 0..len {
        for j in (i + 1)..len {
            out.push(Edge { i, j, weight: weight(i, j) });
        }
    }
    out
}

/// Random weights with roughly `zero_frac` of the pairs switched off.
pub fn random_weights(rng: &mut ChaCha8Rng, n: usize, p: usize, zero_frac: f64) -> WeightSet {
    let mut draw = |_: usize, _: usize| {
        if rng.random::<f64>() < zero_frac {
            0.0
        } else {
            rng.random_range(0.1..1.0)
        }
    };
    let rows = all_pairs(n, &mut draw);
    let cols = all_pairs(p, &mut draw);
    let factors = (0..p).map(|_| rng.random_range(0.2..1.0)).collect();
    WeightSet::new(n, p, rows, cols, factors).unwrap()
}

pub fn soft_threshold(x: &[f64], s: f64) -> Vec<f64> {
    x.iter().map(|v| v.signum() * (v.abs() - s).max(0.0)).collect()
}

pub fn group_threshold(x: &[f64], s: f64) -> Vec<f64> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= s {
        vec![0.0; x.len()]
    } else {
        x.iter().map(|v| v * (1.0 - s / norm)).collect()
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// ADMM written directly from the augmented Lagrangian, storing every row
/// pair, column pair and feature explicitly and solving the centroid step
/// as one dense linear system.
pub struct ReferenceAdmm {
    pub x: DenseMatrix,
    pub a: DenseMatrix,
    row_edges: Vec<Edge>,
    col_edges: Vec<Edge>,
    factors: Vec<f64>,
    gammas: (f64, f64, f64),
    nu: (f64, f64, f64),
    l1_norm: bool,
    pub v: Vec<Vec<f64>>,
    pub l1: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
    pub l2: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub l3: Vec<Vec<f64>>,
}

impl ReferenceAdmm {
    pub fn new(
        x: &DenseMatrix,
        weights: &WeightSet,
        gammas: (f64, f64, f64),
        nu: (f64, f64, f64),
        l1_norm: bool,
    ) -> Self {
        let a = x.clone();
        let v: Vec<Vec<f64>> = weights.row_edges.iter().map(|e| sub(a.row(e.i), a.row(e.j))).collect();
        let z: Vec<Vec<f64>> = weights.col_edges.iter().map(|e| sub(&a.col(e.i), &a.col(e.j))).collect();
        let g: Vec<Vec<f64>> = (0..a.cols()).map(|j| a.col(j)).collect();
        Self {
            l1: v.iter().map(|s| vec![0.0; s.len()]).collect(),
            l2: z.iter().map(|s| vec![0.0; s.len()]).collect(),
            l3: g.iter().map(|s| vec![0.0; s.len()]).collect(),
            x: x.clone(),
            a,
            row_edges: weights.row_edges.clone(),
            col_edges: weights.col_edges.clone(),
            factors: weights.feature_factors.clone(),
            gammas,
            nu,
            l1_norm,
            v,
            z,
            g,
        }
    }

    fn prox(&self, x: &[f64], s: f64) -> Vec<f64> {
        if self.l1_norm {
            soft_threshold(x, s)
        } else {
            group_threshold(x, s)
        }
    }

    pub fn step(&mut self) {
        let (n, p) = self.x.shape();
        let (nu1, nu2, nu3) = self.nu;
        let (g1, g2, g3) = self.gammas;

        let mut m = DenseMatrix::identity(n);
        let mut nn = DenseMatrix::from_diag(&vec![nu3; p]);
        let mut h = self.x.clone();
        for (e, edge) in self.row_edges.iter().enumerate() {
            let (i, j) = (edge.i, edge.j);
            m[(i, i)] += nu1;
            m[(j, j)] += nu1;
            m[(i, j)] -= nu1;
            m[(j, i)] -= nu1;
            for k in 0..p {
                let t = self.l1[e][k] + nu1 * self.v[e][k];
                h[(i, k)] += t;
                h[(j, k)] -= t;
            }
        }
        for (e, edge) in self.col_edges.iter().enumerate() {
            let (i, j) = (edge.i, edge.j);
            nn[(i, i)] += nu2;
            nn[(j, j)] += nu2;
            nn[(i, j)] -= nu2;
            nn[(j, i)] -= nu2;
            for r in 0..n {
                let t = self.l2[e][r] + nu2 * self.z[e][r];
                h[(r, i)] += t;
                h[(r, j)] -= t;
            }
        }
        for j in 0..p {
            for r in 0..n {
                h[(r, j)] += self.l3[j][r] + nu3 * self.g[j][r];
            }
        }
        self.a = vectorized_sylvester(&m, &nn, &h);

        for (e, edge) in self.row_edges.iter().enumerate() {
            let d = sub(self.a.row(edge.i), self.a.row(edge.j));
            let arg: Vec<f64> = d.iter().zip(&self.l1[e]).map(|(d, l)| d - l / nu1).collect();
            self.v[e] = self.prox(&arg, g1 * edge.weight / nu1);
        }
        for (e, edge) in self.col_edges.iter().enumerate() {
            let d = sub(&self.a.col(edge.i), &self.a.col(edge.j));
            let arg: Vec<f64> = d.iter().zip(&self.l2[e]).map(|(d, l)| d - l / nu2).collect();
            self.z[e] = self.prox(&arg, g2 * edge.weight / nu2);
        }
        for j in 0..p {
            let aj = self.a.col(j);
            let arg: Vec<f64> = aj.iter().zip(&self.l3[j]).map(|(a, l)| a - l / nu3).collect();
            self.g[j] = group_threshold(&arg, g3 * self.factors[j] / nu3);
        }

        for (e, edge) in self.row_edges.iter().enumerate() {
            let d = sub(self.a.row(edge.i), self.a.row(edge.j));
            for k in 0..p {
                self.l1[e][k] += nu1 * (self.v[e][k] - d[k]);
            }
        }
        for (e, edge) in self.col_edges.iter().enumerate() {
            let d = sub(&self.a.col(edge.i), &self.a.col(edge.j));
            for r in 0..n {
                self.l2[e][r] += nu2 * (self.z[e][r] - d[r]);
            }
        }
        for j in 0..p {
            let aj = self.a.col(j);
            for r in 0..n {
                self.l3[j][r] += nu3 * (self.g[j][r] - aj[r]);
            }
        }
    }
}
