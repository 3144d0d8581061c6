mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use spacobi::linalg::{
    build_mn, eig_symmetric, solve_sylvester, CompleteGraphSylvester, DenseMatrix, SpectralSylvester, StepSizes,
    SylvesterSolve,
};

fn rel_err(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm().max(1e-300)
}

#[test]
fn spectral_solve_matches_vectorized_system() {
    let mut rng = rng(11);
    for _ in 0..100 {
        let n = rng.random_range(1..=6);
        let p = rng.random_range(1..=6);
        let m = random_spd(&mut rng, n, 0.5);
        // PSD: a Gram matrix of rank < p when possible
        let k = rng.random_range(1..=p);
        let b = random_matrix(&mut rng, k, p);
        let big_n = b.t_matmul(&b).unwrap();
        let h = random_matrix(&mut rng, n, p);
        let a = solve_sylvester(&m, &big_n, &h).unwrap();
        let oracle = vectorized_sylvester(&m, &big_n, &h);
        assert!(rel_err(&a, &oracle) <= 1e-8);
        let resid = m.matmul(&a).unwrap().add(&a.matmul(&big_n).unwrap()).unwrap().sub(&h).unwrap();
        assert!(resid.frobenius_norm() <= 1e-8 * h.frobenius_norm().max(1.0));
    }
}

#[test]
fn fast_path_matches_vectorized_system() {
    let mut rng = rng(12);
    for _ in 0..40 {
        let n = rng.random_range(2..=6);
        let p = rng.random_range(2..=6);
        let nu = StepSizes {
            nu1: rng.random_range(0.1..3.0),
            nu2: rng.random_range(0.1..3.0),
            nu3: rng.random_range(0.0..3.0),
        };
        let (m, big_n) = build_mn(n, p, nu).unwrap();
        let h = random_matrix(&mut rng, n, p);
        let fast = CompleteGraphSylvester::new(n, p, nu).unwrap().solve(&h).unwrap();
        let general = SpectralSylvester::new(&m, &big_n).unwrap().solve(&h).unwrap();
        let oracle = vectorized_sylvester(&m, &big_n, &h);
        assert!(rel_err(&fast, &oracle) <= 1e-8);
        assert!(rel_err(&fast, &general) <= 1e-10);
    }
}

#[test]
fn build_mn_spectrum() {
    let (m, _) = build_mn(4, 2, StepSizes { nu1: 0.5, nu2: 1.0, nu3: 1.0 }).unwrap();
    let eig = eig_symmetric(&m).unwrap();
    let want = [1.0, 3.0, 3.0, 3.0];
    for (got, want) in eig.eigenvalues.iter().zip(want) {
        assert!((got - want).abs() < 1e-12);
    }
    let (_, n) = build_mn(3, 5, StepSizes { nu1: 1.0, nu2: 0.7, nu3: 0.2 }).unwrap();
    let eig = eig_symmetric(&n).unwrap();
    assert!((eig.eigenvalues[0] - 0.2).abs() < 1e-12);
    for &mu in &eig.eigenvalues[1..] {
        assert!((mu - (5.0 * 0.7 + 0.2)).abs() < 1e-12);
    }
}

fn unit(len: usize, k: usize) -> DenseMatrix {
    DenseMatrix::from_fn(len, 1, |i, _| f64::from(u8::from(i == k)))
}

fn diff(len: usize, i: usize, j: usize) -> DenseMatrix {
    unit(len, i).sub(&unit(len, j)).unwrap()
}

/// Stacks blocks vertically.
fn vstack(blocks: &[DenseMatrix]) -> DenseMatrix {
    let rows: Vec<Vec<f64>> = blocks
        .iter()
        .flat_map(|b| (0..b.rows()).map(move |i| b.row(i).to_vec()))
        .collect();
    DenseMatrix::from_rows(&rows).unwrap()
}

#[test]
fn stationary_system_equals_kronecker_sylvester_form() {
    for (n, p) in [(2, 2), (3, 2), (2, 4), (4, 3)] {
        let nu = StepSizes { nu1: 0.7, nu2: 1.3, nu3: 0.4 };
        let big_p = commutation(n, p);
        let mut b = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                b.push(kron(&diff(n, i, j).transpose(), &DenseMatrix::identity(p)));
            }
        }
        let mut c = Vec::new();
        for i in 0..p {
            for j in (i + 1)..p {
                c.push(kron(&diff(p, i, j).transpose(), &DenseMatrix::identity(n)));
            }
        }
        let d: Vec<DenseMatrix> = (0..p)
            .map(|j| kron(&unit(p, j).transpose(), &DenseMatrix::identity(n)))
            .collect();
        let (b, c, d) = (vstack(&b), vstack(&c), vstack(&d));

        let bp = b.matmul(&big_p).unwrap();
        let lhs = DenseMatrix::identity(n * p)
            .add(&bp.t_matmul(&bp).unwrap().scale(nu.nu1))
            .unwrap()
            .add(&c.t_matmul(&c).unwrap().scale(nu.nu2))
            .unwrap()
            .add(&d.t_matmul(&d).unwrap().scale(nu.nu3))
            .unwrap();
        let (m, big_n) = build_mn(n, p, nu).unwrap();
        let rhs = kron(&DenseMatrix::identity(p), &m)
            .add(&kron(&big_n, &DenseMatrix::identity(n)))
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12, "n={n} p={p}");

        // the operators act on vec(A) as the row/column differences they name
        let mut rng = rng(3);
        let a = random_matrix(&mut rng, n, p);
        let va = vec_col(&a);
        let vat = big_p.matmul(&DenseMatrix::from_vec(n * p, 1, va.clone()).unwrap()).unwrap();
        assert_eq!(vat.as_slice(), vec_col(&a.transpose()).as_slice());
        let first_row_diff = kron(&diff(n, 0, 1).transpose(), &DenseMatrix::identity(p))
            .matmul(&vat)
            .unwrap();
        for k in 0..p {
            assert!((first_row_diff[(k, 0)] - (a[(0, k)] - a[(1, k)])).abs() < 1e-15);
        }
    }
}

#[test]
fn commutation_identities() {
    let mut rng = rng(5);
    for n in 1..=5 {
        for p in 1..=5 {
            let big_p = commutation(n, p);
            assert_eq!(big_p.transpose().matmul(&big_p).unwrap(), DenseMatrix::identity(n * p));
            for _ in 0..10 {
                let d = random_matrix(&mut rng, n, 1);
                let lhs = kron(&d.transpose(), &DenseMatrix::identity(p)).matmul(&big_p).unwrap();
                let rhs = kron(&DenseMatrix::identity(p), &d.transpose());
                assert_eq!(lhs, rhs);
                let ddt = d.matmul_t(&d).unwrap();
                let lhs2 = big_p
                    .t_matmul(&kron(&ddt, &DenseMatrix::identity(p)).matmul(&big_p).unwrap())
                    .unwrap();
                let rhs2 = kron(&DenseMatrix::identity(p), &ddt);
                assert!(lhs2.sub(&rhs2).unwrap().max_abs() < 1e-14);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sylvester_residual_is_small(seed in 0u64..100_000, n in 1usize..6, p in 1usize..6) {
        let mut rng = rng(seed);
        let m = random_spd(&mut rng, n, 0.1);
        let big_n = random_spd(&mut rng, p, 0.0);
        let h = random_matrix(&mut rng, n, p);
        let a = solve_sylvester(&m, &big_n, &h).unwrap();
        let r = m.matmul(&a).unwrap().add(&a.matmul(&big_n).unwrap()).unwrap().sub(&h).unwrap();
        prop_assert!(r.frobenius_norm() <= 1e-8 * h.frobenius_norm().max(1.0));
    }

    #[test]
    fn eigen_reconstruction_and_orthogonality(seed in 0u64..100_000, n in 1usize..8) {
        let mut rng = rng(seed);
        let b = random_matrix(&mut rng, n, n);
        let s = b.add(&b.transpose()).unwrap();
        let eig = eig_symmetric(&s).unwrap();
        let q = &eig.eigenvectors;
        prop_assert!(eig.reconstruct().sub(&s).unwrap().frobenius_norm() <= 1e-10 * s.frobenius_norm().max(1.0));
        prop_assert!(q.t_matmul(q).unwrap().sub(&DenseMatrix::identity(n)).unwrap().frobenius_norm() <= 1e-10);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }
}
