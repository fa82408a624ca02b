//! Shared fixtures and dense oracles for the integration tests.
#![allow(dead_code)]

pub mod fem;
pub mod rational;

use nalgebra::DMatrix;
use reservoir_inversion::elasticity::SparseSymmetricMatrix;
use reservoir_inversion::scalar::{vecops, Scalar};
use reservoir_inversion::synthetic::{Benchmark, BenchmarkSpec};

pub const TINY: &str = include_str!("../../../../specs/tiny.cfg");
pub const UNDERDETERMINED: &str = include_str!("../../../../specs/underdetermined.cfg");

pub fn tiny() -> Benchmark {
    Benchmark::build(&BenchmarkSpec::parse(TINY).unwrap()).unwrap()
}

pub fn underdetermined() -> Benchmark {
    Benchmark::build(&BenchmarkSpec::parse(UNDERDETERMINED).unwrap()).unwrap()
}

pub fn dense(k: &SparseSymmetricMatrix) -> DMatrix<f64> {
    let rows = k.to_dense();
    DMatrix::from_fn(k.dim(), k.dim(), |i, j| rows[i][j])
}

/// Dense matrix of a linear map, one unit vector at a time.
pub fn matrix_of(rows: usize, cols: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    let mut e = vec![0.0; cols];
    for j in 0..cols {
        e[j] = 1.0;
        let c = f(&e);
        assert_eq!(c.len(), rows);
        for i in 0..rows {
            m[(i, j)] = c[i];
        }
        e[j] = 0.0;
    }
    m
}

/// Largest column-norm difference over the largest column norm of `reference`.
pub fn rel_col_err(got: &DMatrix<f64>, reference: &DMatrix<f64>) -> f64 {
    assert_eq!(got.shape(), reference.shape());
    let diff = (got - reference).column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let scale = reference.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    diff / scale
}

pub fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// The block operators built densely from `K` and its partition.
pub struct DenseBlocks {
    pub a: DMatrix<f64>,
    pub b13: DMatrix<f64>,
    pub s33: DMatrix<f64>,
    pub m: DMatrix<f64>,
}

impl DenseBlocks {
    pub fn new(bench: &Benchmark) -> Self {
        let k = dense(&bench.stiffness);
        let p = &bench.partition;
        let interior: Vec<usize> = p.lambda1.iter().chain(&p.lambda2).copied().collect();
        let kinv = k.clone().cholesky().expect("clamped stiffness is SPD").inverse();
        let a = submatrix(&kinv, &p.lambda3, &p.lambda1);
        let kii = submatrix(&k, &interior, &interior);
        let ki3 = submatrix(&k, &interior, &p.lambda3);
        let k33 = submatrix(&k, &p.lambda3, &p.lambda3);
        let x = kii.cholesky().expect("interior block is SPD").solve(&ki3);
        let b13 = -x.rows(0, p.n1()).into_owned();
        let s33 = &k33 - ki3.transpose() * &x;
        let s33inv = s33.clone().cholesky().expect("Schur complement is SPD").inverse();
        let m = &b13 * s33inv * b13.transpose();
        DenseBlocks { a, b13, s33, m }
    }
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Singular values (decreasing) by one-sided Jacobi on the columns, in the
/// scalar's own arithmetic. Converges to full relative accuracy of `S`.
pub fn jacobi_singular_values<S: Scalar>(mut cols: Vec<Vec<S>>) -> Vec<S> {
    let n = cols.len();
    let tol = S::from_f64(8.0 * S::EPSILON);
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = vecops::dot(&cols[i], &cols[i]);
                let beta = vecops::dot(&cols[j], &cols[j]);
                let gamma = vecops::dot(&cols[i], &cols[j]);
                if gamma == S::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (S::from_f64(2.0) * gamma);
                let sign = if zeta < S::zero() { -S::one() } else { S::one() };
                let t = sign / (zeta.abs() + (S::one() + zeta * zeta).sqrt());
                let c = S::one() / (S::one() + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(j);
                for (x, y) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = c * a - s * b;
                    *y = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<S> = cols.iter().map(|c| vecops::norm(c)).collect();
    s.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    s
}

/// Columns of a linear map applied to unit vectors, in any scalar.
pub fn columns_of<S: Scalar>(cols: usize, f: impl Fn(&[S]) -> Vec<S>) -> Vec<Vec<S>> {
    (0..cols)
        .map(|j| {
            let mut e = vec![S::zero(); cols];
            e[j] = S::one();
            f(&e)
        })
        .collect()
}

/// `AᵀA` from the columns of `A`.
pub fn gram<S: Scalar>(cols: &[Vec<S>]) -> Vec<Vec<S>> {
    cols.iter().map(|ci| cols.iter().map(|cj| vecops::dot(cj, ci)).collect()).collect()
}
