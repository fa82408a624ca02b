//! Scalar-generic linear solvers: sparse Cholesky for the elasticity systems,
//! unrestarted GMRES and CG on the normal equations for the inversion.

mod cgne;
mod cholesky;
mod gmres;

use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

use crate::scalar::{vecops, Scalar};

pub use cgne::cg_normal;
pub use cholesky::SparseCholesky;
pub use gmres::{gmres, GmresOptions};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("matrix is not positive definite: pivot for index {pivot} is {value:e}")]
    NotSpd { pivot: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid solver argument: {0}")]
    InvalidArgument(String),
    #[error("fill-reducing ordering failed: {0}")]
    Ordering(String),
}

/// A square linear map applied matrix-free.
pub trait LinearOperator<S: Scalar> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[S]) -> Vec<S>;

    /// True residual `b - A x`. Operators that can produce it more cheaply,
    /// or want to record side information per iterate, override this.
    fn residual(&self, x: &[S], b: &[S]) -> Vec<S> {
        vecops::sub(b, &self.apply(x))
    }
}

/// A rectangular map together with its transpose, for the normal equations.
pub trait AdjointPair<S: Scalar> {
    /// Dimension of the unknown.
    fn cols(&self) -> usize;
    /// Dimension of the data.
    fn rows(&self) -> usize;
    fn forward(&self, x: &[S]) -> Vec<S>;
    fn transpose(&self, y: &[S]) -> Vec<S>;

    /// True normal-equation residual `Aᵀ(b - A x)`.
    fn normal_residual(&self, x: &[S], b: &[S]) -> Vec<S> {
        self.transpose(&vecops::sub(b, &self.forward(x)))
    }
}

/// How an iteration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Tolerance,
    MaxIterations,
    /// The Krylov space became invariant; the iterate is the exact
    /// minimizer over the whole reachable space.
    HappyBreakdown,
    /// The basis spans the whole space. Exact arithmetic would have solved
    /// the system; in floating point the iterate may still be far off.
    KrylovExhausted,
    /// A zero curvature or an unusable recurrence stopped the iteration.
    Breakdown,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Tolerance => "tolerance",
            Termination::MaxIterations => "max-iterations",
            Termination::HappyBreakdown => "happy-breakdown",
            Termination::KrylovExhausted => "krylov-exhausted",
            Termination::Breakdown => "breakdown",
        })
    }
}

/// State handed to an iteration monitor after every step, iteration 0
/// being the zero initial guess.
#[derive(Debug)]
pub struct Iterate<'a, S> {
    pub iter: usize,
    pub x: &'a [S],
    /// True residual norm relative to the initial one.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Relative true residuals, `iterations + 1` entries starting at 1.
    /// A zero right-hand side gives the single entry 0.
    pub residuals: Vec<f64>,
    pub termination: Termination,
    /// Largest `|⟨v_i, v_j⟩|` seen between Krylov basis vectors (GMRES only).
    pub orthogonality_loss: f64,
    /// Set once the loss exceeded the configured threshold.
    pub orthogonality_flagged: bool,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("report always has an initial residual")
    }

    /// Writes `iter,residual` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "iter,residual")?;
        for (i, r) in self.residuals.iter().enumerate() {
            writeln!(w, "{i},{r:e}")?;
        }
        Ok(())
    }
}

/// Dense matrix as an operator; handy for tests and small studies.
#[derive(Debug, Clone)]
pub struct DenseOperator<S> {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries.
    pub data: Vec<S>,
}

impl<S: Scalar> DenseOperator<S> {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let data = rows.iter().flat_map(|r| r.iter().map(|&v| S::from_f64(v))).collect();
        DenseOperator { rows: rows.len(), cols, data }
    }

    fn mul(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| vecops::dot(&self.data[i * self.cols..(i + 1) * self.cols], x)).collect()
    }

    fn mul_t(&self, y: &[S]) -> Vec<S> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![S::zero(); self.cols];
        for (i, &yi) in y.iter().enumerate() {
            vecops::axpy(yi, &self.data[i * self.cols..(i + 1) * self.cols], &mut out);
        }
        out
    }
}

impl<S: Scalar> LinearOperator<S> for DenseOperator<S> {
    fn dim(&self) -> usize {
        self.rows
    }
    fn apply(&self, x: &[S]) -> Vec<S> {
        self.mul(x)
    }
}

impl<S: Scalar> AdjointPair<S> for DenseOperator<S> {
    fn cols(&self) -> usize {
        self.cols
    }
    fn rows(&self) -> usize {
        self.rows
    }
    fn forward(&self, x: &[S]) -> Vec<S> {
        self.mul(x)
    }
    fn transpose(&self, y: &[S]) -> Vec<S> {
        self.mul_t(y)
    }
}
