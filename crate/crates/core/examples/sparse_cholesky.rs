//! Factor the clamped stiffness matrix with the fill-reducing ordering and
//! compare the solve in both precisions.
//!
//! ```bash
//! cargo run --release --example sparse_cholesky
//! ```

use std::time::Instant;

use reservoir_inversion::scalar::{vecops, Scalar};
use reservoir_inversion::solvers::SparseCholesky;
use reservoir_inversion::synthetic::{Benchmark, BenchmarkSpec};
use reservoir_inversion::DoubleDouble;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bench = Benchmark::build(&BenchmarkSpec::parse(include_str!("../../../specs/underdetermined.cfg"))?)?;
    let k = &bench.stiffness;
    println!("stiffness: {} unknowns, {} stored entries", k.dim(), k.nnz());

    let b: Vec<f64> = (0..k.dim()).map(|i| ((i * 37) % 101) as f64 / 101.0 - 0.5).collect();
    let t = Instant::now();
    let chol = SparseCholesky::<f64>::factor(k)?;
    println!("double factor: {} entries in L, {:.2?}", chol.nnz(), t.elapsed());
    let x = chol.solve(&b);
    let r = vecops::sub(&k.matvec(&x), &b);
    println!("double residual {:.2e}", vecops::norm_f64(&r) / vecops::norm_f64(&b));

    let t = Instant::now();
    let chol = SparseCholesky::<DoubleDouble>::factor(k)?;
    println!("double-double factor: {:.2?}", t.elapsed());
    let bd: Vec<DoubleDouble> = vecops::promote(&b);
    let x = chol.solve(&bd);
    let r = vecops::sub(&k.matvec(&x), &bd);
    println!("double-double residual {:.2e}", (vecops::norm(&r) / vecops::norm(&bd)).to_f64());
    Ok(())
}
