//! The three-block DOF partition and the matrix-free operators built on it:
//! the surface response `A`, its transpose, and the symmetric variational
//! operator `B₁₃ A`.
//!
//! ```bash
//! cargo run --release --example block_operators
//! ```

use reservoir_inversion::inverse::random_wall_vector;
use reservoir_inversion::synthetic::{Benchmark, BenchmarkSpec};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bench = Benchmark::build(&BenchmarkSpec::parse(include_str!("../../../specs/tiny.cfg"))?)?;
    let ops = bench.operators::<f64>()?;
    let p = ops.partition();
    let (chol_nnz, dense_nnz) = ops.factor_nnz();
    println!("Λ₁ {} / Λ₂ {} / Λ₃ {}; Cholesky factors hold {chol_nnz} + {dense_nnz} entries", p.n1(), p.n2(), p.n3());

    let g = random_wall_vector(p.n1(), 1);
    let h = random_wall_vector(p.n1(), 2);
    let w = random_wall_vector(p.n3(), 3);

    // ⟨A g, w⟩ = ⟨g, Aᵀ w⟩
    let lhs = dot(&ops.apply_forward(&g), &w);
    let rhs = dot(&g, &ops.apply_forward_transpose(&w));
    println!("adjoint identity: {lhs:.12e} vs {rhs:.12e}");

    // ⟨M g, h⟩ = ⟨g, M h⟩
    let mg = ops.apply_variational_operator(&g);
    let mh = ops.apply_variational_operator(&h);
    println!("variational operator symmetry: {:.12e} vs {:.12e}", dot(&mg, &h), dot(&g, &mh));
    println!("energy of the response ‖A g‖² in the extension norm: {:.6e}", ops.h_half_norm_sq(&ops.apply_forward(&g)));
    Ok(())
}
