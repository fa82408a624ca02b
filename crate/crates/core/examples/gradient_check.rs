//! Check the adjoint gradient of the cost against central finite differences
//! along seeded random directions.
//!
//! ```bash
//! cargo run --release --example gradient_check
//! ```

use reservoir_inversion::inverse::{check_gradient, random_wall_vector};
use reservoir_inversion::synthetic::{Benchmark, BenchmarkSpec};
use reservoir_inversion::DoubleDouble;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bench = Benchmark::build(&BenchmarkSpec::parse(include_str!("../../../specs/tiny.cfg"))?)?;
    let u_star = bench.observation(&bench.operators::<DoubleDouble>()?)?;
    let g = random_wall_vector(bench.partition.n1(), 42);

    // rounding in J limits the double-precision agreement; double-double
    // leaves only the truncation error of the central difference
    let dbl = check_gradient(&bench.operators::<f64>()?, &g, &u_star, 5, 1e-5, 7)?;
    let ext = check_gradient(&bench.operators::<DoubleDouble>()?, &g, &u_star, 5, 1e-6, 7)?;
    for (k, (d, e)) in dbl.errors.iter().zip(&ext.errors).enumerate() {
        println!("direction {k}: double {d:.2e}   extended {e:.2e}");
    }
    println!("max relative error: double {:.2e}, extended {:.2e}", dbl.max_error(), ext.max_error());
    Ok(())
}
