//! Recover the wall load from noiseless surface data with the variational
//! method in double-double arithmetic, printing the convergence history.
//!
//! ```bash
//! cargo run --release --example invert_tiny
//! ```

use reservoir_inversion::inverse::{invert_variational, InversionConfig, Method};
use reservoir_inversion::synthetic::{Benchmark, BenchmarkSpec};
use reservoir_inversion::{DoubleDouble, ScalarKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bench = Benchmark::build(&BenchmarkSpec::parse(include_str!("../../../specs/tiny.cfg"))?)?;
    let ext = bench.operators::<DoubleDouble>()?;
    let u_star = bench.observation(&ext)?;

    let config = InversionConfig::new(Method::Variational, ScalarKind::Extended, 100);
    let inv = invert_variational(&ext, &u_star, &config, None, Some(&bench.g_star))?;

    println!("{:>5} {:>12} {:>12} {:>12}", "iter", "residual", "J", "traction");
    for row in inv.record.rows.iter().filter(|r| r.iter % 5 == 0 || r.iter == inv.report.iterations) {
        println!(
            "{:>5} {:>12.3e} {:>12.3e} {:>12.3e}",
            row.iter,
            row.residual,
            row.cost.unwrap_or(f64::NAN),
            row.traction_err.unwrap_or(f64::NAN)
        );
    }
    println!("stopped after {} iterations: {}", inv.report.iterations, inv.report.termination);
    Ok(())
}
