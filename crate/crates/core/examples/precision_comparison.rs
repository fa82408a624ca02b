//! Run the same variational inversion in double and in double-double and
//! write both convergence records for an overlay plot.
//!
//! The tiny mesh is well enough conditioned that double still does well;
//! pass `standard` to use the desk benchmark, where double saturates and
//! then diverges (several minutes in release mode).
//!
//! ```bash
//! cargo run --release --example precision_comparison [standard]
//! ```

use std::fs::File;
use std::io::BufWriter;

use reservoir_inversion::inverse::{invert_variational, InversionConfig, Method};
use reservoir_inversion::synthetic::{Benchmark, BenchmarkSpec};
use reservoir_inversion::{DoubleDouble, ScalarKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = match std::env::args().nth(1).as_deref() {
        Some("standard") => BenchmarkSpec::standard(),
        _ => BenchmarkSpec::parse(include_str!("../../../specs/tiny.cfg"))?,
    };
    let bench = Benchmark::build(&spec)?;
    let ext = bench.operators::<DoubleDouble>()?;
    let dbl = bench.operators::<f64>()?;
    let u_star = bench.observation(&ext)?;
    let truth = Some(bench.g_star.as_slice());

    let run_dbl =
        invert_variational(&dbl, &u_star, &InversionConfig::new(Method::Variational, ScalarKind::Double, 400), None, truth)?;
    let run_ext = invert_variational(
        &ext,
        &u_star,
        &InversionConfig::new(Method::Variational, ScalarKind::Extended, 400),
        None,
        truth,
    )?;

    let dir = std::env::temp_dir();
    for (name, run) in [("double", &run_dbl), ("extended", &run_ext)] {
        let best = run.record.residuals().into_iter().fold(f64::INFINITY, f64::min);
        let last = run.record.last().expect("iteration 0 is always recorded");
        println!(
            "{name:<9} {} iterations, best residual {best:.2e}, final traction error {:.2e}",
            run.report.iterations,
            last.traction_err.unwrap_or(f64::NAN)
        );
        let path = dir.join(format!("convergence_{name}.csv"));
        run.record.write_csv(BufWriter::new(File::create(&path)?))?;
        println!("          record at {}", path.display());
    }
    Ok(())
}
