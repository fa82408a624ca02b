//! Compare the variational formulation with the normal equation on the same
//! data. Both reach the same estimate. The normal equation can lead at
//! coarse residual levels; the variational path takes over below them.
//!
//! ```bash
//! cargo run --release --example normal_vs_variational
//! ```

use reservoir_inversion::inverse::{invert_normal, invert_variational, InversionConfig, Method};
use reservoir_inversion::scalar::vecops;
use reservoir_inversion::synthetic::{Benchmark, BenchmarkSpec};
use reservoir_inversion::{DoubleDouble, ScalarKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bench = Benchmark::build(&BenchmarkSpec::parse(include_str!("../../../specs/tiny.cfg"))?)?;
    let ext = bench.operators::<DoubleDouble>()?;
    let u_star = bench.observation(&ext)?;
    let truth = Some(bench.g_star.as_slice());

    let var = invert_variational(
        &ext,
        &u_star,
        &InversionConfig::new(Method::Variational, ScalarKind::Extended, 400),
        None,
        truth,
    )?;
    let nrm =
        invert_normal(&ext, &u_star, &InversionConfig::new(Method::NormalEquation, ScalarKind::Extended, 400), None, truth)?;

    println!("{:>8} {:>12} {:>12}", "level", "variational", "normal");
    for k in [2, 4, 8, 12, 16, 20] {
        let level = 10f64.powi(-k);
        let show = |it: Option<usize>| it.map_or("-".to_string(), |i| i.to_string());
        println!(
            "{:>8} {:>12} {:>12}",
            format!("1e-{k}"),
            show(var.record.iterations_to(level)),
            show(nrm.record.iterations_to(level))
        );
    }
    println!("estimates differ by {:.2e} (relative)", vecops::rel_diff(&var.estimate, &nrm.estimate));
    Ok(())
}
