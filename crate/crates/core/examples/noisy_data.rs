//! Invert noisy observations. The residual stops being a good guide once it
//! reaches the noise level, so the traction error is tracked instead and
//! its best iterate reported.
//!
//! ```bash
//! cargo run --release --example noisy_data
//! ```

use reservoir_inversion::inverse::{invert_variational, InversionConfig, Method};
use reservoir_inversion::synthetic::{add_noise, Benchmark, BenchmarkSpec};
use reservoir_inversion::{DoubleDouble, ScalarKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bench = Benchmark::build(&BenchmarkSpec::parse(include_str!("../../../specs/tiny.cfg"))?)?;
    let ext = bench.operators::<DoubleDouble>()?;
    let clean = bench.observation(&ext)?;
    let config = InversionConfig::new(Method::Variational, ScalarKind::Extended, 100);

    for level in [0.0, 1e-4, 1e-2] {
        let u_star = add_noise(&clean, level, 5);
        let inv = invert_variational(&ext, &u_star, &config, None, Some(&bench.g_star))?;
        let errs = inv.record.traction_errors();
        let (best_at, best) =
            errs.iter().copied().enumerate().fold((0, f64::INFINITY), |acc, (i, e)| if e < acc.1 { (i, e) } else { acc });
        println!(
            "noise {level:>7.0e}: best traction error {best:.2e} at iteration {best_at}, final {:.2e}",
            errs[errs.len() - 1]
        );
    }
    Ok(())
}
