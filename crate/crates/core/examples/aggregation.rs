//! Node aggregation on a thin reservoir with more wall unknowns than surface
//! observations: without it the normal matrix is singular, with it the
//! reduced problem is well posed.
//!
//! Clusters pair nodes across the two faces of the thin cavity, and a
//! shared vector cannot represent a pressure, whose directions on the two
//! faces are opposite. A uniform-direction truth, which tying can
//! represent, is shown alongside.
//!
//! ```bash
//! cargo run --release --example aggregation
//! ```

use reservoir_inversion::inverse::{build_aggregation, invert_variational, InversionConfig, Method};
use reservoir_inversion::synthetic::{Benchmark, BenchmarkSpec, TractionDirection};
use reservoir_inversion::{DoubleDouble, ScalarKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pressure = BenchmarkSpec::parse(include_str!("../../../specs/underdetermined.cfg"))?;
    let mut uplift = pressure.clone();
    uplift.traction.direction = TractionDirection::Fixed([0.0, 0.0, 1.0]);

    for (label, spec) in [("pressure", pressure), ("uplift", uplift)] {
        let bench = Benchmark::build(&spec)?;
        let p = &bench.partition;
        let agg = build_aggregation(&bench.mesh, p, p.n3() / 3)?;
        println!(
            "{label}: {} wall unknowns, {} surface observations, {} clusters ({} unknowns)",
            p.n1(),
            p.n3(),
            agg.num_clusters(),
            agg.dim()
        );

        let ext = bench.operators::<DoubleDouble>()?;
        let u_star = bench.observation(&ext)?;
        let truth = Some(bench.g_star.as_slice());
        let mut config = InversionConfig::new(Method::Variational, ScalarKind::Extended, 300);
        let plain = invert_variational(&ext, &u_star, &config, None, truth)?;
        config.aggregation = Some(agg.num_clusters());
        let tied = invert_variational(&ext, &u_star, &config, Some(&agg), truth)?;

        for (name, run) in [("per node", &plain), ("aggregated", &tied)] {
            let last = run.record.last().expect("iteration 0 is always recorded");
            println!(
                "  {name:<11} {:>4} iterations, residual {:.2e}, surface misfit {:.2e}, traction error {:.2e}",
                run.report.iterations,
                last.residual,
                last.disp_err.unwrap_or(f64::NAN),
                last.traction_err.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
