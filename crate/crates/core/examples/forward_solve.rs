//! Push the synthetic wall traction through the forward map and look at the
//! surface response, in double and in double-double arithmetic.
//!
//! ```bash
//! cargo run --release --example forward_solve
//! ```

use std::fs::File;
use std::io::BufWriter;

use reservoir_inversion::mesh::vtk::write_vtk;
use reservoir_inversion::scalar::vecops;
use reservoir_inversion::synthetic::{Benchmark, BenchmarkSpec};
use reservoir_inversion::DoubleDouble;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bench = Benchmark::build(&BenchmarkSpec::parse(include_str!("../../../specs/tiny.cfg"))?)?;
    let p = &bench.partition;
    println!("wall {} / interior {} / surface {} DOFs", p.n1(), p.n2(), p.n3());

    let dbl = bench.operators::<f64>()?;
    let ext = bench.operators::<DoubleDouble>()?;
    let u_dbl = dbl.apply_forward(&bench.g_star);
    let u_ext: Vec<f64> = vecops::demote(&ext.apply_forward(&vecops::promote::<DoubleDouble>(&bench.g_star)));
    let peak = u_ext.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    println!("peak surface displacement {peak:.6e}");
    println!("double vs extended surface response differ by {:.2e} (relative)", vecops::rel_diff(&u_dbl, &u_ext));

    // the full field, clamped nodes included, for a viewer
    let full = bench.dofs.extend(&dbl.solve_wall_load(&bench.g_star));
    let points: Vec<[f64; 3]> = full.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
    let path = std::env::temp_dir().join("resinv-forward.vtk");
    write_vtk(&bench.mesh, "forward displacement", &[("displacement", &points)], BufWriter::new(File::create(&path)?))?;
    println!("displacement field written to {}", path.display());
    Ok(())
}
