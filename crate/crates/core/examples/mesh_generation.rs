//! Generate the tiny benchmark mesh, validate it and write it out as native
//! text, MSH and VTK.
//!
//! ```bash
//! cargo run --example mesh_generation
//! ```

use std::fs::File;
use std::io::BufWriter;

use reservoir_inversion::mesh::msh::{write_msh, TagDictionary};
use reservoir_inversion::mesh::native::write_native;
use reservoir_inversion::mesh::vtk::write_vtk;
use reservoir_inversion::mesh::{generate_box_with_cavity, validate, BoundaryTag};
use reservoir_inversion::synthetic::BenchmarkSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = BenchmarkSpec::parse(include_str!("../../../specs/tiny.cfg"))?;
    let mesh = generate_box_with_cavity(&spec.mesh)?;
    println!("{} nodes, {} tetrahedra, {} boundary triangles", mesh.num_nodes(), mesh.tets.len(), mesh.boundary.len());
    for tag in BoundaryTag::ALL {
        println!("  {tag:<20} {} nodes", mesh.nodes_with_tag(tag).len());
    }
    println!("volume {:.4} (box minus cavity)", mesh.total_volume());

    let violations = validate(&mesh);
    println!("validation: {} violations", violations.len());

    let dir = std::env::temp_dir().join("resinv-examples");
    std::fs::create_dir_all(&dir)?;
    write_native(&mesh, BufWriter::new(File::create(dir.join("tiny.txt"))?))?;
    write_msh(&mesh, &TagDictionary::default(), BufWriter::new(File::create(dir.join("tiny.msh"))?))?;
    let normals = mesh.nodal_normals(BoundaryTag::ReservoirWall);
    write_vtk(&mesh, "tiny mesh", &[("wall_normal", &normals)], BufWriter::new(File::create(dir.join("tiny.vtk"))?))?;
    println!("wrote tiny.txt, tiny.msh and tiny.vtk to {}", dir.display());
    Ok(())
}
