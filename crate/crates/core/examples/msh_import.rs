//! Import a Gmsh 2.2 ASCII file with a custom physical-tag dictionary, then
//! show how a malformed file is reported.
//!
//! ```bash
//! cargo run --example msh_import
//! ```

use std::collections::HashMap;

use reservoir_inversion::mesh::msh::{import_msh, TagDictionary};
use reservoir_inversion::mesh::{validate, BoundaryTag};

// one tetrahedron: base clamped, two free sides, the slanted face observed
const SINGLE_TET: &str = "\
$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 0 1 0
4 0 0 1
$EndNodes
$Elements
5
1 2 2 101 1 1 3 2
2 2 2 102 2 1 2 4
3 2 2 102 3 1 4 3
4 2 2 103 4 2 3 4
5 4 2 200 1 1 2 3 4
$EndElements
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dict = TagDictionary {
        surfaces: HashMap::from([
            (101, BoundaryTag::ClampedBase),
            (102, BoundaryTag::FreeWall),
            (103, BoundaryTag::ObservationSurface),
        ]),
        volume: 200,
    };
    let mesh = import_msh(SINGLE_TET.as_bytes(), &dict)?;
    println!("imported {} nodes, {} tets, {} triangles", mesh.num_nodes(), mesh.tets.len(), mesh.boundary.len());
    for tri in &mesh.boundary {
        println!("  {:?} {:<20} normal {:?}", tri.nodes, tri.tag.name(), tri.normal.map(|x| (x * 1e3).round() / 1e3));
    }
    println!("validation: {:?}", validate(&mesh));

    let broken = SINGLE_TET.replace("3 0 1 0", "3 0 one 0");
    match import_msh(broken.as_bytes(), &dict) {
        Ok(_) => println!("unexpectedly accepted the broken file"),
        Err(e) => println!("broken file rejected: {e}"),
    }
    Ok(())
}
