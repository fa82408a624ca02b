//! Legacy ASCII VTK output (`UNSTRUCTURED_GRID`, linear tetrahedra).

use std::io::{self, Write};

use super::{Mesh, Point};

/// Writes the tetrahedra with optional per-node vector fields. `title` lands
/// on the second header line, which VTK reserves for free text.
pub fn write_vtk<W: Write>(mesh: &Mesh, title: &str, fields: &[(&str, &[Point])], mut w: W) -> io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", title.replace('\n', " "))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.nodes.len())?;
    for p in &mesh.nodes {
        writeln!(w, "{} {} {}", p[0], p[1], p[2])?;
    }
    writeln!(w, "CELLS {} {}", mesh.tets.len(), 5 * mesh.tets.len())?;
    for t in &mesh.tets {
        writeln!(w, "4 {} {} {} {}", t[0], t[1], t[2], t[3])?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.tets.len())?;
    for _ in &mesh.tets {
        writeln!(w, "10")?;
    }
    if !fields.is_empty() {
        writeln!(w, "POINT_DATA {}", mesh.nodes.len())?;
        for (name, values) in fields {
            assert_eq!(values.len(), mesh.nodes.len(), "field `{name}` length");
            writeln!(w, "VECTORS {} double", name.replace(' ', "_"))?;
            for v in values.iter() {
                writeln!(w, "{} {} {}", v[0], v[1], v[2])?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_box_with_cavity, BoxMeshSpec};

    #[test]
    fn layout_of_single_hex() {
        let m = generate_box_with_cavity(&BoxMeshSpec {
            extents: [1.0; 3],
            divisions: [1, 1, 1],
            cavity: None,
            bump: None,
        })
        .unwrap();
        let zero = vec![[0.0; 3]; m.nodes.len()];
        let mut buf = Vec::new();
        write_vtk(&m, "cube", &[("u", &zero)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[4], "POINTS 8 double");
        assert_eq!(lines[13], "CELLS 6 30");
        assert_eq!(lines[20], "CELL_TYPES 6");
        assert!(text.contains("POINT_DATA 8\nVECTORS u double\n0 0 0\n"));
    }
}
