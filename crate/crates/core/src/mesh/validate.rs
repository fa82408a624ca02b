use std::collections::HashMap;
use std::fmt;

use super::{cross, dot, face_owners, norm, sorted3, sub, BoundaryTag, Mesh};

/// One broken mesh invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NodeIndexOutOfRange { element: String, index: usize },
    NonFiniteNode { node: usize },
    OrphanNode { node: usize },
    NonPositiveVolume { tet: usize, volume: f64 },
    TriangleNotAFace { tri: usize },
    TriangleOnInteriorFace { tri: usize },
    DuplicateTriangle { tri: usize, first: usize },
    UntaggedBoundaryFace { nodes: [usize; 3] },
    NormalNotOutward { tri: usize },
    NormalNotUnit { tri: usize, length: f64 },
    /// A node touches both the reservoir wall and the observation surface,
    /// which couples the control and observation blocks of the stiffness.
    ReservoirObservationContact { node: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NodeIndexOutOfRange { element, index } => {
                write!(f, "{element} references node {index}, which does not exist")
            }
            Violation::NonFiniteNode { node } => write!(f, "node {node} has non-finite coordinates"),
            Violation::OrphanNode { node } => write!(f, "node {node} belongs to no tetrahedron"),
            Violation::NonPositiveVolume { tet, volume } => {
                write!(f, "tet {tet} has non-positive signed volume {volume:e}")
            }
            Violation::TriangleNotAFace { tri } => write!(f, "boundary triangle {tri} is not a face of any tet"),
            Violation::TriangleOnInteriorFace { tri } => {
                write!(f, "boundary triangle {tri} lies on a face shared by two tets")
            }
            Violation::DuplicateTriangle { tri, first } => {
                write!(f, "boundary triangle {tri} duplicates triangle {first}")
            }
            Violation::UntaggedBoundaryFace { nodes } => write!(f, "boundary face {nodes:?} carries no tag"),
            Violation::NormalNotOutward { tri } => {
                write!(f, "normal of boundary triangle {tri} points into the body")
            }
            Violation::NormalNotUnit { tri, length } => {
                write!(f, "normal of boundary triangle {tri} has length {length}")
            }
            Violation::ReservoirObservationContact { node } => write!(
                f,
                "node {node} is on both the reservoir wall and the observation surface (K13 would be nonzero)"
            ),
        }
    }
}

/// Checks every mesh invariant. An empty report means the mesh is valid.
pub fn validate(mesh: &Mesh) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = mesh.nodes.len();

    let mut in_range = true;
    for (ti, t) in mesh.tets.iter().enumerate() {
        for &v in t {
            if v >= n {
                out.push(Violation::NodeIndexOutOfRange { element: format!("tet {ti}"), index: v });
                in_range = false;
            }
        }
    }
    for (bi, tri) in mesh.boundary.iter().enumerate() {
        for &v in &tri.nodes {
            if v >= n {
                out.push(Violation::NodeIndexOutOfRange { element: format!("boundary triangle {bi}"), index: v });
                in_range = false;
            }
        }
    }
    if !in_range {
        return out;
    }

    for (i, p) in mesh.nodes.iter().enumerate() {
        if p.iter().any(|c| !c.is_finite()) {
            out.push(Violation::NonFiniteNode { node: i });
        }
    }
    let mut used = vec![false; n];
    for &v in mesh.tets.iter().flatten() {
        used[v] = true;
    }
    for (i, u) in used.iter().enumerate() {
        if !u {
            out.push(Violation::OrphanNode { node: i });
        }
    }
    for t in 0..mesh.tets.len() {
        let vol = mesh.tet_volume(t);
        if !(vol > 0.0) {
            out.push(Violation::NonPositiveVolume { tet: t, volume: vol });
        }
    }

    let owners = face_owners(&mesh.tets);
    let mut seen: HashMap<[usize; 3], usize> = HashMap::new();
    for (bi, tri) in mesh.boundary.iter().enumerate() {
        let key = sorted3(tri.nodes);
        if let Some(&first) = seen.get(&key) {
            out.push(Violation::DuplicateTriangle { tri: bi, first });
            continue;
        }
        seen.insert(key, bi);
        match owners.get(&key).map(Vec::as_slice) {
            None | Some([]) => out.push(Violation::TriangleNotAFace { tri: bi }),
            Some([(_, opp)]) => {
                let len = norm(tri.normal);
                if (len - 1.0).abs() > 1e-10 {
                    out.push(Violation::NormalNotUnit { tri: bi, length: len });
                }
                let a = mesh.nodes[tri.nodes[0]];
                let geometric = cross(sub(mesh.nodes[tri.nodes[1]], a), sub(mesh.nodes[tri.nodes[2]], a));
                let towards_opp = sub(mesh.nodes[*opp], a);
                if dot(tri.normal, towards_opp) >= 0.0 || dot(geometric, tri.normal) <= 0.0 {
                    out.push(Violation::NormalNotOutward { tri: bi });
                }
            }
            Some(_) => out.push(Violation::TriangleOnInteriorFace { tri: bi }),
        }
    }
    let mut untagged: Vec<[usize; 3]> = owners
        .iter()
        .filter(|(k, o)| o.len() == 1 && !seen.contains_key(*k))
        .map(|(k, _)| *k)
        .collect();
    untagged.sort_unstable();
    out.extend(untagged.into_iter().map(|nodes| Violation::UntaggedBoundaryFace { nodes }));

    for (i, t) in mesh.node_tags().iter().enumerate() {
        if t.contains(BoundaryTag::ReservoirWall) && t.contains(BoundaryTag::ObservationSurface) {
            out.push(Violation::ReservoirObservationContact { node: i });
        }
    }
    out
}
