//! Tetrahedral meshes of the perforated elastic body with tagged boundary.

mod generate;
pub mod msh;
pub mod native;
mod validate;
pub mod vtk;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use generate::{generate_box_with_cavity, BoxMeshSpec, Ellipsoid, SurfaceBump};
pub use validate::{validate, Violation};

pub type Point = [f64; 3];

/// The four disjoint pieces of the boundary of the elastic domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    /// Clamped base, `u = 0`.
    ClampedBase,
    /// Traction-free side walls.
    FreeWall,
    /// Ground surface where displacement is observed.
    ObservationSurface,
    /// Cavity (reservoir) wall carrying the unknown traction.
    ReservoirWall,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 4] = [
        BoundaryTag::ClampedBase,
        BoundaryTag::FreeWall,
        BoundaryTag::ObservationSurface,
        BoundaryTag::ReservoirWall,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::ClampedBase => "ClampedBase",
            BoundaryTag::FreeWall => "FreeWall",
            BoundaryTag::ObservationSurface => "ObservationSurface",
            BoundaryTag::ReservoirWall => "ReservoirWall",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryTag {
    type Err = MeshError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BoundaryTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| MeshError::UnknownTagName(s.to_string()))
    }
}

/// Set of boundary tags incident to one node.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TagSet(u8);

impl TagSet {
    pub fn insert(&mut self, tag: BoundaryTag) {
        self.0 |= tag.bit();
    }

    pub fn contains(self, tag: BoundaryTag) -> bool {
        self.0 & tag.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTri {
    /// Vertices ordered counter-clockwise when seen from outside the body.
    pub nodes: [usize; 3],
    pub tag: BoundaryTag,
    /// Unit normal pointing out of the elastic domain.
    pub normal: Point,
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("box extents and divisions must be positive")]
    InvalidBox,
    #[error("a cavity requires at least 4 divisions along every axis (got {0:?})")]
    TooFewDivisions([usize; 3]),
    #[error("cavity touches or crosses the exterior boundary; keep one element layer of clearance")]
    CavityTouchesBoundary,
    #[error("cavity removed no elements; enlarge it or refine the grid")]
    EmptyCavity,
    #[error("snapping the cavity wall inverted tetrahedron {tet} (volume {volume:e})")]
    SnapInvertedTet { tet: usize, volume: f64 },
    #[error("boundary triangle {tri} {nodes:?} is not a face of any tetrahedron")]
    TriangleNotAFace { tri: usize, nodes: [usize; 3] },
    #[error("node index {index} out of range ({count} nodes)")]
    NodeIndexOutOfRange { index: usize, count: usize },
    #[error("unknown boundary tag name `{0}`")]
    UnknownTagName(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<Point>,
    pub tets: Vec<[usize; 4]>,
    pub boundary: Vec<BoundaryTri>,
}

impl Mesh {
    /// Builds a mesh from raw connectivity, orienting each boundary triangle
    /// outward and computing its normal from the tetrahedron that owns it.
    pub fn from_parts(
        nodes: Vec<Point>,
        tets: Vec<[usize; 4]>,
        tris: Vec<([usize; 3], BoundaryTag)>,
    ) -> Result<Mesh, MeshError> {
        let n = nodes.len();
        for &i in tets.iter().flatten().chain(tris.iter().flat_map(|(t, _)| t.iter())) {
            if i >= n {
                return Err(MeshError::NodeIndexOutOfRange { index: i, count: n });
            }
        }
        let faces = face_owners(&tets);
        let mut boundary = Vec::with_capacity(tris.len());
        for (ti, (tri, tag)) in tris.into_iter().enumerate() {
            let owner = faces
                .get(&sorted3(tri))
                .and_then(|owners| owners.first())
                .ok_or(MeshError::TriangleNotAFace { tri: ti, nodes: tri })?;
            let opposite = nodes[owner.1];
            boundary.push(oriented_tri(&nodes, tri, opposite, tag));
        }
        Ok(Mesh { nodes, tets, boundary })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn tet_coords(&self, t: usize) -> [Point; 4] {
        self.tets[t].map(|i| self.nodes[i])
    }

    pub fn tet_volume(&self, t: usize) -> f64 {
        let [a, b, c, d] = self.tet_coords(t);
        signed_volume(a, b, c, d)
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.tets.len()).map(|t| self.tet_volume(t)).sum()
    }

    pub fn tri_area(&self, tri: &BoundaryTri) -> f64 {
        let [a, b, c] = tri.nodes.map(|i| self.nodes[i]);
        0.5 * norm(cross(sub(b, a), sub(c, a)))
    }

    /// Tags of the boundary triangles incident to each node.
    pub fn node_tags(&self) -> Vec<TagSet> {
        let mut tags = vec![TagSet::default(); self.nodes.len()];
        for tri in &self.boundary {
            for &v in &tri.nodes {
                if let Some(t) = tags.get_mut(v) {
                    t.insert(tri.tag);
                }
            }
        }
        tags
    }

    /// Sorted node indices incident to triangles with `tag`.
    pub fn nodes_with_tag(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary
            .iter()
            .filter(|t| t.tag == tag)
            .flat_map(|t| t.nodes)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Area-weighted average of incident triangle normals, per node, over
    /// triangles of one tag. Nodes without such triangles get a zero vector.
    pub fn nodal_normals(&self, tag: BoundaryTag) -> Vec<Point> {
        let mut acc = vec![[0.0; 3]; self.nodes.len()];
        for tri in self.boundary.iter().filter(|t| t.tag == tag) {
            let a = self.tri_area(tri);
            for &v in &tri.nodes {
                for c in 0..3 {
                    acc[v][c] += a * tri.normal[c];
                }
            }
        }
        for n in &mut acc {
            let l = norm(*n);
            if l > 0.0 {
                *n = n.map(|x| x / l);
            }
        }
        acc
    }

    /// Lumped (row-sum) surface mass per node over triangles of one tag.
    pub fn lumped_area(&self, tag: BoundaryTag) -> Vec<f64> {
        let mut area = vec![0.0; self.nodes.len()];
        for tri in self.boundary.iter().filter(|t| t.tag == tag) {
            let a = self.tri_area(tri) / 3.0;
            for &v in &tri.nodes {
                area[v] += a;
            }
        }
        area
    }

    /// Edges of triangles carrying `tag`, as adjacency lists over all nodes.
    pub fn surface_adjacency(&self, tag: BoundaryTag) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for tri in self.boundary.iter().filter(|t| t.tag == tag) {
            for k in 0..3 {
                let (a, b) = (tri.nodes[k], tri.nodes[(k + 1) % 3]);
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        adj
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.nodes {
            for c in 0..3 {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        (lo, hi)
    }
}

pub(crate) fn sorted3(mut f: [usize; 3]) -> [usize; 3] {
    f.sort_unstable();
    f
}

/// The four faces of a tet, each paired with its opposite vertex.
pub(crate) fn tet_faces(t: [usize; 4]) -> [([usize; 3], usize); 4] {
    [
        ([t[1], t[2], t[3]], t[0]),
        ([t[0], t[2], t[3]], t[1]),
        ([t[0], t[1], t[3]], t[2]),
        ([t[0], t[1], t[2]], t[3]),
    ]
}

/// Sorted face -> list of (tet index, opposite vertex).
pub(crate) fn face_owners(tets: &[[usize; 4]]) -> HashMap<[usize; 3], Vec<(usize, usize)>> {
    let mut map: HashMap<[usize; 3], Vec<(usize, usize)>> = HashMap::with_capacity(tets.len() * 3);
    for (ti, &t) in tets.iter().enumerate() {
        for (f, opp) in tet_faces(t) {
            map.entry(sorted3(f)).or_default().push((ti, opp));
        }
    }
    map
}

pub(crate) fn oriented_tri(nodes: &[Point], tri: [usize; 3], opposite: Point, tag: BoundaryTag) -> BoundaryTri {
    let [a, b, c] = tri.map(|i| nodes[i]);
    let mut n = cross(sub(b, a), sub(c, a));
    let mut tri = tri;
    if dot(n, sub(opposite, a)) > 0.0 {
        tri.swap(1, 2);
        n = n.map(|x| -x);
    }
    let l = norm(n);
    BoundaryTri { nodes: tri, tag, normal: if l > 0.0 { n.map(|x| x / l) } else { n } }
}

pub fn signed_volume(a: Point, b: Point, c: Point, d: Point) -> f64 {
    dot(sub(b, a), cross(sub(c, a), sub(d, a))) / 6.0
}

#[inline]
pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross(a: Point, b: Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
pub(crate) fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}
