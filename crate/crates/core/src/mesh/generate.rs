use super::{
    face_owners, norm, oriented_tri, signed_volume, sorted3, sub, BoundaryTag, Mesh, MeshError, Point,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipsoid {
    pub center: Point,
    pub semiaxes: Point,
}

impl Ellipsoid {
    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.semiaxes.iter().product::<f64>()
    }

    /// Ellipsoidal radius: `< 1` inside, `1` on the surface.
    pub fn radius(&self, p: Point) -> f64 {
        let mut r2 = 0.0;
        for c in 0..3 {
            let t = (p[c] - self.center[c]) / self.semiaxes[c];
            r2 += t * t;
        }
        r2.sqrt()
    }

    /// Radial projection from the center onto the surface.
    pub fn project(&self, p: Point) -> Point {
        let r = self.radius(p);
        if r == 0.0 {
            return p;
        }
        let mut q = p;
        for c in 0..3 {
            q[c] = self.center[c] + (p[c] - self.center[c]) / r;
        }
        q
    }
}

/// Gaussian uplift of the top surface, centered above the box center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceBump {
    pub amplitude: f64,
    pub width: f64,
}

/// A box centered at the origin, `[-L/2, L/2]` along each axis, split into a
/// structured grid of hexahedra.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxMeshSpec {
    pub extents: Point,
    pub divisions: [usize; 3],
    pub cavity: Option<Ellipsoid>,
    pub bump: Option<SurfaceBump>,
}

impl BoxMeshSpec {
    pub fn spacing(&self) -> Point {
        [0, 1, 2].map(|c| self.extents[c] / self.divisions[c] as f64)
    }
}

/// Pre-carving snap radius, in units of the smallest cell spacing.
const SNAP_WINDOW: f64 = 0.35;
/// Smallest tet volume accepted after snapping, relative to a Kuhn tet.
const MIN_VOLUME_RATIO: f64 = 0.02;
const MAX_RELAX_ROUNDS: usize = 40;

// Kuhn split: every tet runs along the hex main diagonal, so shared hex faces
// are cut along the same diagonal from both sides.
const KUHN_PATHS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Structured box mesh, optionally with an ellipsoidal cavity carved out and
/// a Gaussian bump on the top surface.
///
/// The bottom face is clamped, the four sides are free walls, the top is the
/// observation surface and the exposed cavity faces form the reservoir wall.
pub fn generate_box_with_cavity(spec: &BoxMeshSpec) -> Result<Mesh, MeshError> {
    let [nx, ny, nz] = spec.divisions;
    if spec.extents.iter().any(|&e| !(e > 0.0)) || spec.divisions.contains(&0) {
        return Err(MeshError::InvalidBox);
    }
    if spec.cavity.is_some() && spec.divisions.iter().any(|&d| d < 4) {
        return Err(MeshError::TooFewDivisions(spec.divisions));
    }
    let h = spec.spacing();
    let lo = spec.extents.map(|e| -0.5 * e);

    let lattice = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let mut ijk = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    let mut nodes = Vec::with_capacity(ijk.capacity());
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                ijk.push([i, j, k]);
                let mut p = [lo[0] + i as f64 * h[0], lo[1] + j as f64 * h[1], lo[2] + k as f64 * h[2]];
                if let Some(b) = spec.bump {
                    let r2 = p[0] * p[0] + p[1] * p[1];
                    let blend = k as f64 / nz as f64;
                    p[2] += blend * b.amplitude * (-r2 / (2.0 * b.width * b.width)).exp();
                }
                nodes.push(p);
            }
        }
    }

    let mut tets = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for path in KUHN_PATHS {
                    let mut c = [i, j, k];
                    let mut t = [lattice(c[0], c[1], c[2]); 4];
                    for (s, &axis) in path.iter().enumerate() {
                        c[axis] += 1;
                        t[s + 1] = lattice(c[0], c[1], c[2]);
                    }
                    let [a, b, cc, d] = t.map(|v| nodes[v]);
                    if signed_volume(a, b, cc, d) < 0.0 {
                        t.swap(2, 3);
                    }
                    tets.push(t);
                }
            }
        }
    }

    let lattice_pos = nodes.clone();
    let mut reservoir_nodes: Vec<bool> = vec![false; nodes.len()];
    if let Some(cav) = spec.cavity {
        for c in 0..3 {
            let inner_lo = lo[c] + h[c];
            let inner_hi = -lo[c] - h[c];
            if cav.semiaxes[c] <= 0.0
                || cav.center[c] - cav.semiaxes[c] < inner_lo
                || cav.center[c] + cav.semiaxes[c] > inner_hi
            {
                return Err(MeshError::CavityTouchesBoundary);
            }
        }
        // Pull lattice nodes lying close to the wall onto it before carving.
        // The window is under half a cell, so two nodes on one ray never
        // land on the same surface point.
        let window = SNAP_WINDOW * h.iter().copied().fold(f64::INFINITY, f64::min);
        for p in nodes.iter_mut() {
            let q = cav.project(*p);
            if norm(sub(q, *p)) < window {
                *p = q;
            }
        }
        let before = tets.len();
        let on_exterior =
            |v: usize| ijk[v][0] == 0 || ijk[v][0] == nx || ijk[v][1] == 0 || ijk[v][1] == ny || ijk[v][2] == 0 || ijk[v][2] == nz;
        let mut carved = vec![false; nodes.len()];
        let mut kept = Vec::with_capacity(before);
        for t in tets {
            let mut cen = [0.0; 3];
            for &v in &t {
                for c in 0..3 {
                    cen[c] += 0.25 * nodes[v][c];
                }
            }
            if cav.radius(cen) < 1.0 {
                if t.iter().any(|&v| on_exterior(v)) {
                    return Err(MeshError::CavityTouchesBoundary);
                }
                for &v in &t {
                    carved[v] = true;
                }
            } else {
                kept.push(t);
            }
        }
        if kept.len() == before {
            return Err(MeshError::EmptyCavity);
        }
        // A kept tet with every vertex on the wall leaves a skin whose nodes
        // may have no neighbour off the wall. A load on such nodes moves
        // nothing else, so the surface cannot see it. Peel these tets.
        // Peeling exposes no new node, so one pass suffices.
        kept.retain(|t| !t.iter().all(|&v| carved[v]));
        tets = kept;
    }

    // classify boundary faces before renumbering, using lattice positions
    let owners = face_owners(&tets);
    let mut faces: Vec<([usize; 3], usize, BoundaryTag)> = Vec::new();
    let mut keys: Vec<&[usize; 3]> = owners.keys().collect();
    keys.sort_unstable();
    for key in keys {
        let own = &owners[key];
        if own.len() != 1 {
            continue;
        }
        let all = |axis: usize, val: usize| key.iter().all(|&v| ijk[v][axis] == val);
        let tag = if all(2, 0) {
            BoundaryTag::ClampedBase
        } else if all(2, nz) {
            BoundaryTag::ObservationSurface
        } else if all(0, 0) || all(0, nx) || all(1, 0) || all(1, ny) {
            BoundaryTag::FreeWall
        } else {
            for &v in key {
                reservoir_nodes[v] = true;
            }
            BoundaryTag::ReservoirWall
        };
        faces.push((*key, own[0].0, tag));
    }

    if let Some(cav) = spec.cavity {
        for (v, p) in nodes.iter_mut().enumerate() {
            if reservoir_nodes[v] {
                *p = cav.project(*p);
            }
        }
        relax_snapped_nodes(&lattice_pos, &mut nodes, &tets, h)?;
    }

    // renumber, dropping nodes no tet uses
    let mut used = vec![false; nodes.len()];
    for &v in tets.iter().flatten() {
        used[v] = true;
    }
    let mut remap = vec![usize::MAX; nodes.len()];
    let mut new_nodes = Vec::with_capacity(nodes.len());
    for (v, p) in nodes.iter().enumerate() {
        if used[v] {
            remap[v] = new_nodes.len();
            new_nodes.push(*p);
        }
    }
    let tets: Vec<[usize; 4]> = tets.iter().map(|t| t.map(|v| remap[v])).collect();

    let mut boundary = Vec::with_capacity(faces.len());
    for (face, owner, tag) in faces {
        let t = tets[owner];
        let face = face.map(|v| remap[v]);
        let opp = *t.iter().find(|v| !face.contains(v)).expect("tet has a vertex off the face");
        boundary.push(oriented_tri(&new_nodes, face, new_nodes[opp], tag));
    }
    // deterministic order: by tag, then by sorted vertices
    boundary.sort_by(|a, b| a.tag.cmp(&b.tag).then_with(|| sorted3(a.nodes).cmp(&sorted3(b.nodes))));

    Ok(Mesh { nodes: new_nodes, tets, boundary })
}

/// Snapping can flatten tets where the wall cuts a cell at a grazing angle.
/// Nodes of such tets are moved back toward their lattice position, halving
/// the snap each round, until every tet clears the volume floor. A tet that
/// stays below the floor after the last round is reported.
fn relax_snapped_nodes(
    lattice: &[Point],
    nodes: &mut [Point],
    tets: &[[usize; 4]],
    h: Point,
) -> Result<(), MeshError> {
    let floor = MIN_VOLUME_RATIO * h[0] * h[1] * h[2] / 6.0;
    let targets: Vec<Point> = nodes.to_vec();
    let mut blend = vec![1.0f64; nodes.len()];
    for round in 0..=MAX_RELAX_ROUNDS {
        let mut touched = vec![false; nodes.len()];
        let mut worst: Option<(usize, f64)> = None;
        for (ti, t) in tets.iter().enumerate() {
            let [a, b, c, d] = t.map(|v| nodes[v]);
            let vol = signed_volume(a, b, c, d);
            if !(vol > floor) {
                if worst.map_or(true, |(_, w)| vol < w) {
                    worst = Some((ti, vol));
                }
                // back off the vertex currently displaced the most
                let moved = t
                    .iter()
                    .copied()
                    .filter(|&v| targets[v] != lattice[v])
                    .max_by(|&u, &v| {
                        let du = blend[u] * norm(sub(targets[u], lattice[u]));
                        let dv = blend[v] * norm(sub(targets[v], lattice[v]));
                        du.total_cmp(&dv)
                    });
                if let Some(v) = moved {
                    touched[v] = true;
                }
            }
        }
        let Some((tet, volume)) = worst else {
            return Ok(());
        };
        if round == MAX_RELAX_ROUNDS || !touched.contains(&true) {
            return Err(MeshError::SnapInvertedTet { tet, volume });
        }
        for v in 0..nodes.len() {
            if touched[v] {
                blend[v] *= 0.5;
                for c in 0..3 {
                    nodes[v][c] = lattice[v][c] + blend[v] * (targets[v][c] - lattice[v][c]);
                }
            }
        }
    }
    unreachable!("loop returns on its last round")
}
