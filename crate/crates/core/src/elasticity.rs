//! P1 linear elasticity: element and global stiffness, Dirichlet elimination
//! on the clamped base, and consistent surface loads.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::mesh::{BoundaryTag, Mesh, Point};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ElasticityError {
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("tetrahedron {tet} is degenerate (volume {volume:e})")]
    DegenerateElement { tet: usize, volume: f64 },
    #[error("mesh has no clamped nodes; the stiffness would be singular")]
    NoClampedNodes,
    #[error("expected a field on {expected}, got one on {got}")]
    WrongBoundary { expected: BoundaryTag, got: BoundaryTag },
    #[error("node {node} is not incident to any {tag} triangle")]
    NodeNotOnBoundary { node: usize, tag: BoundaryTag },
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Homogeneous isotropic material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub lambda: f64,
    pub mu: f64,
    /// Body force density; only zero is supported.
    pub body_force: Point,
}

impl MaterialParams {
    pub fn new(lambda: f64, mu: f64) -> Self {
        MaterialParams { lambda, mu, body_force: [0.0; 3] }
    }

    pub fn validate(&self) -> Result<(), ElasticityError> {
        if !(self.mu > 0.0) {
            return Err(ElasticityError::InvalidMaterial(format!("shear modulus must be positive, got {}", self.mu)));
        }
        if !(self.lambda + 2.0 * self.mu / 3.0 > 0.0) {
            return Err(ElasticityError::InvalidMaterial("bulk modulus lambda + 2 mu / 3 must be positive".into()));
        }
        if self.body_force != [0.0; 3] {
            return Err(ElasticityError::InvalidMaterial("body forces are not supported".into()));
        }
        Ok(())
    }
}

pub type ElementMatrix = [[f64; 12]; 12];

/// Gradients of the four barycentric basis functions and the tet volume.
fn basis_gradients(x: &[Point; 4]) -> Option<([[f64; 3]; 4], f64)> {
    let e = |k: usize| [x[k][0] - x[0][0], x[k][1] - x[0][1], x[k][2] - x[0][2]];
    let (a, b, c) = (e(1), e(2), e(3));
    // rows of the inverse Jacobian via cofactors
    let bc = [b[1] * c[2] - b[2] * c[1], b[2] * c[0] - b[0] * c[2], b[0] * c[1] - b[1] * c[0]];
    let ca = [c[1] * a[2] - c[2] * a[1], c[2] * a[0] - c[0] * a[2], c[0] * a[1] - c[1] * a[0]];
    let ab = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let det = a[0] * bc[0] + a[1] * bc[1] + a[2] * bc[2];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let g1 = bc.map(|v| v / det);
    let g2 = ca.map(|v| v / det);
    let g3 = ab.map(|v| v / det);
    let g0 = [0, 1, 2].map(|k| -(g1[k] + g2[k] + g3[k]));
    Some(([g0, g1, g2, g3], det / 6.0))
}

/// `∫ σ(φ_b e_j) : ε(φ_a e_i)` over one linear tetrahedron, DOF order
/// `3 * local_node + component`. Strains are constant, so one evaluation
/// times the volume is exact.
pub fn element_stiffness(x: &[Point; 4], material: &MaterialParams) -> Result<ElementMatrix, ElasticityError> {
    let scale = bbox_diag(x);
    let degenerate = |volume| ElasticityError::DegenerateElement { tet: 0, volume };
    let (g, vol) = basis_gradients(x).ok_or(degenerate(0.0))?;
    if !(vol > 1e-14 * scale * scale * scale) {
        return Err(degenerate(vol));
    }
    let (lam, mu) = (material.lambda, material.mu);
    let mut k = [[0.0; 12]; 12];
    for a in 0..4 {
        for i in 0..3 {
            let r = 3 * a + i;
            for b in 0..4 {
                for j in 0..3 {
                    let c = 3 * b + j;
                    if c < r {
                        continue;
                    }
                    let gg = g[a][0] * g[b][0] + g[a][1] * g[b][1] + g[a][2] * g[b][2];
                    let mut v = lam * g[a][i] * g[b][j] + mu * g[a][j] * g[b][i];
                    if i == j {
                        v += mu * gg;
                    }
                    k[r][c] = vol * v;
                }
            }
        }
    }
    for r in 0..12 {
        for c in 0..r {
            k[r][c] = k[c][r];
        }
    }
    Ok(k)
}

fn bbox_diag(x: &[Point; 4]) -> f64 {
    let mut d2 = 0.0;
    for c in 0..3 {
        let lo = x.iter().map(|p| p[c]).fold(f64::INFINITY, f64::min);
        let hi = x.iter().map(|p| p[c]).fold(f64::NEG_INFINITY, f64::max);
        d2 += (hi - lo) * (hi - lo);
    }
    d2.sqrt()
}

/// Square sparse matrix in compressed-row form with both triangles stored.
/// Symmetry is exact: entry `(i, j)` and `(j, i)` are bitwise equal.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetricMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymmetricMatrix {
    /// Sums duplicate entries in input order, which keeps assembly
    /// reproducible for a fixed triplet sequence.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseSymmetricMatrix { n, row_ptr, col_idx, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row pointers and column indices. Because both triangles are stored
    /// this is also the compressed-column pattern.
    pub fn pattern(&self) -> (&[usize], &[usize]) {
        (&self.row_ptr, &self.col_idx)
    }

    /// `(columns, values)` of one row, columns ascending.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn matvec<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                let mut acc = S::zero();
                for (&c, &v) in cols.iter().zip(vals) {
                    acc += x[c].mul_f64(v);
                }
                acc
            })
            .collect()
    }

    pub fn quad_form<S: Scalar>(&self, x: &[S]) -> S {
        let kx = self.matvec(x);
        crate::scalar::vecops::dot(x, &kx)
    }

    /// Principal submatrix on the given (ascending or not) index list.
    pub fn principal_submatrix(&self, idx: &[usize]) -> SparseSymmetricMatrix {
        let mut local = vec![usize::MAX; self.n];
        for (k, &i) in idx.iter().enumerate() {
            local[i] = k;
        }
        let mut triplets = Vec::new();
        for (k, &i) in idx.iter().enumerate() {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                if local[c] != usize::MAX {
                    triplets.push((k, local[c], v));
                }
            }
        }
        SparseSymmetricMatrix::from_triplets(idx.len(), triplets)
    }

    /// Largest absolute row sum (the infinity norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                d[i][c] = v;
            }
        }
        d
    }
}

/// Global stiffness over all `3 * nodes` DOFs, before any boundary condition.
pub fn assemble_stiffness(mesh: &Mesh, material: &MaterialParams) -> Result<SparseSymmetricMatrix, ElasticityError> {
    material.validate()?;
    let mut triplets = Vec::with_capacity(mesh.tets.len() * 144);
    for (ti, t) in mesh.tets.iter().enumerate() {
        let ke = element_stiffness(&mesh.tet_coords(ti), material).map_err(|e| match e {
            ElasticityError::DegenerateElement { volume, .. } => ElasticityError::DegenerateElement { tet: ti, volume },
            other => other,
        })?;
        for a in 0..4 {
            for i in 0..3 {
                for b in 0..4 {
                    for j in 0..3 {
                        triplets.push((3 * t[a] + i, 3 * t[b] + j, ke[3 * a + i][3 * b + j]));
                    }
                }
            }
        }
    }
    Ok(SparseSymmetricMatrix::from_triplets(3 * mesh.num_nodes(), triplets))
}

/// Map between retained (unclamped) DOFs and the full `3 * nodes` numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    /// Retained index -> original DOF, ascending.
    pub retained: Vec<usize>,
    /// Original DOF -> retained index.
    pub position: Vec<Option<usize>>,
}

impl DofMap {
    pub fn len(&self) -> usize {
        self.retained.len()
    }

    pub fn is_empty(&self) -> bool {
        self.retained.is_empty()
    }

    /// Restriction of a full-DOF vector.
    pub fn restrict<T: Copy>(&self, full: &[T]) -> Vec<T> {
        self.retained.iter().map(|&d| full[d]).collect()
    }

    /// Zero-padded extension of a retained vector.
    pub fn extend<S: Scalar>(&self, reduced: &[S]) -> Vec<S> {
        let mut full = vec![S::zero(); self.position.len()];
        for (k, &d) in self.retained.iter().enumerate() {
            full[d] = reduced[k];
        }
        full
    }
}

/// Removes the rows and columns of every node on a clamped-base triangle.
pub fn apply_clamp(matrix: &SparseSymmetricMatrix, mesh: &Mesh) -> Result<(SparseSymmetricMatrix, DofMap), ElasticityError> {
    let clamped = mesh.nodes_with_tag(BoundaryTag::ClampedBase);
    if clamped.is_empty() {
        return Err(ElasticityError::NoClampedNodes);
    }
    let mut is_clamped = vec![false; mesh.num_nodes()];
    for v in clamped {
        is_clamped[v] = true;
    }
    let retained: Vec<usize> = (0..matrix.dim()).filter(|&d| !is_clamped[d / 3]).collect();
    let mut position = vec![None; matrix.dim()];
    for (k, &d) in retained.iter().enumerate() {
        position[d] = Some(k);
    }
    let reduced = matrix.principal_submatrix(&retained);
    Ok((reduced, DofMap { retained, position }))
}

/// Vector-valued nodal data on one tagged boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    pub tag: BoundaryTag,
    pub values: BTreeMap<usize, Point>,
}

impl BoundaryField {
    pub fn new(tag: BoundaryTag) -> Self {
        BoundaryField { tag, values: BTreeMap::new() }
    }

    /// Checks that every keyed node touches a triangle of the field's tag.
    pub fn check_support(&self, mesh: &Mesh) -> Result<(), ElasticityError> {
        let tags = mesh.node_tags();
        for &node in self.values.keys() {
            if !tags.get(node).is_some_and(|t| t.contains(self.tag)) {
                return Err(ElasticityError::NodeNotOnBoundary { node, tag: self.tag });
            }
        }
        Ok(())
    }

    /// Writes `node_index,x,y,z,vx,vy,vz` rows after a `# ...` metadata line.
    pub fn write_csv<W: Write>(&self, mesh: &Mesh, metadata: &str, mut w: W) -> io::Result<()> {
        writeln!(w, "# {metadata}")?;
        writeln!(w, "node_index,x,y,z,vx,vy,vz")?;
        for (&node, v) in &self.values {
            let p = mesh.nodes[node];
            writeln!(w, "{node},{:?},{:?},{:?},{:?},{:?},{:?}", p[0], p[1], p[2], v[0], v[1], v[2])?;
        }
        Ok(())
    }

    /// Reads the CSV layout written by [`BoundaryField::write_csv`]; lines
    /// starting with `#` are skipped and coordinates are informational.
    pub fn read_csv<R: BufRead>(tag: BoundaryTag, mesh: &Mesh, reader: R) -> Result<BoundaryField, ElasticityError> {
        let mut field = BoundaryField::new(tag);
        let mut header_seen = false;
        for (i, line) in reader.lines().enumerate() {
            let ln = i + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                if line.replace(' ', "") != "node_index,x,y,z,vx,vy,vz" {
                    return Err(ElasticityError::Csv { line: ln, message: "expected header node_index,x,y,z,vx,vy,vz".into() });
                }
                header_seen = true;
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 7 {
                return Err(ElasticityError::Csv { line: ln, message: format!("expected 7 columns, got {}", cols.len()) });
            }
            let node: usize = cols[0]
                .parse()
                .map_err(|_| ElasticityError::Csv { line: ln, message: format!("bad node index `{}`", cols[0]) })?;
            let mut v = [0.0; 3];
            for c in 0..3 {
                v[c] = cols[4 + c]
                    .parse()
                    .map_err(|_| ElasticityError::Csv { line: ln, message: format!("bad value `{}`", cols[4 + c]) })?;
            }
            field.values.insert(node, v);
        }
        field.check_support(mesh)?;
        Ok(field)
    }
}

/// Consistent-mass surface load `∫ t_h · φ_i` over the reservoir wall, in the
/// full `3 * nodes` numbering.
pub fn assemble_neumann_load(mesh: &Mesh, traction: &BoundaryField) -> Result<Vec<f64>, ElasticityError> {
    if traction.tag != BoundaryTag::ReservoirWall {
        return Err(ElasticityError::WrongBoundary { expected: BoundaryTag::ReservoirWall, got: traction.tag });
    }
    traction.check_support(mesh)?;
    let mut load = vec![0.0; 3 * mesh.num_nodes()];
    let zero = [0.0; 3];
    for tri in mesh.boundary.iter().filter(|t| t.tag == BoundaryTag::ReservoirWall) {
        let area = mesh.tri_area(tri);
        let vals = tri.nodes.map(|v| *traction.values.get(&v).unwrap_or(&zero));
        for (a, &na) in tri.nodes.iter().enumerate() {
            for c in 0..3 {
                let mut s = 0.0;
                for (b, vb) in vals.iter().enumerate() {
                    let w = if a == b { 2.0 } else { 1.0 };
                    s += w * vb[c];
                }
                load[3 * na + c] += area / 12.0 * s;
            }
        }
    }
    Ok(load)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_box_with_cavity, BoxMeshSpec};

    const REF: [Point; 4] = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    fn apply(k: &ElementMatrix, u: &[f64; 12]) -> [f64; 12] {
        let mut out = [0.0; 12];
        for r in 0..12 {
            out[r] = (0..12).map(|c| k[r][c] * u[c]).sum();
        }
        out
    }

    fn skewed() -> [Point; 4] {
        [[0.1, -0.2, 0.3], [1.3, 0.1, 0.2], [0.2, 0.9, -0.1], [0.4, 0.3, 1.7]]
    }

    #[test]
    fn translation_is_in_kernel() {
        let k = element_stiffness(&skewed(), &MaterialParams::new(1.3, 0.7)).unwrap();
        for c in 0..3 {
            let mut u = [0.0; 12];
            for a in 0..4 {
                u[3 * a + c] = 1.0;
            }
            let f = apply(&k, &u);
            assert!(f.iter().all(|v| v.abs() < 1e-14), "{f:?}");
        }
    }

    #[test]
    fn rotation_is_in_kernel() {
        let x = skewed();
        let k = element_stiffness(&x, &MaterialParams::new(1.0, 1.0)).unwrap();
        let norm_k: f64 = k.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
        for w in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.3, -0.5, 0.8]] {
            let mut u = [0.0; 12];
            for a in 0..4 {
                let r = crate::mesh::cross(w, x[a]);
                u[3 * a..3 * a + 3].copy_from_slice(&r);
            }
            let f = apply(&k, &u);
            let un = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in f {
                assert!(v.abs() <= 1e-12 * norm_k * un);
            }
        }
    }

    #[test]
    fn element_matrix_is_exactly_symmetric() {
        let k = element_stiffness(&skewed(), &MaterialParams::new(2.0, 0.5)).unwrap();
        for r in 0..12 {
            for c in 0..12 {
                assert_eq!(k[r][c].to_bits(), k[c][r].to_bits());
            }
        }
    }

    #[test]
    fn degenerate_tet_rejected() {
        let flat = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        assert!(matches!(
            element_stiffness(&flat, &MaterialParams::new(1.0, 1.0)),
            Err(ElasticityError::DegenerateElement { .. })
        ));
    }

    #[test]
    fn material_validation() {
        assert!(MaterialParams::new(1.0, 0.0).validate().is_err());
        assert!(MaterialParams::new(-1.0, 1.0).validate().is_err());
        assert!(MaterialParams::new(-0.5, 1.0).validate().is_ok());
        let mut m = MaterialParams::new(1.0, 1.0);
        m.body_force = [0.0, 0.0, -9.8];
        assert!(m.validate().is_err());
    }

    #[test]
    fn one_tet_global_equals_element() {
        let mesh = Mesh::from_parts(REF.to_vec(), vec![[0, 1, 2, 3]], vec![]).unwrap();
        let mat = MaterialParams::new(1.0, 1.0);
        let kg = assemble_stiffness(&mesh, &mat).unwrap();
        let ke = element_stiffness(&REF, &mat).unwrap();
        for r in 0..12 {
            for c in 0..12 {
                assert_eq!(kg.get(r, c), ke[r][c]);
            }
        }
    }

    #[test]
    fn clamp_requires_base() {
        let mesh = Mesh::from_parts(REF.to_vec(), vec![[0, 1, 2, 3]], vec![]).unwrap();
        let k = assemble_stiffness(&mesh, &MaterialParams::new(1.0, 1.0)).unwrap();
        assert!(matches!(apply_clamp(&k, &mesh), Err(ElasticityError::NoClampedNodes)));
    }

    #[test]
    fn global_matrix_is_symmetric_and_translation_free() {
        let mesh = generate_box_with_cavity(&BoxMeshSpec {
            extents: [1.0, 2.0, 1.5],
            divisions: [3, 2, 2],
            cavity: None,
            bump: None,
        })
        .unwrap();
        let k = assemble_stiffness(&mesh, &MaterialParams::new(0.8, 1.1)).unwrap();
        for i in 0..k.dim() {
            let (cols, vals) = k.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                assert_eq!(v.to_bits(), k.get(c, i).to_bits());
            }
        }
        let mut u = vec![0.0; k.dim()];
        for n in 0..mesh.num_nodes() {
            u[3 * n + 1] = 1.0;
        }
        let f = k.matvec(&u);
        let scale = k.norm_inf();
        assert!(f.iter().all(|v| v.abs() <= 1e-12 * scale));
    }

    #[test]
    fn constant_traction_load() {
        let nodes = REF.to_vec();
        let mesh = Mesh::from_parts(nodes, vec![[0, 1, 2, 3]], vec![([1, 2, 3], BoundaryTag::ReservoirWall)]).unwrap();
        let mut field = BoundaryField::new(BoundaryTag::ReservoirWall);
        let t = [0.5, -1.0, 2.0];
        for v in 1..4 {
            field.values.insert(v, t);
        }
        let load = assemble_neumann_load(&mesh, &field).unwrap();
        let area = 3f64.sqrt() / 2.0;
        for v in 1..4 {
            for c in 0..3 {
                assert!((load[3 * v + c] - t[c] * area / 3.0).abs() < 1e-15);
            }
        }
        assert!(load[..3].iter().all(|&x| x == 0.0));

        let zero = assemble_neumann_load(&mesh, &BoundaryField::new(BoundaryTag::ReservoirWall)).unwrap();
        assert!(zero.iter().all(|&x| x == 0.0));

        let wrong = BoundaryField::new(BoundaryTag::ObservationSurface);
        assert!(matches!(assemble_neumann_load(&mesh, &wrong), Err(ElasticityError::WrongBoundary { .. })));
        let mut off = BoundaryField::new(BoundaryTag::ReservoirWall);
        off.values.insert(0, t);
        assert!(matches!(assemble_neumann_load(&mesh, &off), Err(ElasticityError::NodeNotOnBoundary { node: 0, .. })));
    }

    #[test]
    fn csv_round_trip() {
        let nodes = REF.to_vec();
        let mesh = Mesh::from_parts(nodes, vec![[0, 1, 2, 3]], vec![([1, 2, 3], BoundaryTag::ReservoirWall)]).unwrap();
        let mut field = BoundaryField::new(BoundaryTag::ReservoirWall);
        field.values.insert(2, [0.1, 1e-17, -3.0]);
        let mut buf = Vec::new();
        field.write_csv(&mesh, "test", &mut buf).unwrap();
        let back = BoundaryField::read_csv(BoundaryTag::ReservoirWall, &mesh, buf.as_slice()).unwrap();
        assert_eq!(back, field);
        let bad = "node_index,x,y,z,vx,vy,vz\n1,0,0,0,1,2\n";
        assert!(matches!(
            BoundaryField::read_csv(BoundaryTag::ReservoirWall, &mesh, bad.as_bytes()),
            Err(ElasticityError::Csv { line: 2, .. })
        ));
    }
}
