//! Splitting of the clamped DOFs into reservoir-wall (Λ₁), interior (Λ₂) and
//! observation-surface (Λ₃) blocks, and the matrix-free block operators built
//! on two cached Cholesky factorizations.
//!
//! With `K` the clamped stiffness and `R₁`, `R₃` the restrictions onto the
//! wall and surface blocks:
//!
//! * the forward map is `A = R₃ K⁻¹ R₁ᵀ`;
//! * the harmonic extension of a surface trace `u₃` solves the interior
//!   block system `K_II u_I = -K_I3 u₃`, `I = Λ₁ ∪ Λ₂`;
//! * `B₁₃` takes `u₃` to the Λ₁ part of that extension, and the variational
//!   operator is `M = B₁₃ A`.

use std::io::{self, Write};

use thiserror::Error;

use crate::elasticity::{DofMap, SparseSymmetricMatrix};
use crate::mesh::{BoundaryTag, Mesh};
use crate::scalar::{vecops, Scalar};
use crate::solvers::{SolverError, SparseCholesky};

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("node {node} lies on both the reservoir wall and the observation surface")]
    ContactNode { node: usize },
    #[error(
        "stiffness couples wall DOF {wall_dof} to surface DOF {surface_dof}; \
         at least one interior element layer is needed between them (mesh too coarse)"
    )]
    Coupling { wall_dof: usize, surface_dof: usize },
    #[error("the {0} block is empty")]
    EmptyBlock(&'static str),
    #[error("DOF map does not match the mesh ({dofs} DOFs for {nodes} nodes)")]
    DofMapMismatch { dofs: usize, nodes: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Which block a retained DOF belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Wall,
    Interior,
    Surface,
}

/// Disjoint, ordered lists of retained DOF indices. Wall and surface blocks
/// are node-major: entries `3k..3k+3` are the components of node
/// `wall_nodes[k]` (resp. `surface_nodes[k]`).
#[derive(Debug, Clone, PartialEq)]
pub struct DofPartition {
    pub lambda1: Vec<usize>,
    pub lambda2: Vec<usize>,
    pub lambda3: Vec<usize>,
    pub wall_nodes: Vec<usize>,
    pub surface_nodes: Vec<usize>,
    /// Mesh node of every retained DOF, and its component.
    pub dof_node: Vec<(usize, usize)>,
}

impl DofPartition {
    pub fn n1(&self) -> usize {
        self.lambda1.len()
    }
    pub fn n2(&self) -> usize {
        self.lambda2.len()
    }
    pub fn n3(&self) -> usize {
        self.lambda3.len()
    }
    pub fn total(&self) -> usize {
        self.n1() + self.n2() + self.n3()
    }

    /// Writes `block,dof,node,component` rows for debugging.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "block,dof,node,component")?;
        for (name, list) in [("wall", &self.lambda1), ("interior", &self.lambda2), ("surface", &self.lambda3)] {
            for &d in list.iter() {
                let (node, c) = self.dof_node[d];
                writeln!(w, "{name},{d},{node},{c}")?;
            }
        }
        Ok(())
    }
}

/// Assigns every retained DOF to a block and checks that no stiffness entry
/// couples the wall and surface blocks.
pub fn partition_dofs(mesh: &Mesh, clamp: &DofMap, stiffness: &SparseSymmetricMatrix) -> Result<DofPartition, PartitionError> {
    if clamp.position.len() != 3 * mesh.num_nodes() || stiffness.dim() != clamp.len() {
        return Err(PartitionError::DofMapMismatch { dofs: clamp.position.len(), nodes: mesh.num_nodes() });
    }
    let tags = mesh.node_tags();
    let mut block_of_node = vec![None; mesh.num_nodes()];
    for (v, t) in tags.iter().enumerate() {
        if clamp.position[3 * v].is_none() {
            continue;
        }
        let wall = t.contains(BoundaryTag::ReservoirWall);
        let surface = t.contains(BoundaryTag::ObservationSurface);
        block_of_node[v] = Some(match (wall, surface) {
            (true, true) => return Err(PartitionError::ContactNode { node: v }),
            (true, false) => Block::Wall,
            (false, true) => Block::Surface,
            (false, false) => Block::Interior,
        });
    }

    let mut p = DofPartition {
        lambda1: Vec::new(),
        lambda2: Vec::new(),
        lambda3: Vec::new(),
        wall_nodes: Vec::new(),
        surface_nodes: Vec::new(),
        dof_node: clamp.retained.iter().map(|&d| (d / 3, d % 3)).collect(),
    };
    for (v, b) in block_of_node.iter().enumerate() {
        let Some(b) = b else { continue };
        let dofs = (0..3).map(|c| clamp.position[3 * v + c].expect("whole nodes are clamped"));
        match b {
            Block::Wall => {
                p.wall_nodes.push(v);
                p.lambda1.extend(dofs);
            }
            Block::Surface => {
                p.surface_nodes.push(v);
                p.lambda3.extend(dofs);
            }
            Block::Interior => p.lambda2.extend(dofs),
        }
    }
    if p.lambda1.is_empty() {
        return Err(PartitionError::EmptyBlock("reservoir-wall"));
    }
    if p.lambda3.is_empty() {
        return Err(PartitionError::EmptyBlock("observation-surface"));
    }

    let mut is_surface = vec![false; stiffness.dim()];
    for &d in &p.lambda3 {
        is_surface[d] = true;
    }
    for &d in &p.lambda1 {
        let (cols, vals) = stiffness.row(d);
        if let Some((&c, _)) = cols.iter().zip(vals).find(|(&c, &v)| is_surface[c] && v != 0.0) {
            return Err(PartitionError::Coupling { wall_dof: d, surface_dof: c });
        }
    }
    Ok(p)
}

/// Cached factorizations of the full clamped stiffness and of its interior
/// block, plus the data needed to apply every inversion operator.
#[derive(Debug)]
pub struct BlockOperators<S> {
    stiffness: SparseSymmetricMatrix,
    partition: DofPartition,
    full: SparseCholesky<S>,
    interior: SparseCholesky<S>,
    /// `I = Λ₁ ∪ Λ₂` in that order.
    interior_dofs: Vec<usize>,
    /// Nonzeros of `K_I3` as (interior row, surface column, value).
    coupling: Vec<(usize, usize, f64)>,
}

impl<S: Scalar> BlockOperators<S> {
    pub fn new(stiffness: SparseSymmetricMatrix, partition: DofPartition) -> Result<Self, PartitionError> {
        let full = SparseCholesky::factor(&stiffness)?;
        let interior_dofs: Vec<usize> = partition.lambda1.iter().chain(&partition.lambda2).copied().collect();
        let interior = SparseCholesky::factor(&stiffness.principal_submatrix(&interior_dofs))?;
        let mut surface_pos = vec![usize::MAX; stiffness.dim()];
        for (k, &d) in partition.lambda3.iter().enumerate() {
            surface_pos[d] = k;
        }
        let mut coupling = Vec::new();
        for (i, &d) in interior_dofs.iter().enumerate() {
            let (cols, vals) = stiffness.row(d);
            for (&c, &v) in cols.iter().zip(vals) {
                if surface_pos[c] != usize::MAX {
                    coupling.push((i, surface_pos[c], v));
                }
            }
        }
        Ok(BlockOperators { stiffness, partition, full, interior, interior_dofs, coupling })
    }

    pub fn partition(&self) -> &DofPartition {
        &self.partition
    }

    pub fn stiffness(&self) -> &SparseSymmetricMatrix {
        &self.stiffness
    }

    /// Nonzeros of the two Cholesky factors.
    pub fn factor_nnz(&self) -> (usize, usize) {
        (self.full.nnz(), self.interior.nnz())
    }

    /// Full retained displacement for a load on the wall DOFs.
    pub fn solve_wall_load(&self, g1: &[S]) -> Vec<S> {
        assert_eq!(g1.len(), self.partition.n1(), "wall vector has the wrong length");
        let mut rhs = vec![S::zero(); self.stiffness.dim()];
        for (&d, &v) in self.partition.lambda1.iter().zip(g1) {
            rhs[d] = v;
        }
        self.full.solve(&rhs)
    }

    /// `A g₁`: surface displacement caused by the wall load `g₁`.
    pub fn apply_forward(&self, g1: &[S]) -> Vec<S> {
        let u = self.solve_wall_load(g1);
        self.partition.lambda3.iter().map(|&d| u[d]).collect()
    }

    /// `Aᵀ w₃`.
    pub fn apply_forward_transpose(&self, w3: &[S]) -> Vec<S> {
        assert_eq!(w3.len(), self.partition.n3(), "surface vector has the wrong length");
        let mut rhs = vec![S::zero(); self.stiffness.dim()];
        for (&d, &v) in self.partition.lambda3.iter().zip(w3) {
            rhs[d] = v;
        }
        let z = self.full.solve(&rhs);
        self.partition.lambda1.iter().map(|&d| z[d]).collect()
    }

    /// Minimum-energy extension of a surface trace, returned as `(u₁, u₂)`.
    pub fn harmonic_extension(&self, u3: &[S]) -> (Vec<S>, Vec<S>) {
        let mut ui = self.interior_solution(u3);
        let u2 = ui.split_off(self.partition.n1());
        (ui, u2)
    }

    fn interior_solution(&self, u3: &[S]) -> Vec<S> {
        assert_eq!(u3.len(), self.partition.n3(), "surface vector has the wrong length");
        let mut rhs = vec![S::zero(); self.interior_dofs.len()];
        for &(i, j, v) in &self.coupling {
            rhs[i] -= u3[j].mul_f64(v);
        }
        self.interior.solve(&rhs)
    }

    /// The extension of `u₃` as a full retained-DOF vector.
    pub fn extension_field(&self, u3: &[S]) -> Vec<S> {
        let ui = self.interior_solution(u3);
        let mut u = vec![S::zero(); self.stiffness.dim()];
        for (&d, &v) in self.interior_dofs.iter().zip(&ui) {
            u[d] = v;
        }
        for (&d, &v) in self.partition.lambda3.iter().zip(u3) {
            u[d] = v;
        }
        u
    }

    /// `B₁₃ w₃`: wall trace of the harmonic extension.
    pub fn apply_extension_trace(&self, w3: &[S]) -> Vec<S> {
        let mut ui = self.interior_solution(w3);
        ui.truncate(self.partition.n1());
        ui
    }

    /// `M g₁ = B₁₃ A g₁`.
    pub fn apply_variational_operator(&self, g1: &[S]) -> Vec<S> {
        self.apply_extension_trace(&self.apply_forward(g1))
    }

    /// Elastic energy `w̃ᵀ K w̃` of the harmonic extension of `w₃`, the
    /// squared trace norm used by the cost function.
    pub fn h_half_norm_sq(&self, w3: &[S]) -> S {
        self.extension_energy(w3).0
    }

    /// Energy of the extension together with its wall trace, from one
    /// interior solve.
    pub fn extension_energy(&self, w3: &[S]) -> (S, Vec<S>) {
        let u = self.extension_field(w3);
        let energy = self.stiffness.quad_form(&u);
        let trace = self.partition.lambda1.iter().map(|&d| u[d]).collect();
        (energy, trace)
    }

    /// `‖K u - f‖` restricted to the interior rows, for checking extensions.
    pub fn interior_row_residual(&self, u: &[S]) -> S {
        let ku = self.stiffness.matvec(u);
        let r: Vec<S> = self.interior_dofs.iter().map(|&d| ku[d]).collect();
        vecops::norm(&r)
    }
}
