//! Element and patch checks shared by the FEM tests and the acceptance run.

use nalgebra::{DMatrix, DVector};
use reservoir_inversion::elasticity::{apply_clamp, assemble_stiffness, element_stiffness, MaterialParams};
use reservoir_inversion::mesh::{generate_box_with_cavity, BoundaryTag, BoxMeshSpec, Point};
use reservoir_inversion::solvers::SparseCholesky;

pub fn sample_tets() -> Vec<[Point; 4]> {
    vec![
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        [[0.3, -0.2, 0.1], [1.7, 0.4, -0.3], [0.2, 1.1, 0.5], [0.6, 0.3, 2.2]],
        [[-1.0, 2.0, 0.5], [-0.2, 2.3, 0.4], [-0.9, 3.1, 0.7], [-0.8, 2.2, 1.9]],
    ]
}

pub fn element_matrix(x: &[Point; 4], lam: f64, mu: f64) -> DMatrix<f64> {
    let k = element_stiffness(x, &MaterialParams::new(lam, mu)).unwrap();
    DMatrix::from_fn(12, 12, |r, c| k[r][c])
}

/// The six rigid motions of a tetrahedron as 12-vectors.
pub fn rigid_modes(x: &[Point; 4]) -> Vec<DVector<f64>> {
    let mut modes: Vec<DVector<f64>> =
        (0..3).map(|t| DVector::from_fn(12, |i, _| if i % 3 == t { 1.0 } else { 0.0 })).collect();
    for w in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
        modes.push(DVector::from_fn(12, |i, _| {
            let p = x[i / 3];
            let rot = [w[1] * p[2] - w[2] * p[1], w[2] * p[0] - w[0] * p[2], w[0] * p[1] - w[1] * p[0]];
            rot[i % 3]
        }));
    }
    modes
}

/// Outcome of the element kernel check over [`sample_tets`].
pub struct KernelCheck {
    /// Largest `‖K r‖ / (‖K‖ ‖r‖)` over the rigid modes `r`.
    pub rigid_residual: f64,
    /// Eigenvalues below `1e-12 · λ_max`, per element.
    pub kernel_dims: Vec<usize>,
    /// Smallest nonzero eigenvalue over `λ_max`.
    pub gap: f64,
}

pub fn element_kernel_check() -> KernelCheck {
    let mut check = KernelCheck { rigid_residual: 0.0, kernel_dims: Vec::new(), gap: f64::INFINITY };
    for x in sample_tets() {
        let km = element_matrix(&x, 1.0, 1.0);
        let scale = km.norm();
        for r in rigid_modes(&x) {
            check.rigid_residual = check.rigid_residual.max((&km * &r).norm() / (scale * r.norm()));
        }
        let mut eig: Vec<f64> = km.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let top = eig[11];
        let dim = eig.iter().filter(|e| e.abs() < 1e-12 * top).count();
        check.kernel_dims.push(dim);
        if dim < 12 {
            check.gap = check.gap.min(eig[dim] / top);
        }
    }
    check
}

/// Largest nodal error of a uniaxial column under uniform top traction.
///
/// With λ = 0 there is no Poisson effect, so the clamped base does not
/// disturb the uniaxial state and `u_z = τ (z - z0) / 2μ` exactly.
pub fn patch_test_error() -> f64 {
    let (tau, mu) = (0.25, 1.7);
    let spec = BoxMeshSpec { extents: [1.0, 2.0, 3.0], divisions: [3, 2, 5], cavity: None, bump: None };
    let mesh = generate_box_with_cavity(&spec).unwrap();
    let k = assemble_stiffness(&mesh, &MaterialParams::new(0.0, mu)).unwrap();
    let (reduced, dofs) = apply_clamp(&k, &mesh).unwrap();
    let mut load = vec![0.0; 3 * mesh.num_nodes()];
    for tri in mesh.boundary.iter().filter(|t| t.tag == BoundaryTag::ObservationSurface) {
        let share = tau * mesh.tri_area(tri) / 3.0;
        for &v in &tri.nodes {
            load[3 * v + 2] += share;
        }
    }
    let chol = SparseCholesky::<f64>::factor(&reduced).unwrap();
    let u = dofs.extend(&chol.solve(&dofs.restrict(&load)));
    let (lo, _) = mesh.bounding_box();
    let mut err: f64 = 0.0;
    for (v, p) in mesh.nodes.iter().enumerate() {
        let exact = [0.0, 0.0, tau * (p[2] - lo[2]) / (2.0 * mu)];
        for c in 0..3 {
            err = err.max((u[3 * v + c] - exact[c]).abs());
        }
    }
    err
}
