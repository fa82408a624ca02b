//! Recover the traction on the wall of an interior cavity of a linear-elastic
//! body from displacement observed on its exterior ground surface.
//!
//! The pipeline is: [`mesh`] builds or imports a tetrahedral mesh with tagged
//! boundary, [`elasticity`] assembles the P1 stiffness and surface loads,
//! [`partition`] splits the unclamped DOFs into reservoir-wall / interior /
//! observation blocks and applies the surface-response and harmonic-extension
//! maps through cached sparse factorizations, [`solvers`] provides the
//! scalar-generic Cholesky, GMRES and CG-on-normal-equations, and [`inverse`]
//! drives the adjoint-based inversion. Everything numerical is generic over
//! [`Scalar`], implemented for `f64` and the double-double
//! [`xprec::DoubleDouble`].
//!
//! [`synthetic`] builds the benchmark problems, and [`cli`] is the library
//! side of the `resinv` binary.

pub mod cli;
pub mod elasticity;
pub mod inverse;
pub mod mesh;
pub mod partition;
pub mod scalar;
pub mod solvers;
pub mod synthetic;
pub mod xprec;

pub use scalar::{Scalar, ScalarKind};
pub use xprec::DoubleDouble;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
