//! Inversion drivers: the misfit cost, its adjoint gradient, the variational
//! and normal-equation solves, node aggregation and convergence histories.
//!
//! Wall unknowns are load-vector coefficients on Λ₁ and the duality pairing
//! is the Euclidean one on those coefficients, so the gradient of
//! `J(g) = ½‖A g - u*‖²` (trace norm of the harmonic extension) is
//! `B₁₃(A g - u*)` and its stationarity condition is `B₁₃ A g = B₁₃ u*`.

mod aggregation;
mod record;

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::partition::BlockOperators;
use crate::scalar::{vecops, Scalar, ScalarKind};
use crate::solvers::{cg_normal, gmres, AdjointPair, GmresOptions, LinearOperator, SolveReport, SolverError};

pub use aggregation::{build_aggregation, AggregationMap};
pub use record::{ConvergenceRecord, RecordRow};

#[derive(Debug, Error)]
pub enum InverseError {
    #[error("invalid inversion config: {0}")]
    Config(String),
    #[error("{what} has length {got}, expected {expected}")]
    Shape { what: &'static str, expected: usize, got: usize },
    #[error(
        "cannot aggregate {n1} wall DOFs into {target} clusters: need 1 <= clusters <= wall nodes \
         and 3 * clusters <= {n3} surface DOFs"
    )]
    Aggregation { n1: usize, n3: usize, target: usize },
    #[error("config asks for {config} arithmetic but the operators are {operators}")]
    ScalarMismatch { config: ScalarKind, operators: ScalarKind },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Variational,
    NormalEquation,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Variational => "variational",
            Method::NormalEquation => "normal",
        })
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "variational" => Ok(Method::Variational),
            "normal" | "normal_equation" | "normal-equation" => Ok(Method::NormalEquation),
            other => Err(format!("unknown method `{other}` (expected variational|normal)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionConfig {
    pub method: Method,
    pub scalar: ScalarKind,
    pub max_iter: usize,
    /// Relative residual at which to stop early; `None` runs to `max_iter`.
    pub tolerance: Option<f64>,
    /// Number of node clusters, or `None` for no aggregation.
    pub aggregation: Option<usize>,
    /// Evaluate J and the surface misfit at every iterate.
    pub track_cost: bool,
}

impl InversionConfig {
    pub fn new(method: Method, scalar: ScalarKind, max_iter: usize) -> Self {
        InversionConfig { method, scalar, max_iter, tolerance: None, aggregation: None, track_cost: true }
    }

    pub fn validate(&self) -> Result<(), InverseError> {
        if self.max_iter == 0 {
            return Err(InverseError::Config("max_iter must be at least 1".into()));
        }
        if let Some(t) = self.tolerance {
            if !(t >= 0.0) {
                return Err(InverseError::Config(format!("tolerance must be non-negative, got {t}")));
            }
        }
        if self.aggregation == Some(0) {
            return Err(InverseError::Config("aggregation needs at least one cluster".into()));
        }
        Ok(())
    }

    /// `key = value` lines for the run-metadata file.
    pub fn describe(&self) -> String {
        let agg = self.aggregation.map_or("off".to_string(), |k| k.to_string());
        let tol = self.tolerance.map_or("none".to_string(), |t| format!("{t:e}"));
        format!(
            "method = {}\nscalar = {}\nmax_iter = {}\ntolerance = {tol}\naggregation = {agg}\ninitial_guess = zero\n",
            self.method, self.scalar, self.max_iter
        )
    }
}

fn check_len(what: &'static str, v: usize, expected: usize) -> Result<(), InverseError> {
    if v == expected {
        Ok(())
    } else {
        Err(InverseError::Shape { what, expected, got: v })
    }
}

/// `J(g) = ½ ‖A g - u*‖²` in the harmonic-extension energy norm.
pub fn evaluate_cost<S: Scalar>(ops: &BlockOperators<S>, g: &[S], u_star: &[S]) -> S {
    let w = vecops::sub(&ops.apply_forward(g), u_star);
    ops.h_half_norm_sq(&w) * S::from_f64(0.5)
}

/// `B₁₃ w₃`, the wall trace of the harmonic extension of surface data.
pub fn adjoint_trace<S: Scalar>(ops: &BlockOperators<S>, w3: &[S]) -> Vec<S> {
    ops.apply_extension_trace(w3)
}

/// Gradient of [`evaluate_cost`] under the Euclidean pairing on Λ₁:
/// `B₁₃ A g - B₁₃ u*`, formed from one forward solve and one extension.
pub fn gradient<S: Scalar>(ops: &BlockOperators<S>, g: &[S], u_star: &[S]) -> Vec<S> {
    let w = vecops::sub(&ops.apply_forward(g), u_star);
    ops.apply_extension_trace(&w)
}

/// Cost and misfit evaluated as a by-product of a residual computation.
#[derive(Debug, Clone, Copy, Default)]
struct Diagnostics {
    cost: f64,
    misfit: f64,
}

/// `Pᵀ M P` on cluster unknowns (or `M` itself without aggregation).
struct VariationalSystem<'a, S> {
    ops: &'a BlockOperators<S>,
    agg: Option<&'a AggregationMap>,
    u_star: &'a [S],
    u_star_norm: f64,
    track: bool,
    last: Cell<Diagnostics>,
}

impl<S: Scalar> VariationalSystem<'_, S> {
    fn prolong(&self, c: &[S]) -> Vec<S> {
        self.agg.map_or_else(|| c.to_vec(), |a| a.prolong(c))
    }
    fn restrict(&self, g: Vec<S>) -> Vec<S> {
        match self.agg {
            Some(a) => a.restrict(&g),
            None => g,
        }
    }
}

impl<S: Scalar> LinearOperator<S> for VariationalSystem<'_, S> {
    fn dim(&self) -> usize {
        self.agg.map_or(self.ops.partition().n1(), AggregationMap::dim)
    }

    fn apply(&self, c: &[S]) -> Vec<S> {
        self.restrict(self.ops.apply_variational_operator(&self.prolong(c)))
    }

    // b - Pᵀ B₁₃ A P c = -Pᵀ B₁₃ (A P c - u*), and the same extension gives J.
    fn residual(&self, c: &[S], b: &[S]) -> Vec<S> {
        if !self.track {
            return vecops::sub(b, &self.apply(c));
        }
        let w = vecops::sub(&self.ops.apply_forward(&self.prolong(c)), self.u_star);
        let (energy, trace) = self.ops.extension_energy(&w);
        self.last.set(Diagnostics {
            cost: 0.5 * energy.to_f64(),
            misfit: relative(vecops::norm(&w).to_f64(), self.u_star_norm),
        });
        self.restrict(trace).into_iter().map(|v| -v).collect()
    }
}

impl<S: Scalar> AdjointPair<S> for VariationalSystem<'_, S> {
    fn cols(&self) -> usize {
        LinearOperator::dim(self)
    }
    fn rows(&self) -> usize {
        self.ops.partition().n3()
    }
    fn forward(&self, c: &[S]) -> Vec<S> {
        self.ops.apply_forward(&self.prolong(c))
    }
    fn transpose(&self, w: &[S]) -> Vec<S> {
        self.restrict(self.ops.apply_forward_transpose(w))
    }

    fn normal_residual(&self, c: &[S], b: &[S]) -> Vec<S> {
        let w = vecops::sub(b, &self.forward(c));
        if self.track {
            self.last.set(Diagnostics {
                cost: 0.5 * self.ops.h_half_norm_sq(&w).to_f64(),
                misfit: relative(vecops::norm(&w).to_f64(), self.u_star_norm),
            });
        }
        self.transpose(&w)
    }
}

fn relative(x: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        x
    } else {
        x / scale
    }
}

/// Result of one inversion run.
#[derive(Debug, Clone)]
pub struct Inversion {
    /// Estimated wall load coefficients (Λ₁, node-major).
    pub estimate: Vec<f64>,
    pub record: ConvergenceRecord,
    pub report: SolveReport,
}

/// Solves `Pᵀ B₁₃ A P c = Pᵀ B₁₃ u*` with GMRES and returns `g = P c`.
///
/// `truth`, when given, is the true Λ₁ load used for the traction-error
/// series.
pub fn invert_variational<S: Scalar>(
    ops: &BlockOperators<S>,
    u_star: &[f64],
    config: &InversionConfig,
    aggregation: Option<&AggregationMap>,
    truth: Option<&[f64]>,
) -> Result<Inversion, InverseError> {
    if config.method != Method::Variational {
        return Err(InverseError::Config("invert_variational needs method = variational".into()));
    }
    run(ops, u_star, config, aggregation, truth)
}

/// Solves the normal equation `(AP)ᵀ(AP) c = (AP)ᵀ u*` with CG.
pub fn invert_normal<S: Scalar>(
    ops: &BlockOperators<S>,
    u_star: &[f64],
    config: &InversionConfig,
    aggregation: Option<&AggregationMap>,
    truth: Option<&[f64]>,
) -> Result<Inversion, InverseError> {
    if config.method != Method::NormalEquation {
        return Err(InverseError::Config("invert_normal needs method = normal".into()));
    }
    run(ops, u_star, config, aggregation, truth)
}

fn run<S: Scalar>(
    ops: &BlockOperators<S>,
    u_star: &[f64],
    config: &InversionConfig,
    aggregation: Option<&AggregationMap>,
    truth: Option<&[f64]>,
) -> Result<Inversion, InverseError> {
    config.validate()?;
    if config.scalar != S::KIND {
        return Err(InverseError::ScalarMismatch { config: config.scalar, operators: S::KIND });
    }
    let p = ops.partition();
    check_len("observation", u_star.len(), p.n3())?;
    if let Some(t) = truth {
        check_len("true traction", t.len(), p.n1())?;
    }
    if let Some(a) = aggregation {
        check_len("aggregation map", a.cluster_of.len(), p.wall_nodes.len())?;
        if config.aggregation.is_some_and(|k| k != a.num_clusters()) {
            return Err(InverseError::Config("aggregation map does not match the configured cluster count".into()));
        }
    }
    let u_star_s: Vec<S> = vecops::promote(u_star);
    let sys = VariationalSystem {
        ops,
        agg: aggregation,
        u_star: &u_star_s,
        u_star_norm: vecops::norm_f64(u_star),
        track: config.track_cost,
        last: Cell::new(Diagnostics::default()),
    };
    let truth_norm = truth.map(vecops::norm_f64);
    let mut record = ConvergenceRecord::default();
    let mut monitor = |it: &crate::solvers::Iterate<'_, S>| {
        let traction_err = truth.map(|t| {
            let g = vecops::demote(&sys.prolong(it.x));
            let d: f64 = g.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            relative(d, truth_norm.unwrap_or(0.0))
        });
        let diag = config.track_cost.then(|| sys.last.get());
        record.rows.push(RecordRow {
            iter: it.iter,
            residual: it.residual,
            cost: diag.map(|d| d.cost),
            traction_err,
            disp_err: diag.map(|d| d.misfit),
        });
    };
    let tol = config.tolerance.unwrap_or(0.0);
    let (c, report) = match config.method {
        Method::Variational => {
            let rhs = sys.restrict(ops.apply_extension_trace(&u_star_s));
            gmres(&sys, &rhs, &GmresOptions::new(tol, config.max_iter), &mut monitor)?
        }
        Method::NormalEquation => cg_normal(&sys, &u_star_s, tol, config.max_iter, &mut monitor)?,
    };
    Ok(Inversion { estimate: vecops::demote(&sys.prolong(&c)), record, report })
}

/// Outcome of a finite-difference check of [`gradient`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheck {
    /// `|fd - ⟨δ, ∇J⟩| / |⟨δ, ∇J⟩|` per direction.
    pub errors: Vec<f64>,
}

impl GradientCheck {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

/// Seeded random wall vector with unit-variance Gaussian entries.
pub fn random_wall_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Compares `⟨δ, ∇J(g)⟩` with `(J(g + εδ) - J(g - εδ)) / 2ε` for
/// `directions` seeded random `δ`, with `ε = rel_step · ‖g‖ / ‖δ‖`.
pub fn check_gradient<S: Scalar>(
    ops: &BlockOperators<S>,
    g: &[f64],
    u_star: &[f64],
    directions: usize,
    rel_step: f64,
    seed: u64,
) -> Result<GradientCheck, InverseError> {
    let p = ops.partition();
    check_len("wall vector", g.len(), p.n1())?;
    check_len("observation", u_star.len(), p.n3())?;
    let gs: Vec<S> = vecops::promote(g);
    let us: Vec<S> = vecops::promote(u_star);
    let grad = gradient(ops, &gs, &us);
    let g_norm = vecops::norm_f64(g);
    let mut errors = Vec::with_capacity(directions);
    for k in 0..directions {
        let delta = random_wall_vector(p.n1(), seed.wrapping_add(k as u64));
        let eps = rel_step * if g_norm > 0.0 { g_norm } else { 1.0 } / vecops::norm_f64(&delta);
        let ds: Vec<S> = delta.iter().map(|&d| S::from_f64(d * eps)).collect();
        let plus: Vec<S> = gs.iter().zip(&ds).map(|(&a, &b)| a + b).collect();
        let minus: Vec<S> = gs.iter().zip(&ds).map(|(&a, &b)| a - b).collect();
        let fd = (evaluate_cost(ops, &plus, &us) - evaluate_cost(ops, &minus, &us)) / S::from_f64(2.0);
        let exact = vecops::dot(&ds, &grad);
        errors.push(((fd - exact).abs() / exact.abs()).to_f64());
    }
    Ok(GradientCheck { errors })
}
