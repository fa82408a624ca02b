use crate::scalar::{vecops, Scalar};

use super::{AdjointPair, Iterate, SolveReport, SolverError, Termination};

/// Conjugate gradients on `AᵀA x = Aᵀb` in the CGLS arrangement: the
/// residual is carried in data space and mapped back with the transpose,
/// so every iterate stays in the range of `Aᵀ`. From a zero start this
/// converges to the minimum-norm least-squares solution.
///
/// Reported residuals are true normal-equation residuals
/// `‖Aᵀ(b - A x_k)‖ / ‖Aᵀb‖`, recomputed each step.
pub fn cg_normal<S: Scalar, Op: AdjointPair<S> + ?Sized>(
    op: &Op,
    rhs: &[S],
    tol: f64,
    max_iter: usize,
    monitor: &mut dyn FnMut(&Iterate<'_, S>),
) -> Result<(Vec<S>, SolveReport), SolverError> {
    if rhs.len() != op.rows() {
        return Err(SolverError::DimensionMismatch { expected: op.rows(), got: rhs.len() });
    }
    if max_iter == 0 {
        return Err(SolverError::InvalidArgument("max_iter must be at least 1".into()));
    }
    let mut x = vec![S::zero(); op.cols()];
    let mut r = rhs.to_vec();
    let mut s = op.normal_residual(&x, rhs);
    let s0 = vecops::norm(&s);
    let mut report = SolveReport {
        iterations: 0,
        residuals: vec![1.0],
        termination: Termination::MaxIterations,
        orthogonality_loss: 0.0,
        orthogonality_flagged: false,
    };
    if s0 == S::zero() {
        report.residuals[0] = 0.0;
        report.termination = Termination::Tolerance;
        monitor(&Iterate { iter: 0, x: &x, residual: 0.0 });
        return Ok((x, report));
    }
    monitor(&Iterate { iter: 0, x: &x, residual: 1.0 });

    let mut p = s.clone();
    let mut gamma = vecops::dot(&s, &s);
    for k in 1..=max_iter {
        let q = op.forward(&p);
        let delta = vecops::dot(&q, &q);
        if !(delta > S::zero()) {
            report.termination = Termination::Breakdown;
            break;
        }
        let alpha = gamma / delta;
        vecops::axpy(alpha, &p, &mut x);
        vecops::axpy(-alpha, &q, &mut r);
        s = op.transpose(&r);

        let true_s = op.normal_residual(&x, rhs);
        let rel = (vecops::norm(&true_s) / s0).to_f64();
        report.iterations = k;
        report.residuals.push(rel);
        monitor(&Iterate { iter: k, x: &x, residual: rel });
        if rel <= tol {
            report.termination = Termination::Tolerance;
            break;
        }

        let gamma_new = vecops::dot(&s, &s);
        if gamma_new == S::zero() {
            report.termination = Termination::HappyBreakdown;
            break;
        }
        let beta = gamma_new / gamma;
        gamma = gamma_new;
        for (pi, &si) in p.iter_mut().zip(&s) {
            *pi = si + beta * *pi;
        }
    }
    Ok((x, report))
}
