use crate::scalar::{vecops, Scalar};

use super::{Iterate, LinearOperator, SolveReport, SolverError, Termination};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    /// Stop once the relative true residual drops to this value.
    pub tol: f64,
    pub max_iter: usize,
    /// Flag the report when basis vectors lose orthogonality beyond this.
    pub orthogonality_tol: f64,
}

impl GmresOptions {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        GmresOptions { tol, max_iter, orthogonality_tol: 1e-8 }
    }
}

/// Full (unrestarted) GMRES from a zero initial guess.
///
/// Arnoldi uses modified Gram-Schmidt followed by one reorthogonalization
/// pass. After every step the iterate is rebuilt from the basis and its
/// residual is recomputed through [`LinearOperator::residual`], so the
/// reported history is the true one rather than the Hessenberg estimate.
pub fn gmres<S: Scalar, Op: LinearOperator<S> + ?Sized>(
    op: &Op,
    rhs: &[S],
    opts: &GmresOptions,
    monitor: &mut dyn FnMut(&Iterate<'_, S>),
) -> Result<(Vec<S>, SolveReport), SolverError> {
    let n = op.dim();
    if rhs.len() != n {
        return Err(SolverError::DimensionMismatch { expected: n, got: rhs.len() });
    }
    if opts.max_iter == 0 {
        return Err(SolverError::InvalidArgument("max_iter must be at least 1".into()));
    }

    let mut x = vec![S::zero(); n];
    let r0 = op.residual(&x, rhs);
    let beta = vecops::norm(&r0);
    let mut report = SolveReport {
        iterations: 0,
        residuals: vec![1.0],
        termination: Termination::MaxIterations,
        orthogonality_loss: 0.0,
        orthogonality_flagged: false,
    };
    if beta == S::zero() {
        report.residuals[0] = 0.0;
        report.termination = Termination::Tolerance;
        monitor(&Iterate { iter: 0, x: &x, residual: 0.0 });
        return Ok((x, report));
    }
    monitor(&Iterate { iter: 0, x: &x, residual: 1.0 });

    let inv_beta = S::one() / beta;
    let mut basis: Vec<Vec<S>> = vec![r0.iter().map(|&v| v * inv_beta).collect()];
    // columns of the rotated Hessenberg matrix, i.e. the triangular factor
    let mut rcols: Vec<Vec<S>> = Vec::new();
    let mut cs: Vec<(S, S)> = Vec::new();
    let mut g = vec![beta];

    for j in 0..opts.max_iter {
        let mut w = op.apply(&basis[j]);
        let w_norm0 = vecops::norm(&w);
        let mut h = vec![S::zero(); j + 2];
        for _pass in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = vecops::dot(&w, v);
                h[i] += c;
                vecops::axpy(-c, v, &mut w);
            }
        }
        let h_next = vecops::norm(&w);
        h[j + 1] = h_next;
        let happy = h_next <= S::from_f64(S::EPSILON) * w_norm0;

        for (i, &(c, s)) in cs.iter().enumerate() {
            let (a, b) = (h[i], h[i + 1]);
            h[i] = c * a + s * b;
            h[i + 1] = c * b - s * a;
        }
        let (a, b) = (h[j], h[j + 1]);
        let rho = (a * a + b * b).sqrt();
        // A vanishing diagonal makes the least-squares problem rank
        // deficient; the previous iterate is kept.
        if rho <= S::from_f64(S::EPSILON) * w_norm0 {
            report.termination = Termination::Breakdown;
            break;
        }
        let (c, s) = (a / rho, b / rho);
        cs.push((c, s));
        h[j] = rho;
        h.truncate(j + 1);
        rcols.push(h);
        let gj = g[j];
        g[j] = c * gj;
        g.push(-s * gj);

        // back substitution on the (j+1)x(j+1) triangle
        let m = j + 1;
        let mut y = g[..m].to_vec();
        for i in (0..m).rev() {
            let yi = y[i] / rcols[i][i];
            y[i] = yi;
            for (k, yk) in y.iter_mut().enumerate().take(i) {
                *yk -= rcols[i][k] * yi;
            }
        }
        x.iter_mut().for_each(|v| *v = S::zero());
        for (k, v) in basis.iter().enumerate() {
            vecops::axpy(y[k], v, &mut x);
        }
        let r = op.residual(&x, rhs);
        let rel = (vecops::norm(&r) / beta).to_f64();
        report.iterations = m;
        report.residuals.push(rel);
        monitor(&Iterate { iter: m, x: &x, residual: rel });

        if rel <= opts.tol {
            report.termination = Termination::Tolerance;
            break;
        }
        if happy {
            report.termination = Termination::HappyBreakdown;
            break;
        }
        if m == n {
            report.termination = Termination::KrylovExhausted;
            break;
        }

        let inv = S::one() / h_next;
        w.iter_mut().for_each(|v| *v *= inv);
        let loss = basis.iter().map(|v| vecops::dot(&w, v).abs().to_f64()).fold(0.0, f64::max);
        report.orthogonality_loss = report.orthogonality_loss.max(loss);
        if loss > opts.orthogonality_tol {
            report.orthogonality_flagged = true;
        }
        basis.push(w);
    }
    Ok((x, report))
}
