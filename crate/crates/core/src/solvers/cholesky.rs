use crate::elasticity::SparseSymmetricMatrix;
use crate::scalar::Scalar;

use super::SolverError;

const NONE: usize = usize::MAX;

/// Sparse `P K Pᵀ = L Lᵀ` with an approximate-minimum-degree ordering.
///
/// The ordering comes from the `amd` crate; the elimination tree and the
/// up-looking numeric factorization are done here so that the same code runs
/// in any [`Scalar`].
#[derive(Debug, Clone)]
pub struct SparseCholesky<S> {
    n: usize,
    /// `perm[k]` is the original index eliminated at step `k`.
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<S>,
}

impl<S: Scalar> SparseCholesky<S> {
    pub fn factor(matrix: &SparseSymmetricMatrix) -> Result<Self, SolverError> {
        let perm = amd_order(matrix)?;
        Self::factor_with_order(matrix, perm)
    }

    /// Factors with a caller-chosen elimination order.
    pub fn factor_with_order(matrix: &SparseSymmetricMatrix, perm: Vec<usize>) -> Result<Self, SolverError> {
        let n = matrix.dim();
        if perm.len() != n {
            return Err(SolverError::DimensionMismatch { expected: n, got: perm.len() });
        }
        let mut pinv = vec![NONE; n];
        for (k, &p) in perm.iter().enumerate() {
            pinv[p] = k;
        }

        // Upper triangle of the permuted matrix, by column.
        let mut up_ptr = vec![0usize; n + 1];
        let mut up_idx = Vec::with_capacity(matrix.nnz() / 2 + n);
        let mut up_val = Vec::with_capacity(matrix.nnz() / 2 + n);
        for k in 0..n {
            let (cols, vals) = matrix.row(perm[k]);
            for (&c, &v) in cols.iter().zip(vals) {
                let i = pinv[c];
                if i <= k {
                    up_idx.push(i);
                    up_val.push(v);
                }
            }
            up_ptr[k + 1] = up_idx.len();
        }

        let parent = etree(n, &up_ptr, &up_idx);

        let mut mark = vec![NONE; n];
        let mut stack = vec![0usize; n];
        let mut counts = vec![1usize; n];
        for k in 0..n {
            let top = ereach(k, &up_ptr, &up_idx, &parent, &mut mark, &mut stack);
            for &j in &stack[top..] {
                counts[j] += 1;
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for j in 0..n {
            col_ptr[j + 1] = col_ptr[j] + counts[j];
        }
        let nnz = col_ptr[n];
        let mut row_idx = vec![0usize; nnz];
        let mut values = vec![S::zero(); nnz];
        let mut next = col_ptr[..n].to_vec();
        let mut x = vec![S::zero(); n];
        mark.fill(NONE);

        for k in 0..n {
            let top = ereach(k, &up_ptr, &up_idx, &parent, &mut mark, &mut stack);
            for p in up_ptr[k]..up_ptr[k + 1] {
                x[up_idx[p]] = S::from_f64(up_val[p]);
            }
            let mut d = x[k];
            x[k] = S::zero();
            for &i in &stack[top..] {
                let lki = x[i] / values[col_ptr[i]];
                x[i] = S::zero();
                for p in col_ptr[i] + 1..next[i] {
                    let r = row_idx[p];
                    x[r] -= values[p] * lki;
                }
                d -= lki * lki;
                let p = next[i];
                next[i] += 1;
                row_idx[p] = k;
                values[p] = lki;
            }
            if !(d > S::zero()) {
                return Err(SolverError::NotSpd { pivot: perm[k], value: d.to_f64() });
            }
            let p = next[k];
            next[k] += 1;
            row_idx[p] = k;
            values[p] = d.sqrt();
        }
        Ok(SparseCholesky { n, perm, col_ptr, row_idx, values })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Nonzeros in the factor, diagonal included.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, rhs: &[S]) -> Vec<S> {
        assert_eq!(rhs.len(), self.n, "right-hand side has the wrong length");
        let mut y: Vec<S> = self.perm.iter().map(|&p| rhs[p]).collect();
        for j in 0..self.n {
            let r = self.col_ptr[j]..self.col_ptr[j + 1];
            let yj = y[j] / self.values[r.start];
            y[j] = yj;
            for p in r.start + 1..r.end {
                y[self.row_idx[p]] -= self.values[p] * yj;
            }
        }
        for j in (0..self.n).rev() {
            let r = self.col_ptr[j]..self.col_ptr[j + 1];
            let mut acc = y[j];
            for p in r.start + 1..r.end {
                acc -= self.values[p] * y[self.row_idx[p]];
            }
            y[j] = acc / self.values[r.start];
        }
        let mut out = vec![S::zero(); self.n];
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = y[k];
        }
        out
    }
}

fn amd_order(matrix: &SparseSymmetricMatrix) -> Result<Vec<usize>, SolverError> {
    let n = matrix.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (ptr, idx) = matrix.pattern();
    match amd::order(n, ptr, idx, &amd::Control::default()) {
        Ok((perm, _, _)) => Ok(perm),
        Err(status) => Err(SolverError::Ordering(format!("{status:?}"))),
    }
}

/// Elimination tree of a matrix given by its upper triangle in columns.
fn etree(n: usize, ptr: &[usize], idx: &[usize]) -> Vec<usize> {
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for &start in &idx[ptr[k]..ptr[k + 1]] {
            let mut i = start;
            while i != NONE && i < k {
                let up = ancestor[i];
                ancestor[i] = k;
                if up == NONE {
                    parent[i] = k;
                }
                i = up;
            }
        }
    }
    parent
}

/// Nonzero pattern of row `k` of `L` (excluding the diagonal), left in
/// `stack[top..]` in an order where every node precedes its ancestors.
fn ereach(k: usize, ptr: &[usize], idx: &[usize], parent: &[usize], mark: &mut [usize], stack: &mut [usize]) -> usize {
    let n = stack.len();
    let mut top = n;
    mark[k] = k;
    for &start in &idx[ptr[k]..ptr[k + 1]] {
        let mut i = start;
        let mut len = 0;
        while mark[i] != k {
            stack[len] = i;
            len += 1;
            mark[i] = k;
            i = parent[i];
        }
        while len > 0 {
            len -= 1;
            top -= 1;
            stack[top] = stack[len];
        }
    }
    top
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xprec::DoubleDouble;

    fn dense(rows: &[&[f64]]) -> SparseSymmetricMatrix {
        let mut t = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        SparseSymmetricMatrix::from_triplets(rows.len(), t)
    }

    #[test]
    fn identity_returns_rhs() {
        let k = dense(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let f = SparseCholesky::<f64>::factor(&k).unwrap();
        assert_eq!(f.solve(&[1.5, -2.0, 3.25]), vec![1.5, -2.0, 3.25]);
    }

    #[test]
    fn tridiagonal_three_by_three() {
        let k = dense(&[&[4.0, 1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, 2.0]]);
        let x = SparseCholesky::<f64>::factor(&k).unwrap().solve(&[1.0, 2.0, 3.0]);
        // Cramer's rule: det = 18
        let expect = [4.0 / 18.0, 2.0 / 18.0, 26.0 / 18.0];
        for (a, b) in x.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14, "{x:?}");
        }
    }

    #[test]
    fn singular_pivot_is_reported() {
        let k = dense(&[&[1.0, 1.0], &[1.0, 1.0]]);
        match SparseCholesky::<f64>::factor_with_order(&k, vec![0, 1]) {
            Err(SolverError::NotSpd { pivot: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        let k = dense(&[&[2.0, 0.0], &[0.0, -1.0]]);
        assert!(matches!(SparseCholesky::<DoubleDouble>::factor(&k), Err(SolverError::NotSpd { pivot: 1, .. })));
    }

    #[test]
    fn laplacian_residual_in_both_precisions() {
        let n = 60;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.5 + 1e-3));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
            // a long-range coupling to force fill
            if i + 17 < n {
                t.push((i, i + 17, -0.25));
                t.push((i + 17, i, -0.25));
            }
        }
        let k = SparseSymmetricMatrix::from_triplets(n, t);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();

        let x = SparseCholesky::<f64>::factor(&k).unwrap().solve(&b);
        let r: Vec<f64> = k.matvec(&x).iter().zip(&b).map(|(a, b)| a - b).collect();
        let rel = crate::scalar::vecops::norm_f64(&r) / crate::scalar::vecops::norm_f64(&b);
        assert!(rel < 1e-12, "{rel}");

        let bq: Vec<DoubleDouble> = b.iter().map(|&v| DoubleDouble::promote(v)).collect();
        let xq = SparseCholesky::<DoubleDouble>::factor(&k).unwrap().solve(&bq);
        let rq: Vec<DoubleDouble> = k.matvec(&xq).iter().zip(&bq).map(|(&a, &b)| a - b).collect();
        let relq = crate::scalar::vecops::norm(&rq).demote() / crate::scalar::vecops::norm_f64(&b);
        assert!(relq < 1e-28, "{relq}");
    }
}
