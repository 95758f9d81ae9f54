//! Dense linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Minimum-norm least-squares solution of `a x = b` together with an
/// orthonormal basis of the null space of `a` and the numerical rank.
pub struct LeastSquares {
    pub x: DVector<f64>,
    pub residual: f64,
    pub rank: usize,
    pub nullspace: DMatrix<f64>,
}

pub fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> LeastSquares {
    let (m, n) = a.shape();
    // Pad with zero rows so the SVD returns a full right basis.
    let rows = m.max(n);
    let mut ap = DMatrix::zeros(rows, n);
    ap.view_mut((0, 0), (m, n)).copy_from(a);
    let mut bp = DVector::zeros(rows);
    bp.rows_mut(0, m).copy_from(b);
    let svd = ap.svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = rel_tol * smax.max(1e-300);
    let mut x = DVector::zeros(n);
    let mut null_cols = Vec::new();
    let mut rank = 0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let v = vt.row(i).transpose();
        if s > cut && smax > 0.0 {
            rank += 1;
            let coef = u.column(i).dot(&bp) / s;
            x += v * coef;
        } else {
            null_cols.push(v);
        }
    }
    let nullspace = if null_cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&null_cols)
    };
    let r = a * &x - b;
    let residual = r.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    LeastSquares { x, residual, rank, nullspace }
}

/// Orthonormal basis of the null space of `a` (rows are constraints).
pub fn nullspace(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let b = DVector::zeros(a.nrows());
    min_norm_solve(a, &b, rel_tol).nullspace
}

/// Smallest eigenvalue of the pencil `(a, b)` restricted to the range of the
/// positive semidefinite `b`. Directions with `b`-eigenvalue below
/// `rel_tol * max` are discarded. Returns `None` if nothing survives.
pub fn min_generalized_eigenvalue(a: &DMatrix<f64>, b: &DMatrix<f64>, rel_tol: f64) -> Option<(f64, DVector<f64>)> {
    let bs = (b + b.transpose()) * 0.5;
    let eig = bs.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if lmax <= 0.0 {
        return None;
    }
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > rel_tol * lmax)
        .collect();
    if keep.is_empty() {
        return None;
    }
    let cols: Vec<DVector<f64>> = keep
        .iter()
        .map(|&i| eig.eigenvectors.column(i) / eig.eigenvalues[i].sqrt())
        .collect();
    let w = DMatrix::from_columns(&cols);
    let ar = w.transpose() * a * &w;
    let ar = (&ar + ar.transpose()) * 0.5;
    let e2 = ar.symmetric_eigen();
    let (imin, lmin) = e2
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let vec = &w * e2.eigenvectors.column(imin);
    Some((lmin, vec))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_norm_underdetermined() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let b = DVector::from_column_slice(&[2.0]);
        let ls = min_norm_solve(&a, &b, 1e-12);
        assert!((ls.x[0] - 1.0).abs() < 1e-14 && (ls.x[1] - 1.0).abs() < 1e-14 && ls.x[2].abs() < 1e-14);
        assert_eq!(ls.rank, 1);
        assert_eq!(ls.nullspace.ncols(), 2);
        assert!((&a * &ls.nullspace).norm() < 1e-14);
    }

    #[test]
    fn generalized_eigen_diag() {
        let a = DMatrix::from_diagonal(&DVector::from_column_slice(&[2.0, 3.0, 5.0]));
        let b = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 1.0, 0.0]));
        let (l, _) = min_generalized_eigenvalue(&a, &b, 1e-12).unwrap();
        assert!((l - 2.0).abs() < 1e-12);
    }
}
