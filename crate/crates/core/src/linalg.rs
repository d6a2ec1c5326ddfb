//! Matrix kernels backed by nalgebra: SVD, linear solves, least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TensorError};
use crate::tensor::Matrix;

/// Singular values in decreasing order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.to_nalgebra().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Singular values (decreasing) and a full `rows x rows` orthonormal basis
/// whose leading columns are the matching left singular vectors. When the
/// matrix has fewer columns than rows the basis is completed by
/// Gram-Schmidt against the standard basis.
pub fn left_singular_basis(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let a = m.to_nalgebra();
    let svd = a.svd(true, false);
    let u = svd
        .u
        .ok_or_else(|| TensorError::InvalidArgument("SVD did not produce U".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let rows = m.rows();
    let mut basis: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| u.column(i).iter().copied().collect())
        .collect();
    let mut e = 0;
    while basis.len() < rows {
        let mut v = vec![0.0; rows];
        v[e] = 1.0;
        e += 1;
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis.truncate(rows);
    Ok((values, Matrix::from_columns(&basis)?))
}

/// Number of singular values above `rel_tol * sigma_max` (0 for a zero
/// matrix).
pub fn numerical_rank(m: &Matrix, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * smax).count()
}

/// Solves `x * v = rhs` for `x` with symmetric positive (semi)definite `v`
/// (`r x r`) and `rhs` of size `n x r`. Falls back to `v + ridge * I` when the
/// Cholesky factorization fails. Returns the solution and whether the ridge
/// was needed.
pub(crate) fn solve_right_spd(
    rhs: &DMatrix<f64>,
    v: &DMatrix<f64>,
    ridge: f64,
) -> Result<(DMatrix<f64>, bool)> {
    // x v = rhs  <=>  v x^T = rhs^T  (v symmetric)
    let rt = rhs.transpose();
    if let Some(ch) = v.clone().cholesky() {
        let x = ch.solve(&rt);
        if x.iter().all(|a| a.is_finite()) {
            return Ok((x.transpose(), false));
        }
    }
    let n = v.nrows();
    let reg = v + DMatrix::<f64>::identity(n, n) * ridge;
    let x = match reg.clone().cholesky() {
        Some(ch) => ch.solve(&rt),
        None => reg
            .lu()
            .solve(&rt)
            .ok_or_else(|| TensorError::InvalidArgument("singular normal equations".into()))?,
    };
    Ok((x.transpose(), true))
}

/// Minimum-norm least-squares solution of `j * dx = r`.
pub(crate) fn lstsq(j: &DMatrix<f64>, r: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = j.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-13 * (j.nrows().max(j.ncols()) as f64);
    svd.solve(r, eps).ok()
}
