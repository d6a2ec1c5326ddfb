use crate::contract::multi_mode_product;
use crate::error::{Result, TensorError};
use crate::linalg::{left_singular_basis, numerical_rank};
use crate::tensor::{DenseTensor, Matrix};

use super::TuckerDecomposition;

/// Default relative threshold on singular values for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Truncated higher-order SVD. Factor `o` holds the `ranks[o]` leading left
/// singular vectors of the mode-`o` matricization; the core is `t` contracted
/// with the factor transposes. At full ranks the reconstruction is exact up
/// to rounding.
pub fn hosvd(t: &DenseTensor, ranks: &[usize]) -> Result<TuckerDecomposition> {
    if ranks.len() != t.order() {
        return Err(TensorError::InvalidRank(format!(
            "{} ranks for a tensor of order {}",
            ranks.len(),
            t.order()
        )));
    }
    let mut factors = Vec::with_capacity(t.order());
    for (o, (&r, &m)) in ranks.iter().zip(t.dims()).enumerate() {
        if r == 0 || r > m {
            return Err(TensorError::InvalidRank(format!(
                "rank {r} for mode {} of size {m}",
                o + 1
            )));
        }
        factors.push(leading_left_vectors(t, o + 1, r)?);
    }
    let transposes: Vec<Matrix> = factors.iter().map(Matrix::transpose).collect();
    let core = multi_mode_product(t, &transposes.iter().collect::<Vec<_>>())?;
    TuckerDecomposition::new(core, factors)
}

/// `r` leading left singular vectors of the mode-`mode` unfolding.
pub(crate) fn leading_left_vectors(t: &DenseTensor, mode: usize, r: usize) -> Result<Matrix> {
    let basis = if t.order() == 1 {
        let v = Matrix::from_columns(&[t.data().to_vec()])?;
        left_singular_basis(&v)?.1
    } else {
        left_singular_basis(&t.matricize(&[mode])?)?.1
    };
    Matrix::from_columns(&basis.columns()[..r])
}

/// Numerical rank of every single-mode matricization, counting singular
/// values above `tol * sigma_max`.
pub fn multilinear_rank(t: &DenseTensor, tol: f64) -> Result<Vec<usize>> {
    if t.order() == 1 {
        return Ok(vec![usize::from(t.frobenius_norm() > 0.0)]);
    }
    (1..=t.order())
        .map(|o| Ok(numerical_rank(&t.matricize(&[o])?, tol)))
        .collect()
}
