//! CP and Tucker formats, their evaluation and conversion, plus the solvers
//! built on them: HOSVD, multilinear rank, CP-ALS and odeco recovery.

mod als;
pub(crate) mod hosvd;
mod odeco;

pub use als::{cp_als, AlsOptions, AlsReport, DEFAULT_RIDGE};
pub use hosvd::{hosvd, multilinear_rank, DEFAULT_RANK_TOL};
pub use odeco::{odeco_decompose, OdecoOptions, OdecoReport, OdecoStatus};

use crate::contract::multi_mode_product;
use crate::error::{Result, TensorError};
use crate::numeric::norm2;
use crate::shape::Shape;
use crate::tensor::{hyperdiagonal, outer_vectors, DenseTensor, Matrix};

/// Weighted sum of `R` outer products: `sum_r w_r * a_1[:, r] ⊗ ... ⊗ a_O[:, r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CpDecomposition {
    weights: Vec<f64>,
    factors: Vec<Matrix>,
}

impl CpDecomposition {
    /// Factor `o` is `M_o x R`; every factor must have `weights.len()` columns.
    pub fn new(weights: Vec<f64>, factors: Vec<Matrix>) -> Result<Self> {
        if factors.is_empty() {
            return Err(TensorError::InvalidArgument("CP needs at least one factor".into()));
        }
        let r = weights.len();
        if let Some((o, f)) = factors.iter().enumerate().find(|(_, f)| f.cols() != r) {
            return Err(TensorError::ShapeMismatch(format!(
                "factor {} has {} columns, expected {r}",
                o + 1,
                f.cols()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(TensorError::NonFinite(0));
        }
        Ok(CpDecomposition { weights, factors })
    }

    /// Unit weights.
    pub fn unweighted(factors: Vec<Matrix>) -> Result<Self> {
        let r = factors.first().map_or(0, Matrix::cols);
        CpDecomposition::new(vec![1.0; r], factors)
    }

    /// Builds a CP from terms given as one vector per mode with a weight.
    pub fn from_terms(terms: &[(f64, Vec<Vec<f64>>)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| TensorError::InvalidArgument("no CP terms".into()))?;
        let order = first.1.len();
        let mut factors = Vec::with_capacity(order);
        for o in 0..order {
            let cols: Vec<Vec<f64>> = terms
                .iter()
                .map(|(_, vs)| vs.get(o).cloned().unwrap_or_default())
                .collect();
            factors.push(Matrix::from_columns(&cols)?);
        }
        CpDecomposition::new(terms.iter().map(|t| t.0).collect(), factors)
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn factors(&self) -> &[Matrix] {
        &self.factors
    }

    pub fn shape(&self) -> Result<Shape> {
        Shape::new(self.factors.iter().map(Matrix::rows).collect())
    }

    /// Column `r` (0-based) of every factor.
    pub fn term_vectors(&self, r: usize) -> Vec<&[f64]> {
        self.factors.iter().map(|f| f.col0(r)).collect()
    }

    /// True when every factor column has unit Euclidean norm within `tol`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        self.factors
            .iter()
            .all(|f| (0..f.cols()).all(|r| (norm2(f.col0(r)) - 1.0).abs() <= tol))
    }
}

/// Evaluates a CP decomposition to a dense tensor.
pub fn cp_eval(cp: &CpDecomposition) -> Result<DenseTensor> {
    let mut acc = DenseTensor::zeros(cp.shape()?);
    for r in 0..cp.rank() {
        let term = outer_vectors(&cp.term_vectors(r))?;
        acc = acc.axpy(cp.weights[r], &term)?;
    }
    Ok(acc)
}

/// Rescales every factor column to unit norm, moving the scale into the
/// weights. A zero column sets its weight to 0 and is replaced by `e_1`.
pub fn cp_normalize(cp: &CpDecomposition) -> Result<CpDecomposition> {
    let mut weights = cp.weights.clone();
    let mut factors = Vec::with_capacity(cp.order());
    for f in &cp.factors {
        let mut cols = f.columns();
        for (r, col) in cols.iter_mut().enumerate() {
            let n = norm2(col);
            if n == 0.0 {
                weights[r] = 0.0;
                col.iter_mut().for_each(|x| *x = 0.0);
                col[0] = 1.0;
            } else {
                weights[r] *= n;
                col.iter_mut().for_each(|x| *x /= n);
            }
        }
        factors.push(Matrix::from_columns(&cols)?);
    }
    CpDecomposition::new(weights, factors)
}

/// Core tensor transformed by one matrix per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TuckerDecomposition {
    core: DenseTensor,
    factors: Vec<Matrix>,
}

impl TuckerDecomposition {
    /// Factor `o` is `M_o x I_o` where `I_o` is the core's size in mode `o`.
    pub fn new(core: DenseTensor, factors: Vec<Matrix>) -> Result<Self> {
        if factors.len() != core.order() {
            return Err(TensorError::ShapeMismatch(format!(
                "{} factors for a core of order {}",
                factors.len(),
                core.order()
            )));
        }
        for (o, (f, &d)) in factors.iter().zip(core.dims()).enumerate() {
            if f.cols() != d {
                return Err(TensorError::ShapeMismatch(format!(
                    "factor {} has {} columns but core mode has size {d}",
                    o + 1,
                    f.cols()
                )));
            }
        }
        Ok(TuckerDecomposition { core, factors })
    }

    pub fn core(&self) -> &DenseTensor {
        &self.core
    }

    pub fn factors(&self) -> &[Matrix] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.core.order()
    }
}

/// Hyperdiagonal-core Tucker form of a CP decomposition.
pub fn cp_to_tucker(cp: &CpDecomposition) -> Result<TuckerDecomposition> {
    let core = hyperdiagonal(&cp.weights, cp.order())?;
    TuckerDecomposition::new(core, cp.factors.clone())
}

pub fn tucker_eval(tk: &TuckerDecomposition) -> Result<DenseTensor> {
    let fs: Vec<&Matrix> = tk.factors.iter().collect();
    multi_mode_product(&tk.core, &fs)
}

/// `||a - b||_F / ||a||_F` (absolute error when `a` is zero).
pub fn relative_error(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    let diff = a.sub(b)?.frobenius_norm();
    let n = a.frobenius_norm();
    Ok(if n == 0.0 { diff } else { diff / n })
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn random_cp() -> impl Strategy<Value = CpDecomposition> {
        (1usize..4, prop::collection::vec(1usize..4, 2..4)).prop_flat_map(|(r, dims)| {
            let sizes: usize = dims.iter().map(|d| d * r).sum();
            (
                prop::collection::vec(-2.0f64..2.0, r),
                prop::collection::vec(-2.0f64..2.0, sizes),
            )
                .prop_map(move |(w, flat)| {
                    let mut off = 0;
                    let factors = dims
                        .iter()
                        .map(|&d| {
                            let m = Matrix::from_col_major(d, r, flat[off..off + d * r].to_vec())
                                .unwrap();
                            off += d * r;
                            m
                        })
                        .collect();
                    CpDecomposition::new(w, factors).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn tucker_of_cp_matches(cp in random_cp()) {
            let direct = cp_eval(&cp).unwrap();
            let via = tucker_eval(&cp_to_tucker(&cp).unwrap()).unwrap();
            prop_assert!(direct.max_abs_diff(&via).unwrap() <= 1e-12);
            let normed = cp_eval(&cp_normalize(&cp).unwrap()).unwrap();
            prop_assert!(direct.max_abs_diff(&normed).unwrap() <= 1e-12);
        }
    }
}
