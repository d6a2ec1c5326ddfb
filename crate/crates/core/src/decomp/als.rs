//! CP fitting by alternating least squares.
//!
//! ALS is a heuristic: exact CP rank is NP-hard and best rank-`R`
//! approximations need not exist for `R >= 2` (border-rank families such as
//! the W tensor), so the result is only a fit with a reported error.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, TensorError};
use crate::tensor::{advance_colex, DenseTensor, Matrix};

use super::hosvd::leading_left_vectors;
use super::{cp_eval, relative_error, CpDecomposition};

/// Ridge added to the normal equations when they are numerically singular.
pub const DEFAULT_RIDGE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AlsOptions {
    pub max_iters: usize,
    /// Stop once a sweep improves the relative error by at most this much.
    pub tol: f64,
    pub seed: u64,
    /// Number of starts. Start 0 uses HOSVD vectors on every mode where
    /// `R <= M_o`; the others draw uniform(-1, 1) entries from
    /// `seed + start`.
    pub starts: usize,
    pub threads: usize,
}

impl Default for AlsOptions {
    fn default() -> Self {
        AlsOptions {
            max_iters: 5000,
            tol: 1e-12,
            seed: 0,
            starts: 8,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AlsReport {
    pub cp: CpDecomposition,
    /// Final relative Frobenius error.
    pub rel_error: f64,
    /// Relative error of the initial guess followed by one entry per sweep.
    pub error_history: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    /// Which start produced this fit.
    pub start: usize,
    /// True if any normal-equation solve needed the ridge.
    pub ridge_used: bool,
}

/// Fits a rank-`rank` CP decomposition; the best start (by error, then start
/// index) wins, so the result does not depend on thread scheduling.
pub fn cp_als(t: &DenseTensor, rank: usize, opts: &AlsOptions) -> Result<AlsReport> {
    if rank == 0 {
        return Err(TensorError::InvalidRank("CP rank must be at least 1".into()));
    }
    if opts.starts == 0 {
        return Err(TensorError::InvalidArgument("at least one start is required".into()));
    }
    let run = |s: usize| als_single(t, rank, opts, s);
    let mut reports: Vec<AlsReport> = if opts.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| TensorError::InvalidArgument(e.to_string()))?;
        pool.install(|| (0..opts.starts).into_par_iter().map(run).collect::<Result<_>>())?
    } else {
        (0..opts.starts).map(run).collect::<Result<_>>()?
    };
    reports.sort_by(|a, b| a.rel_error.total_cmp(&b.rel_error).then(a.start.cmp(&b.start)));
    Ok(reports.swap_remove(0))
}

fn initial_factors(t: &DenseTensor, rank: usize, seed: u64, start: usize) -> Result<Vec<Matrix>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(start as u64));
    t.dims()
        .iter()
        .enumerate()
        .map(|(o, &m)| {
            if start == 0 && rank <= m {
                leading_left_vectors(t, o + 1, rank)
            } else {
                let data = (0..m * rank).map(|_| rng.random_range(-1.0..1.0)).collect();
                Matrix::from_col_major(m, rank, data)
            }
        })
        .collect()
}

/// Matricized tensor times Khatri-Rao product for mode `n` (0-based):
/// `out[i, r] = sum_{m: m_n = i} t_m prod_{p != n} a_p[m_p, r]`.
fn mttkrp(t: &DenseTensor, factors: &[Matrix], n: usize, rank: usize) -> DMatrix<f64> {
    let dims = t.dims();
    let mut out = DMatrix::<f64>::zeros(dims[n], rank);
    let mut coords = vec![0usize; dims.len()];
    let mut prod = vec![0.0; rank];
    for &v in t.data() {
        if v != 0.0 {
            prod.iter_mut().for_each(|p| *p = v);
            for (p, f) in factors.iter().enumerate() {
                if p != n {
                    let c = coords[p];
                    for (r, x) in prod.iter_mut().enumerate() {
                        *x *= f.get0(c, r);
                    }
                }
            }
            for (r, x) in prod.iter().enumerate() {
                out[(coords[n], r)] += x;
            }
        }
        advance_colex(&mut coords, dims);
    }
    out
}

fn als_single(t: &DenseTensor, rank: usize, opts: &AlsOptions, start: usize) -> Result<AlsReport> {
    let order = t.order();
    let mut factors = initial_factors(t, rank, opts.seed, start)?;
    let mut weights = vec![1.0; rank];
    let eval = |w: &[f64], f: &[Matrix]| -> Result<(CpDecomposition, f64)> {
        let cp = CpDecomposition::new(w.to_vec(), f.to_vec())?;
        let err = relative_error(t, &cp_eval(&cp)?)?;
        Ok((cp, err))
    };
    let (mut cp, mut err) = eval(&weights, &factors)?;
    let mut history = vec![err];
    let mut converged = false;
    let mut ridge_used = false;
    let mut sweeps = 0;
    for _ in 0..opts.max_iters {
        sweeps += 1;
        for n in 0..order {
            // the solve for mode n absorbs the current weights
            let rhs = mttkrp(t, &factors, n, rank);
            let mut v = DMatrix::<f64>::from_element(rank, rank, 1.0);
            for (p, f) in factors.iter().enumerate() {
                if p != n {
                    let g = f.to_nalgebra();
                    v.component_mul_assign(&(g.transpose() * &g));
                }
            }
            let (sol, ridge) = crate::linalg::solve_right_spd(&rhs, &v, DEFAULT_RIDGE)?;
            ridge_used |= ridge;
            // move column norms into the weights
            let mut cols = Vec::with_capacity(rank);
            for (r, w) in weights.iter_mut().enumerate() {
                let col: Vec<f64> = sol.column(r).iter().copied().collect();
                let norm = crate::numeric::norm2(&col);
                if norm > 0.0 && norm.is_finite() {
                    *w = norm;
                    cols.push(col.into_iter().map(|x| x / norm).collect());
                } else {
                    *w = 0.0;
                    let mut e = vec![0.0; col.len()];
                    e[0] = 1.0;
                    cols.push(e);
                }
            }
            factors[n] = Matrix::from_columns(&cols)?;
        }
        let (next_cp, next_err) = eval(&weights, &factors)?;
        let improvement = err - next_err;
        cp = next_cp;
        err = next_err;
        history.push(err);
        if err <= 1e-15 || improvement.abs() <= opts.tol {
            converged = true;
            break;
        }
    }
    Ok(AlsReport {
        cp,
        rel_error: err,
        error_history: history,
        sweeps,
        converged,
        start,
        ridge_used,
    })
}
