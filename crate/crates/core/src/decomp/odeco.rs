//! Recovery of orthogonally decomposable (odeco) tensors by tensor power
//! iteration and deflation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::contract::{contract_all_but_unchecked, contract_vectors_unchecked};
use crate::error::{Result, TensorError};
use crate::numeric::{accurate_dot, max_abs_diff, normalized, sign_canonical};
use crate::tensor::{outer_vectors, DenseTensor, Matrix};

use super::{cp_eval, CpDecomposition};

#[derive(Debug, Clone, PartialEq)]
pub struct OdecoOptions {
    /// Use the symmetric map `x -> T(·, x, ..., x)`; otherwise run a per-mode
    /// alternating (rank-one HOPM) iteration.
    pub symmetric: bool,
    pub max_iters: usize,
    /// Deflation stops once the remainder's Frobenius norm is at most
    /// `tol * ||T||`; also the iterate-change threshold of power iteration.
    pub tol: f64,
    pub seed: u64,
    /// Random starts per extracted component.
    pub starts: usize,
    /// Upper bound on extracted components (default: smallest mode size).
    pub max_components: Option<usize>,
    /// Maximum deviation of factor Gram matrices from the identity.
    pub orthogonality_tol: f64,
}

impl Default for OdecoOptions {
    fn default() -> Self {
        OdecoOptions {
            symmetric: true,
            max_iters: 1000,
            tol: 1e-10,
            seed: 0,
            starts: 10,
            max_components: None,
            orthogonality_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdecoStatus {
    Ok,
    /// Some power iteration hit `max_iters`; the decomposition is partial.
    NotConverged,
    /// Recovered factors are not orthonormal: the input is not odeco.
    NotOrthogonal { max_deviation: f64 },
}

#[derive(Debug, Clone)]
pub struct OdecoReport {
    pub cp: CpDecomposition,
    pub status: OdecoStatus,
    /// Frobenius norm of the remainder before deflation and after each step.
    pub remainder_norms: Vec<f64>,
    /// `||T - cp_eval(cp)||_F`.
    pub reconstruction_error: f64,
}

/// Power iteration plus deflation. Each step extracts `(λ, v_1, ..., v_O)`
/// (all `v_o` equal in symmetric mode) and subtracts `λ v_1 ⊗ ... ⊗ v_O`.
/// For odd order in symmetric mode weights are made nonnegative.
pub fn odeco_decompose(t: &DenseTensor, opts: &OdecoOptions) -> Result<OdecoReport> {
    if opts.symmetric {
        t.require_cubical()?;
    }
    if opts.starts == 0 {
        return Err(TensorError::InvalidArgument("at least one start is required".into()));
    }
    let order = t.order();
    let max_r = opts
        .max_components
        .unwrap_or_else(|| *t.dims().iter().min().expect("order >= 1"));
    let norm0 = t.frobenius_norm();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut remainder = t.clone();
    let mut norms = vec![norm0];
    let mut terms: Vec<(f64, Vec<Vec<f64>>)> = Vec::new();
    let mut all_converged = true;

    while terms.len() < max_r && remainder.frobenius_norm() > opts.tol * norm0 {
        let mut best: Option<(f64, Vec<Vec<f64>>, bool)> = None;
        for _ in 0..opts.starts {
            let cand = if opts.symmetric {
                symmetric_power(&remainder, opts, &mut rng)
            } else {
                alternating_power(&remainder, opts, &mut rng)
            };
            if let Some(c) = cand {
                if best.as_ref().is_none_or(|b| c.0.abs() > b.0.abs()) {
                    best = Some(c);
                }
            }
        }
        let Some((mut lambda, mut vs, converged)) = best else {
            break;
        };
        all_converged &= converged;
        if opts.symmetric {
            let mut v = vs[0].clone();
            if order % 2 == 1 {
                if lambda < 0.0 {
                    lambda = -lambda;
                    v.iter_mut().for_each(|x| *x = -*x);
                }
            } else {
                sign_canonical(&mut v);
            }
            vs = vec![v; order];
        }
        let refs: Vec<&[f64]> = vs.iter().map(Vec::as_slice).collect();
        remainder = remainder.axpy(-lambda, &outer_vectors(&refs)?)?;
        norms.push(remainder.frobenius_norm());
        terms.push((lambda, vs));
    }

    let cp = if terms.is_empty() {
        let factors = t
            .dims()
            .iter()
            .map(|&m| Matrix::zeros(m, 0))
            .collect::<Result<Vec<_>>>()?;
        CpDecomposition::new(Vec::new(), factors)?
    } else {
        CpDecomposition::from_terms(&terms)?
    };
    let reconstruction_error = if cp.rank() == 0 {
        norm0
    } else {
        t.sub(&cp_eval(&cp)?)?.frobenius_norm()
    };
    let max_deviation = cp
        .factors()
        .iter()
        .map(|f| {
            let g = f.transpose().matmul(f)?;
            g.max_abs_diff(&Matrix::identity(f.cols())?)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let status = if max_deviation > opts.orthogonality_tol {
        OdecoStatus::NotOrthogonal { max_deviation }
    } else if !all_converged {
        OdecoStatus::NotConverged
    } else {
        OdecoStatus::Ok
    };
    Ok(OdecoReport {
        cp,
        status,
        remainder_norms: norms,
        reconstruction_error,
    })
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        if let Some(u) = normalized(&v) {
            return u;
        }
    }
}

/// Iterates `x <- normalize(T(·, x, ..., x))` until `x` stops changing up to
/// sign. Returns `(λ, [x], converged)` with `λ = T(x, ..., x)`.
fn symmetric_power(
    t: &DenseTensor,
    opts: &OdecoOptions,
    rng: &mut ChaCha8Rng,
) -> Option<(f64, Vec<Vec<f64>>, bool)> {
    let n = t.dims()[0];
    let order = t.order();
    let mut x = random_unit(n, rng);
    let mut converged = false;
    for _ in 0..opts.max_iters {
        let xs = vec![x.as_slice(); order - 1];
        let y = normalized(&contract_all_but_unchecked(t, 0, &xs))?;
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let change = max_abs_diff(&y, &x).min(max_abs_diff(&neg, &x));
        x = y;
        if change <= opts.tol.min(1e-13) {
            converged = true;
            break;
        }
    }
    let xs = vec![x.as_slice(); order];
    let lambda = contract_vectors_unchecked(t, &xs);
    Some((lambda, vec![x], converged))
}

/// Rank-one alternating iteration over the modes.
fn alternating_power(
    t: &DenseTensor,
    opts: &OdecoOptions,
    rng: &mut ChaCha8Rng,
) -> Option<(f64, Vec<Vec<f64>>, bool)> {
    let order = t.order();
    let mut xs: Vec<Vec<f64>> = t.dims().iter().map(|&m| random_unit(m, rng)).collect();
    let mut converged = false;
    for _ in 0..opts.max_iters {
        let mut change: f64 = 0.0;
        for o in 0..order {
            let others: Vec<&[f64]> = xs
                .iter()
                .enumerate()
                .filter(|(p, _)| *p != o)
                .map(|(_, v)| v.as_slice())
                .collect();
            let y = normalized(&contract_all_but_unchecked(t, o, &others))?;
            // sign of x_o is fixed by the others; compare up to sign anyway
            let d = if accurate_dot(&y, &xs[o]) >= 0.0 {
                max_abs_diff(&y, &xs[o])
            } else {
                let neg: Vec<f64> = y.iter().map(|v| -v).collect();
                max_abs_diff(&neg, &xs[o])
            };
            change = change.max(d);
            xs[o] = y;
        }
        if change <= opts.tol.min(1e-13) {
            converged = true;
            break;
        }
    }
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let lambda = contract_vectors_unchecked(t, &refs);
    Some((lambda, xs, converged))
}
