//! Singular tuples by the higher-order power method, the best rank-one
//! approximation, and the correspondence with eigenpairs.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::contract::contract_all_but_unchecked;
use crate::decomp::hosvd::leading_left_vectors;
use crate::error::{Result, TensorError};
use crate::linalg::lstsq;
use crate::numeric::{accurate_dot, entrywise_pow, max_abs_diff, norm2, normalized, normalized_p, sign_canonical};
use crate::tensor::{outer_vectors, DenseTensor};

use super::{
    eig_residual, partial_matrix, singular_maps, value_vector_cmp, EigenPair,
    EigenVariant, SingularTuple,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SingularOptions {
    pub tol: f64,
    pub starts: usize,
    /// Power-method sweeps per start.
    pub max_iters: usize,
    pub newton_iters: usize,
    pub seed: u64,
    pub dedup_tol: f64,
    /// Fix the sign freedom: `σ >= 0` and the largest entry of each of
    /// `xs[0..O-1]` positive (ℓ² or even `O`), or the largest entry of
    /// `xs[0]` positive via a global sign change (ℓᴼ with odd `O`).
    pub canonicalize: bool,
    pub threads: usize,
}

impl Default for SingularOptions {
    fn default() -> Self {
        SingularOptions {
            tol: 1e-10,
            starts: 32,
            max_iters: 2000,
            newton_iters: 50,
            seed: 0,
            dedup_tol: 1e-8,
            canonicalize: true,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct SingularSearch {
    /// Tuples with residual at most `tol`, sorted by decreasing `|σ|`. At
    /// most one tuple with `|σ| <= tol` is kept.
    pub tuples: Vec<SingularTuple>,
    pub unconverged: Vec<SingularTuple>,
    /// Starts that hit a zero iterate and were redrawn.
    pub restarts: usize,
}

impl SingularSearch {
    pub fn converged(&self) -> bool {
        self.unconverged.is_empty()
    }
}

fn check_p(t: &DenseTensor, p: usize) -> Result<()> {
    if t.order() < 2 {
        return Err(TensorError::InvalidArgument(
            "singular tuples need a tensor of order at least 2".into(),
        ));
    }
    if p != 2 && p != t.order() {
        return Err(TensorError::InvalidArgument(format!(
            "p must be 2 or the order {}, got {p}",
            t.order()
        )));
    }
    Ok(())
}

/// Finds ℓ² (`p = 2`) or ℓᴼ (`p = O`) singular tuples by multi-start
/// alternating power iteration followed by Newton refinement. Start 0 uses
/// the leading HOSVD vectors.
pub fn find_singular_tuples(t: &DenseTensor, p: usize, opts: &SingularOptions) -> Result<SingularSearch> {
    check_p(t, p)?;
    if opts.starts == 0 {
        return Err(TensorError::InvalidArgument("at least one start is required".into()));
    }
    if t.frobenius_norm() == 0.0 {
        // every tuple is singular with σ = 0
        let xs = t
            .dims()
            .iter()
            .map(|&m| {
                let mut e = vec![0.0; m];
                e[0] = 1.0;
                e
            })
            .collect();
        return Ok(SingularSearch {
            tuples: vec![SingularTuple::evaluated(t, p, 0.0, xs)?],
            ..SingularSearch::default()
        });
    }
    let hopm = Hopm { t, p, opts };
    let per_start: Vec<(Vec<SingularTuple>, usize)> = if opts.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| TensorError::InvalidArgument(e.to_string()))?;
        pool.install(|| {
            (0..opts.starts)
                .into_par_iter()
                .map(|s| hopm.run(s))
                .collect::<Result<_>>()
        })?
    } else {
        (0..opts.starts).map(|s| hopm.run(s)).collect::<Result<_>>()?
    };
    let restarts = per_start.iter().map(|(_, r)| r).sum();
    let (good, bad): (Vec<_>, Vec<_>) = per_start
        .into_iter()
        .flat_map(|(s, _)| s)
        .partition(|s| s.residual <= opts.tol);
    let mut tuples = dedup_sorted(good, opts.dedup_tol);
    // σ = 0 solutions typically come in continua; keep one representative
    let mut seen_zero = false;
    tuples.retain(|s| {
        let zero = s.sigma.abs() <= opts.tol;
        let keep = !(zero && seen_zero);
        seen_zero |= zero;
        keep
    });
    Ok(SingularSearch {
        tuples,
        unconverged: dedup_sorted(bad, opts.dedup_tol),
        restarts,
    })
}

fn dedup_sorted(mut v: Vec<SingularTuple>, tol: f64) -> Vec<SingularTuple> {
    let flat = |s: &SingularTuple| s.xs.concat();
    v.sort_by(|a, b| value_vector_cmp((a.sigma, &flat(a)), (b.sigma, &flat(b))));
    let mut out: Vec<SingularTuple> = Vec::with_capacity(v.len());
    for s in v {
        let dup = out.iter().any(|q| {
            (q.sigma - s.sigma).abs() <= tol
                && q.xs.iter().zip(&s.xs).all(|(a, b)| max_abs_diff(a, b) <= tol)
        });
        if !dup {
            out.push(s);
        }
    }
    out
}

struct Hopm<'a> {
    t: &'a DenseTensor,
    p: usize,
    opts: &'a SingularOptions,
}

impl Hopm<'_> {
    fn order(&self) -> usize {
        self.t.order()
    }

    fn normalize(&self, v: &[f64]) -> Option<Vec<f64>> {
        normalized_p(v, self.p as f64)
    }

    /// `w(x) = x` (ℓ²) or `x^{[O-1]}` (ℓᴼ).
    fn rhs(&self, x: &[f64]) -> Vec<f64> {
        if self.p == 2 {
            x.to_vec()
        } else {
            entrywise_pow(x, self.order() - 1)
        }
    }

    /// Least-squares `σ` for fixed vectors.
    fn sigma_for(&self, xs: &[Vec<f64>]) -> f64 {
        let maps = singular_maps(self.t, xs);
        let (mut num, mut den) = (0.0, 0.0);
        for (f, x) in maps.iter().zip(xs) {
            let w = self.rhs(x);
            num += accurate_dot(f, &w);
            den += accurate_dot(&w, &w);
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    fn random_tuple(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        self.t
            .dims()
            .iter()
            .map(|&m| loop {
                let v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
                if let Some(u) = self.normalize(&v) {
                    break u;
                }
            })
            .collect()
    }

    fn initial(&self, start: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
        if start > 0 {
            return Ok(self.random_tuple(rng));
        }
        (0..self.order())
            .map(|o| {
                let u = leading_left_vectors(self.t, o + 1, 1)?.column(1)?;
                Ok(self.normalize(&u).unwrap_or(u))
            })
            .collect()
    }

    /// Cyclic updates `x_o <- normalize(t(.., ·_o, ..))`. `None` on a zero
    /// iterate.
    fn sweep_until_stable(&self, mut xs: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
        let order = self.order();
        for _ in 0..self.opts.max_iters {
            let mut change: f64 = 0.0;
            for o in 0..order {
                let others: Vec<&[f64]> = xs
                    .iter()
                    .enumerate()
                    .filter(|(q, _)| *q != o)
                    .map(|(_, v)| v.as_slice())
                    .collect();
                let y = contract_all_but_unchecked(self.t, o, &others);
                let y = if self.p == 2 {
                    y
                } else {
                    let k = (order - 1) as f64;
                    y.iter().map(|v| v.signum() * v.abs().powf(1.0 / k)).collect()
                };
                let y = self.normalize(&y)?;
                change = change.max(max_abs_diff(&y, &xs[o]));
                xs[o] = y;
            }
            if change <= 1e-13 {
                break;
            }
        }
        Some(xs)
    }

    /// Residual vector and Jacobian of the singular system plus one
    /// normalization equation per mode, in unknowns `(x_1, .., x_O, σ)`.
    fn newton_system(&self, xs: &[Vec<f64>], sigma: f64) -> (DMatrix<f64>, DVector<f64>) {
        let order = self.order();
        let dims = self.t.dims();
        let offsets: Vec<usize> = dims
            .iter()
            .scan(0, |acc, &m| {
                let o = *acc;
                *acc += m;
                Some(o)
            })
            .collect();
        let n = dims.iter().sum::<usize>();
        let rows = n + order;
        let mut j = DMatrix::<f64>::zeros(rows, n + 1);
        let mut r = DVector::<f64>::zeros(rows);
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let maps = singular_maps(self.t, xs);
        for o in 0..order {
            let w = self.rhs(&xs[o]);
            for i in 0..dims[o] {
                r[offsets[o] + i] = maps[o][i] - sigma * w[i];
                j[(offsets[o] + i, n)] = -w[i];
                let dw = if self.p == 2 {
                    1.0
                } else {
                    (order - 1) as f64 * xs[o][i].powi(order as i32 - 2)
                };
                j[(offsets[o] + i, offsets[o] + i)] = -sigma * dw;
            }
            for q in (0..order).filter(|&q| q != o) {
                let pm = partial_matrix(self.t, o, q, &refs);
                for (a, row) in pm.iter().enumerate() {
                    for (b, v) in row.iter().enumerate() {
                        j[(offsets[o] + a, offsets[q] + b)] = *v;
                    }
                }
            }
            let c = n + o;
            if self.p == 2 {
                r[c] = 0.5 * (accurate_dot(&xs[o], &xs[o]) - 1.0);
                for i in 0..dims[o] {
                    j[(c, offsets[o] + i)] = xs[o][i];
                }
            } else {
                let pf = self.p as f64;
                let s: f64 = xs[o].iter().map(|v| v.abs().powf(pf)).sum();
                r[c] = (s - 1.0) / pf;
                for i in 0..dims[o] {
                    let v = xs[o][i];
                    j[(c, offsets[o] + i)] = v.signum() * v.abs().powf(pf - 1.0);
                }
            }
        }
        (j, r)
    }

    fn newton(&self, mut xs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        let dims = self.t.dims().to_vec();
        let mut sigma = self.sigma_for(&xs);
        let (_, mut r) = self.newton_system(&xs, sigma);
        for _ in 0..self.opts.newton_iters {
            let rn = r.amax();
            if rn <= 1e-15 {
                break;
            }
            let (j, _) = self.newton_system(&xs, sigma);
            let Some(step) = lstsq(&j, &(-&r)) else {
                break;
            };
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let mut k = 0;
                let cand: Vec<Vec<f64>> = dims
                    .iter()
                    .enumerate()
                    .map(|(o, &m)| {
                        let v = (0..m).map(|i| xs[o][i] + alpha * step[k + i]).collect();
                        k += m;
                        v
                    })
                    .collect();
                let s_new = sigma + alpha * step[k];
                let (_, r_new) = self.newton_system(&cand, s_new);
                if r_new.amax() < rn {
                    xs = cand;
                    sigma = s_new;
                    r = r_new;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted || alpha * step.amax() <= 1e-15 {
                break;
            }
        }
        xs
    }

    fn canonicalize(&self, xs: &mut [Vec<f64>], sigma: &mut f64) {
        let order = self.order();
        let last = order - 1;
        let flip = |v: &mut Vec<f64>| v.iter_mut().for_each(|x| *x = -*x);
        if self.p != 2 && order % 2 == 1 {
            if sign_canonical(&mut xs[0]) {
                xs[1..].iter_mut().for_each(flip);
            }
            return;
        }
        if *sigma < 0.0 {
            *sigma = -*sigma;
            flip(&mut xs[last]);
        }
        for o in 0..last {
            if sign_canonical(&mut xs[o]) {
                flip(&mut xs[last]);
            }
        }
    }

    fn polish(&self, xs: Vec<Vec<f64>>) -> Result<SingularTuple> {
        let mut xs: Vec<Vec<f64>> = self
            .newton(xs)
            .into_iter()
            .map(|x| self.normalize(&x).unwrap_or(x))
            .collect();
        let mut sigma = self.sigma_for(&xs);
        if self.opts.canonicalize {
            self.canonicalize(&mut xs, &mut sigma);
        }
        SingularTuple::evaluated(self.t, self.p, sigma, xs)
    }

    /// Newton from the power-method limit and, since that limit favours the
    /// largest values, from the raw start as well. Only the first counts
    /// towards `unconverged`.
    fn run(&self, start: usize) -> Result<(Vec<SingularTuple>, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed.wrapping_add(start as u64));
        let mut restarts = 0;
        let mut init = self.initial(start, &mut rng)?;
        let powered = loop {
            match self.sweep_until_stable(init.clone()) {
                Some(xs) => break xs,
                None if restarts < 16 => {
                    restarts += 1;
                    init = self.random_tuple(&mut rng);
                }
                None => {
                    return Err(TensorError::InvalidArgument(
                        "power method keeps hitting zero iterates".into(),
                    ))
                }
            }
        };
        let mut out = vec![self.polish(powered)?];
        let extra = self.polish(init)?;
        if extra.residual <= self.opts.tol {
            out.push(extra);
        }
        Ok((out, restarts))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestRankOne {
    /// `σ >= 0`; the approximation is `σ xs[0] ⊗ .. ⊗ xs[O-1]`.
    pub sigma: f64,
    /// Unit ℓ² vectors (`e_1` per mode for a zero tensor).
    pub xs: Vec<Vec<f64>>,
    pub tensor: DenseTensor,
    /// Frobenius norm of `t - tensor`.
    pub error: f64,
    /// Residual of the underlying singular tuple.
    pub residual: f64,
}

/// Best rank-one approximation via the largest ℓ² singular value. The
/// search is multi-start and not guaranteed to be global.
pub fn best_rank_one(t: &DenseTensor, opts: &SingularOptions) -> Result<BestRankOne> {
    let opts = SingularOptions {
        canonicalize: true,
        ..opts.clone()
    };
    let s = find_singular_tuples(t, 2, &opts)?;
    let top = s
        .tuples
        .first()
        .or_else(|| {
            s.unconverged
                .iter()
                .max_by(|a, b| a.sigma.abs().total_cmp(&b.sigma.abs()))
        })
        .ok_or_else(|| TensorError::InvalidArgument("no singular tuple found".into()))?;
    let refs: Vec<&[f64]> = top.xs.iter().map(Vec::as_slice).collect();
    let tensor = outer_vectors(&refs)?.scale(top.sigma)?;
    let error = t.sub(&tensor)?.frobenius_norm();
    Ok(BestRankOne {
        sigma: top.sigma,
        xs: top.xs.clone(),
        tensor,
        error,
        residual: top.residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum BridgeOutcome {
    /// `(|λ|, x, .., x)` with one sign flip when `λ < 0`.
    Tuple(SingularTuple),
    /// `x` is not a Z-eigenvector with the same `λ` for this mode.
    ModeMismatch { mode: usize, residual: f64 },
}

/// Turns a Z-eigenpair into an ℓ² singular tuple made of `O` copies of `x`.
/// This works exactly when `(λ, x)` is an eigenpair for every mode, which
/// is checked against `tol`.
pub fn eig_singular_bridge(t: &DenseTensor, pair: &EigenPair, tol: f64) -> Result<BridgeOutcome> {
    t.require_cubical()?;
    if pair.variant != EigenVariant::Z {
        return Err(TensorError::InvalidArgument(
            "the bridge applies to Z-eigenpairs".into(),
        ));
    }
    let order = t.order();
    let n = norm2(&pair.x);
    let x = normalized(&pair.x)
        .ok_or_else(|| TensorError::InvalidArgument("zero eigenvector".into()))?;
    let lambda = pair.lambda / n.powi(order as i32 - 2);
    for mode in 1..=order {
        let p = EigenPair::new(EigenVariant::Z, mode, lambda, x.clone());
        let residual = eig_residual(t, &p)?;
        if residual > tol {
            return Ok(BridgeOutcome::ModeMismatch { mode, residual });
        }
    }
    let mut xs = vec![x; order];
    if lambda < 0.0 {
        xs[0].iter_mut().for_each(|v| *v = -*v);
    }
    let tuple = SingularTuple::evaluated(t, 2, lambda.abs(), xs)?;
    Ok(BridgeOutcome::Tuple(tuple))
}
