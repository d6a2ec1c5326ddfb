//! Eigenpair solvers: an exhaustive angle scan for two-dimensional modes and
//! power iteration with Newton polishing otherwise.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::contract::contract_all_but_unchecked;
use crate::error::{Result, TensorError};
use crate::linalg::lstsq;
use crate::numeric::{accurate_dot, max_abs_diff, norm_inf, normalized};
use crate::tensor::DenseTensor;

use super::{eig_map, eig_rhs, partial_matrix, value_vector_cmp, EigenPair, EigenVariant};

#[derive(Debug, Clone, PartialEq)]
pub struct EigenOptions {
    /// Acceptance threshold on the residual.
    pub tol: f64,
    /// Angle samples for two-dimensional modes.
    pub grid: usize,
    pub newton_iters: usize,
    /// Step-size stopping threshold for Newton refinement.
    pub newton_tol: f64,
    /// Random starts for the power-iteration path.
    pub starts: usize,
    /// Power-iteration sweeps per start.
    pub max_iters: usize,
    pub seed: u64,
    /// Two pairs closer than this in both `λ` and `x` are merged.
    pub dedup_tol: f64,
    pub threads: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-10,
            grid: 2048,
            newton_iters: 50,
            newton_tol: 1e-13,
            starts: 32,
            max_iters: 2000,
            seed: 0,
            dedup_tol: 1e-8,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct EigenSearch {
    /// Unit-norm pairs with residual at most `tol`, sorted by decreasing
    /// `|λ|` then lexicographically by `x`.
    pub pairs: Vec<EigenPair>,
    /// Power-seeded candidates whose refinement did not reach `tol`.
    pub unconverged: Vec<EigenPair>,
    /// Every unit vector solves the equation (for instance a zero tensor);
    /// `pairs` then lists only the signed coordinate vectors.
    pub continuum: bool,
}

impl EigenSearch {
    pub fn converged(&self) -> bool {
        self.unconverged.is_empty()
    }
}

/// Finds mode-`mode` eigenpairs of a cubical tensor.
///
/// With mode size 2 every unit vector `(cos θ, sin θ)` is scanned on a grid
/// and the scalar defect `f_1 w_2 - f_2 w_1` (with `w = x` or `x^{[O-1]}`)
/// is refined around sign changes and local minima, which finds every
/// isolated solution. Larger modes use multi-start power iteration followed
/// by Newton's method and carry no completeness guarantee.
pub fn find_eigenpairs(
    t: &DenseTensor,
    mode: usize,
    variant: EigenVariant,
    opts: &EigenOptions,
) -> Result<EigenSearch> {
    t.require_cubical()?;
    t.shape().check_mode(mode)?;
    let order = t.order();
    if order < 2 {
        return Err(TensorError::InvalidArgument(
            "eigenpairs need a tensor of order at least 2".into(),
        ));
    }
    if opts.grid < 8 || opts.starts == 0 {
        return Err(TensorError::InvalidArgument(
            "grid needs at least 8 samples and the solver at least one start".into(),
        ));
    }
    let solver = Solver {
        t,
        o0: mode - 1,
        variant,
        opts,
    };
    let (mut found, unconverged, continuum) = match t.dims()[0] {
        1 => (
            vec![solver.finish(vec![1.0])?, solver.finish(vec![-1.0])?],
            Vec::new(),
            false,
        ),
        2 => solver.angle_scan()?,
        _ => solver.power_newton()?,
    };
    let mut bad = Vec::new();
    found.retain(|p| {
        let ok = p.residual <= opts.tol;
        if !ok {
            bad.push(p.clone());
        }
        ok
    });
    bad.extend(unconverged);
    Ok(EigenSearch {
        pairs: dedup_sorted(found, opts.dedup_tol),
        unconverged: dedup_sorted(bad, opts.dedup_tol),
        continuum,
    })
}

/// Pairs in the convention that contracts the last `O-1` modes (mode 1).
pub fn find_eigenpairs_last_modes(
    t: &DenseTensor,
    variant: EigenVariant,
    opts: &EigenOptions,
) -> Result<EigenSearch> {
    find_eigenpairs(t, 1, variant, opts)
}

/// Pairs in the convention that contracts the first `O-1` modes (mode `O`).
pub fn find_eigenpairs_first_modes(
    t: &DenseTensor,
    variant: EigenVariant,
    opts: &EigenOptions,
) -> Result<EigenSearch> {
    find_eigenpairs(t, t.order(), variant, opts)
}

fn dedup_sorted(mut v: Vec<EigenPair>, tol: f64) -> Vec<EigenPair> {
    v.sort_by(|a, b| value_vector_cmp((a.lambda, &a.x), (b.lambda, &b.x)));
    let mut out: Vec<EigenPair> = Vec::with_capacity(v.len());
    for p in v {
        let dup = out
            .iter()
            .any(|q| (q.lambda - p.lambda).abs() <= tol && max_abs_diff(&q.x, &p.x) <= tol);
        if !dup {
            out.push(p);
        }
    }
    out
}

struct Solver<'a> {
    t: &'a DenseTensor,
    o0: usize,
    variant: EigenVariant,
    opts: &'a EigenOptions,
}

impl Solver<'_> {
    fn order(&self) -> usize {
        self.t.order()
    }

    /// Least-squares `λ` for a fixed `x`.
    fn lambda_for(&self, x: &[f64]) -> f64 {
        let f = eig_map(self.t, self.o0, x);
        let w = eig_rhs(self.variant, self.order(), x);
        let ww = accurate_dot(&w, &w);
        if ww == 0.0 {
            0.0
        } else {
            accurate_dot(&f, &w) / ww
        }
    }

    /// Normalizes `x`, fits `λ` and evaluates the residual.
    fn finish(&self, x: Vec<f64>) -> Result<EigenPair> {
        let x = normalized(&x).unwrap_or(x);
        let lambda = self.lambda_for(&x);
        EigenPair::evaluated(self.t, self.variant, self.o0 + 1, lambda, x)
    }

    /// `Σ_{q != o} t(x, .., v at q, .., ·_o, .., x)`: the derivative of the
    /// eigen map in direction `v`.
    fn directional(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.order() - 1;
        let mut out = vec![0.0; x.len()];
        for q in 0..n {
            let mut xs = vec![x; n];
            xs[q] = v;
            let d = contract_all_but_unchecked(self.t, self.o0, &xs);
            out.iter_mut().zip(&d).for_each(|(a, b)| *a += b);
        }
        out
    }

    /// Scalar defect and its θ-derivative at `x = (cos θ, sin θ)`.
    fn defect(&self, theta: f64) -> (f64, f64) {
        let (s, c) = theta.sin_cos();
        let x = [c, s];
        let dx = [-s, c];
        let f = eig_map(self.t, self.o0, &x);
        let df = self.directional(&x, &dx);
        let (w, dw) = match self.variant {
            EigenVariant::Z => (x, dx),
            EigenVariant::H => {
                let k = self.order() as i32 - 1;
                (
                    [c.powi(k), s.powi(k)],
                    [
                        k as f64 * c.powi(k - 1) * dx[0],
                        k as f64 * s.powi(k - 1) * dx[1],
                    ],
                )
            }
        };
        let g = f[0] * w[1] - f[1] * w[0];
        let dg = df[0] * w[1] + f[0] * dw[1] - df[1] * w[0] - f[1] * dw[0];
        (g, dg)
    }

    fn angle_scan(&self) -> Result<(Vec<EigenPair>, Vec<EigenPair>, bool)> {
        let n = self.opts.grid;
        let h = std::f64::consts::TAU / n as f64;
        let thetas: Vec<f64> = (0..n).map(|k| k as f64 * h).collect();
        let g: Vec<f64> = thetas.iter().map(|&th| self.defect(th).0).collect();
        let scale = norm_inf(self.t.data()).max(f64::MIN_POSITIVE);
        if g.iter().all(|v| v.abs() <= 1e-14 * scale) {
            let axes = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
            let pairs = axes
                .iter()
                .map(|x| self.finish(x.to_vec()))
                .collect::<Result<_>>()?;
            return Ok((pairs, Vec::new(), true));
        }

        let defect = |th: f64| self.defect(th);
        let slope = |th: f64| {
            // derivative of the slope by a central difference
            let eps = 1e-6;
            let d = self.defect(th).1;
            let d2 = (self.defect(th + eps).1 - self.defect(th - eps).1) / (2.0 * eps);
            (d, d2)
        };
        let sign_change = |k: usize| {
            let j = (k + 1) % n;
            g[k] != 0.0 && g[j] != 0.0 && (g[k] < 0.0) != (g[j] < 0.0)
        };
        let mut roots = Vec::new();
        let mut failed = Vec::new();
        for k in 0..n {
            let prev = (k + n - 1) % n;
            let next = (k + 1) % n;
            if g[k] == 0.0 {
                roots.push((thetas[k], true));
            } else if sign_change(k) {
                let th = safeguarded_newton(
                    defect,
                    thetas[k],
                    thetas[k] + h,
                    g[k],
                    g[next],
                    self.opts.newton_iters,
                    self.opts.newton_tol,
                );
                roots.push((th, true));
            }
            let local_min = g[k] != 0.0
                && g[k].abs() < g[prev].abs()
                && g[k].abs() <= g[next].abs()
                && !sign_change(k)
                && !sign_change(prev);
            if local_min {
                // tangential root candidate: the slope vanishes there
                let a = thetas[k] - h;
                let b = thetas[k] + h;
                let (sa, sb) = (self.defect(a).1, self.defect(b).1);
                if sa != 0.0 && sb != 0.0 && (sa < 0.0) != (sb < 0.0) {
                    let th = safeguarded_newton(
                        slope,
                        a,
                        b,
                        sa,
                        sb,
                        self.opts.newton_iters,
                        self.opts.newton_tol,
                    );
                    roots.push((th, false));
                }
            }
        }
        let mut pairs = Vec::new();
        for (th, bracketed) in roots {
            let p = self.finish(vec![th.cos(), th.sin()])?;
            if p.residual <= self.opts.tol {
                pairs.push(p);
            } else if bracketed {
                failed.push(p);
            }
        }
        Ok((pairs, failed, false))
    }

    /// Jacobian of `F(x, λ) = (f(x) - λ w(x), (x·x - 1) / 2)`.
    fn newton_system(&self, x: &[f64], lambda: f64) -> (DMatrix<f64>, DVector<f64>) {
        let m = x.len();
        let order = self.order();
        let f = eig_map(self.t, self.o0, x);
        let w = eig_rhs(self.variant, order, x);
        let xs = vec![x; order];
        let mut j = DMatrix::<f64>::zeros(m + 1, m + 1);
        for q in (0..order).filter(|&q| q != self.o0) {
            let pm = partial_matrix(self.t, self.o0, q, &xs);
            for (r, row) in pm.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    j[(r, c)] += v;
                }
            }
        }
        for i in 0..m {
            let dw = match self.variant {
                EigenVariant::Z => 1.0,
                EigenVariant::H => (order - 1) as f64 * x[i].powi(order as i32 - 2),
            };
            j[(i, i)] -= lambda * dw;
            j[(i, m)] = -w[i];
            j[(m, i)] = x[i];
        }
        let mut r = DVector::<f64>::zeros(m + 1);
        for i in 0..m {
            r[i] = f[i] - lambda * w[i];
        }
        r[m] = 0.5 * (accurate_dot(x, x) - 1.0);
        (j, r)
    }

    /// Damped Newton on `(x, λ)` from a seed. Returns the final iterate.
    fn newton(&self, x0: Vec<f64>) -> Vec<f64> {
        let m = x0.len();
        let mut x = x0;
        let mut lambda = self.lambda_for(&x);
        let (_, mut r) = self.newton_system(&x, lambda);
        for _ in 0..self.opts.newton_iters {
            let rn = r.amax();
            if rn <= 1e-15 {
                break;
            }
            let (j, _) = self.newton_system(&x, lambda);
            let Some(step) = lstsq(&j, &(-&r)) else {
                break;
            };
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let xn: Vec<f64> = (0..m).map(|i| x[i] + alpha * step[i]).collect();
                let ln = lambda + alpha * step[m];
                let (_, rn_new) = self.newton_system(&xn, ln);
                if rn_new.amax() < rn {
                    x = xn;
                    lambda = ln;
                    r = rn_new;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted || alpha * step.amax() <= self.opts.newton_tol {
                break;
            }
        }
        x
    }

    fn random_start(&self, start: usize) -> Vec<f64> {
        let m = self.t.dims()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed.wrapping_add(start as u64));
        loop {
            let v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
            if let Some(u) = normalized(&v) {
                return u;
            }
        }
    }

    /// Power iteration from `x`; the result seeds Newton.
    fn power_seed(&self, mut x: Vec<f64>, start: usize, symmetric: bool, nonnegative: bool) -> Vec<f64> {
        let order = self.order();
        let shift = 1.0 + self.t.data().iter().map(|v| v.abs()).sum::<f64>();
        for _ in 0..self.opts.max_iters {
            let f = eig_map(self.t, self.o0, &x);
            let y: Vec<f64> = match self.variant {
                EigenVariant::Z if symmetric => {
                    // odd starts look for the most negative eigenvalues
                    let s = if start.is_multiple_of(2) { 1.0 } else { -1.0 };
                    f.iter().zip(&x).map(|(a, b)| s * a + shift * b).collect()
                }
                EigenVariant::Z => f,
                EigenVariant::H if nonnegative => {
                    let k = (order - 1) as f64;
                    f.iter().map(|v| v.signum() * v.abs().powf(1.0 / k)).collect()
                }
                EigenVariant::H => return x,
            };
            let Some(y) = normalized(&y) else {
                return x;
            };
            let change = max_abs_diff(&y, &x);
            x = y;
            if change <= 1e-12 {
                break;
            }
        }
        x
    }

    fn run_start(&self, start: usize, symmetric: bool, nonnegative: bool) -> Result<Vec<EigenPair>> {
        // Newton from the raw start reaches interior eigenvalues that power
        // iteration is attracted away from; it is kept only when it lands
        let raw = self.random_start(start);
        let powered = self.power_seed(raw.clone(), start, symmetric, nonnegative);
        let mut out = Vec::with_capacity(4);
        for (k, seed) in [powered, raw].into_iter().enumerate() {
            let p = self.finish(self.newton(seed))?;
            if k == 1 && p.residual > self.opts.tol {
                continue;
            }
            let neg = self.finish(p.x.iter().map(|v| -v).collect())?;
            out.push(p);
            out.push(neg);
        }
        Ok(out)
    }

    fn power_newton(&self) -> Result<(Vec<EigenPair>, Vec<EigenPair>, bool)> {
        let symmetric = self.t.is_symmetric(1e-12)?;
        let nonnegative = self.t.data().iter().all(|&v| v >= 0.0);
        let starts = 0..self.opts.starts;
        let per_start: Vec<Vec<EigenPair>> = if self.opts.threads > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.opts.threads)
                .build()
                .map_err(|e| TensorError::InvalidArgument(e.to_string()))?;
            pool.install(|| {
                starts
                    .into_par_iter()
                    .map(|s| self.run_start(s, symmetric, nonnegative))
                    .collect::<Result<_>>()
            })?
        } else {
            starts
                .map(|s| self.run_start(s, symmetric, nonnegative))
                .collect::<Result<_>>()?
        };
        Ok((per_start.into_iter().flatten().collect(), Vec::new(), false))
    }
}

/// Newton's method kept inside a sign-change bracket `[a, b]`, bisecting
/// whenever a step would leave it or fails to shrink fast enough.
fn safeguarded_newton(
    f: impl Fn(f64) -> (f64, f64),
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    iters: usize,
    tol: f64,
) -> f64 {
    let (mut lo, mut hi) = if fa < 0.0 { (a, b) } else { (b, a) };
    debug_assert!(fa * fb < 0.0);
    let mut x = 0.5 * (a + b);
    let mut dx_old = (b - a).abs();
    let mut dx = dx_old;
    let (mut fx, mut dfx) = f(x);
    for _ in 0..iters.max(64) {
        let newton_leaves = ((x - hi) * dfx - fx) * ((x - lo) * dfx - fx) > 0.0;
        let too_slow = (2.0 * fx).abs() > (dx_old * dfx).abs();
        if newton_leaves || too_slow || dfx == 0.0 {
            dx_old = dx;
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        } else {
            dx_old = dx;
            dx = fx / dfx;
            x -= dx;
        }
        if dx.abs() <= tol {
            break;
        }
        (fx, dfx) = f(x);
        if fx == 0.0 {
            break;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
    }
    x
}
