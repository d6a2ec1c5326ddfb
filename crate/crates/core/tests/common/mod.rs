//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's algebra: entries are indexed by
//! hand and roots are found by plain bisection.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tensorspec::{DenseTensor, Matrix, Shape};

/// Entries `t[i][j][k]` of the 2×2×2 counterexample: frontal slice `k` is
/// filled with `k + 1`.
pub fn counterexample_entries() -> [[[f64; 2]; 2]; 2] {
    [[[1.0, 2.0]; 2]; 2]
}

/// `t` contracted with `x` in every mode except `mode` (0-based), by loops.
pub fn contract_all_but_2x2x2(t: &[[[f64; 2]; 2]; 2], mode: usize, x: [f64; 2]) -> [f64; 2] {
    let mut out = [0.0; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let idx = [i, j, k];
                let w: f64 = (0..3).filter(|&p| p != mode).map(|p| x[idx[p]]).product();
                out[idx[mode]] += t[i][j][k] * w;
            }
        }
    }
    out
}

/// Solutions of `f(x) = λ w(x)` on the unit circle where `w = x` (`h = false`)
/// or `w = x^{[2]}` (`h = true`), found from sign changes of
/// `f_1 w_2 - f_2 w_1` on a uniform θ grid and refined by bisection. Only
/// roots where the defect changes sign are reported.
pub fn theta_grid_oracle(
    t: &[[[f64; 2]; 2]; 2],
    mode: usize,
    h: bool,
    samples: usize,
) -> Vec<(f64, [f64; 2])> {
    let eval = |th: f64| {
        let x = [th.cos(), th.sin()];
        let f = contract_all_but_2x2x2(t, mode, x);
        let w = if h { [x[0] * x[0], x[1] * x[1]] } else { x };
        (f[0] * w[1] - f[1] * w[0], f, w, x)
    };
    let step = std::f64::consts::TAU / samples as f64;
    let mut out = Vec::new();
    for k in 0..samples {
        let (mut a, mut b) = (k as f64 * step, (k + 1) as f64 * step);
        let (ga, _, _, _) = eval(a);
        let (gb, _, _, _) = eval(b);
        if ga == 0.0 || (ga < 0.0) == (gb < 0.0) {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let (gm, _, _, _) = eval(m);
            if (gm < 0.0) == (ga < 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        let (_, f, w, x) = eval(0.5 * (a + b));
        let lambda = (f[0] * w[0] + f[1] * w[1]) / (w[0] * w[0] + w[1] * w[1]);
        out.push((lambda, x));
    }
    out
}

/// Largest `|t(x_1, x_2, x_3)|` over unit vectors `x_o = (cos φ_o, sin φ_o)`
/// sampled on an `n^3` grid (half-circles suffice by sign symmetry).
pub fn grid_sigma_max_2x2x2(t: &[[[f64; 2]; 2]; 2], n: usize) -> f64 {
    let xs: Vec<[f64; 2]> = (0..n)
        .map(|k| {
            let th = std::f64::consts::PI * k as f64 / n as f64;
            [th.cos(), th.sin()]
        })
        .collect();
    let mut best: f64 = 0.0;
    for a in &xs {
        for b in &xs {
            // the third vector is optimal in closed form: t(a, b, ·) / norm
            let mut v = [0.0; 2];
            for i in 0..2 {
                for j in 0..2 {
                    for (k, vk) in v.iter_mut().enumerate() {
                        *vk += t[i][j][k] * a[i] * b[j];
                    }
                }
            }
            best = best.max((v[0] * v[0] + v[1] * v[1]).sqrt());
        }
    }
    best
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_tensor(rng: &mut ChaCha8Rng, dims: &[usize]) -> DenseTensor {
    let shape = Shape::new(dims.to_vec()).unwrap();
    let n = shape.cardinality();
    DenseTensor::new(shape, uniform_vec(rng, n)).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_col_major(rows, cols, uniform_vec(rng, rows * cols)).unwrap()
}

/// Average of a random cubical order-3 tensor over all mode permutations,
/// computed entrywise.
pub fn random_symmetric3(rng: &mut ChaCha8Rng, m: usize) -> DenseTensor {
    let raw = uniform_vec(rng, m * m * m);
    let at = |i: usize, j: usize, k: usize| raw[i + m * (j + m * k)];
    let mut data = vec![0.0; m * m * m];
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                data[i + m * (j + m * k)] = (at(i, j, k)
                    + at(i, k, j)
                    + at(j, i, k)
                    + at(j, k, i)
                    + at(k, i, j)
                    + at(k, j, i))
                    / 6.0;
            }
        }
    }
    DenseTensor::new(Shape::cubical(m, 3).unwrap(), data).unwrap()
}

/// Columns of a random orthogonal matrix (Gram-Schmidt on a random matrix).
pub fn random_orthonormal(rng: &mut ChaCha8Rng, m: usize, r: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(r);
    while out.len() < r {
        let mut v = uniform_vec(rng, m);
        for _ in 0..2 {
            for u in &out {
                let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
            }
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-3 {
            out.push(v.into_iter().map(|a| a / n).collect());
        }
    }
    out
}

/// `sum_r w_r v_r ⊗ v_r ⊗ v_r`, entrywise.
pub fn symmetric_cp3(weights: &[f64], vs: &[Vec<f64>]) -> DenseTensor {
    let m = vs[0].len();
    let mut data = vec![0.0; m * m * m];
    for (w, v) in weights.iter().zip(vs) {
        for k in 0..m {
            for j in 0..m {
                for i in 0..m {
                    data[i + m * (j + m * k)] += w * v[i] * v[j] * v[k];
                }
            }
        }
    }
    DenseTensor::new(Shape::cubical(m, 3).unwrap(), data).unwrap()
}

/// Dense matrix product by loops.
pub fn matmul_naive(a: &Matrix, b: &Matrix) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; b.cols()]; a.rows()];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            for k in 0..a.cols() {
                *v += a.at(i + 1, k + 1).unwrap() * b.at(k + 1, j + 1).unwrap();
            }
        }
    }
    out
}

/// Kronecker product of a chain `ms[0] ⊗ ms[1] ⊗ ...` as rows, by the
/// mixed-radix index formula.
pub fn kronecker_naive(ms: &[&Matrix]) -> Vec<Vec<f64>> {
    let rows: usize = ms.iter().map(|m| m.rows()).product();
    let cols: usize = ms.iter().map(|m| m.cols()).product();
    let mut out = vec![vec![1.0; cols]; rows];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            // the last factor varies fastest
            let (mut rr, mut cc) = (r, c);
            for m in ms.iter().rev() {
                let (i, j) = (rr % m.rows(), cc % m.cols());
                rr /= m.rows();
                cc /= m.cols();
                *v *= m.at(i + 1, j + 1).unwrap();
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Are `a` and `b` equal up to a global sign within `tol`?
pub fn equal_up_to_sign(a: &[f64], b: &[f64], tol: f64) -> bool {
    let neg: Vec<f64> = b.iter().map(|v| -v).collect();
    max_abs_diff(a, b) <= tol || max_abs_diff(a, &neg) <= tol
}
