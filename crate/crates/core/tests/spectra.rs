mod common;

use proptest::prelude::*;
use rand::Rng;

use tensorspec::{
    contract_vectors, eig_residual, find_eigenpairs, find_singular_tuples, golden, DenseTensor,
    EigenOptions, EigenPair, EigenVariant, Shape, SingularOptions,
};

use common::*;

fn from_entries(a: &[[[f64; 2]; 2]; 2]) -> DenseTensor {
    let mut data = vec![0.0; 8];
    for (i, ai) in a.iter().enumerate() {
        for (j, aij) in ai.iter().enumerate() {
            for (k, v) in aij.iter().enumerate() {
                data[i + 2 * j + 4 * k] = *v;
            }
        }
    }
    DenseTensor::new(Shape::new(vec![2, 2, 2]).unwrap(), data).unwrap()
}

fn random_entries(rng: &mut rand_chacha::ChaCha8Rng) -> [[[f64; 2]; 2]; 2] {
    let mut a = [[[0.0; 2]; 2]; 2];
    for plane in a.iter_mut() {
        for row in plane.iter_mut() {
            for v in row.iter_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
        }
    }
    a
}

fn variant(h: bool) -> EigenVariant {
    if h {
        EigenVariant::H
    } else {
        EigenVariant::Z
    }
}

fn pairs(t: &DenseTensor, mode: usize, v: EigenVariant) -> Vec<EigenPair> {
    find_eigenpairs(t, mode, v, &EigenOptions::default()).unwrap().pairs
}

/// Residual of `(λ, x)` computed with the loop oracle.
fn oracle_residual(a: &[[[f64; 2]; 2]; 2], mode0: usize, h: bool, p: &EigenPair) -> f64 {
    let x = [p.x[0], p.x[1]];
    let f = contract_all_but_2x2x2(a, mode0, x);
    let w = if h { [x[0] * x[0], x[1] * x[1]] } else { x };
    (f[0] - p.lambda * w[0]).abs().max((f[1] - p.lambda * w[1]).abs())
}

#[test]
fn solver_matches_theta_grid_on_random_cubes() {
    let mut rng = rng(21);
    for _ in 0..20 {
        let a = random_entries(&mut rng);
        let t = from_entries(&a);
        for mode0 in 0..3 {
            for h in [false, true] {
                let found = pairs(&t, mode0 + 1, variant(h));
                for p in &found {
                    assert!(oracle_residual(&a, mode0, h, p) < 1e-10, "{p:?}");
                }
                for (l, x) in theta_grid_oracle(&a, mode0, h, 20_000) {
                    let hit = found.iter().any(|p| {
                        (p.lambda - l).abs() < 1e-8 && max_abs_diff(&p.x, &x) < 1e-7
                    });
                    assert!(hit, "mode {} {:?}: oracle root ({l}, {x:?}) missing", mode0 + 1, variant(h));
                }
            }
        }
    }
}

#[test]
fn counterexample_modes_one_and_two_agree() {
    let t = golden::counterexample();
    for v in [EigenVariant::Z, EigenVariant::H] {
        let a = pairs(&t, 1, v);
        let b = pairs(&t, 2, v);
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            assert!((p.lambda - q.lambda).abs() < 1e-12);
            assert!(max_abs_diff(&p.x, &q.x) < 1e-10);
        }
    }
}

#[test]
fn counterexample_pairs_pass_the_loop_oracle() {
    let a = counterexample_entries();
    let t = from_entries(&a);
    assert_eq!(t, golden::counterexample());
    for mode0 in 0..3 {
        for h in [false, true] {
            for p in pairs(&t, mode0 + 1, variant(h)) {
                assert!(oracle_residual(&a, mode0, h, &p) < 1e-10, "{p:?}");
            }
        }
    }
}

fn random_unit(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v = uniform_vec(rng, n);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

#[test]
fn top_singular_value_bounds_every_rank_one_probe() {
    let mut rng = rng(22);
    let mut tensors = vec![golden::counterexample()];
    tensors.extend((0..4).map(|_| random_tensor(&mut rng, &[3, 2, 4])));
    for t in &tensors {
        let top = find_singular_tuples(t, 2, &SingularOptions::default()).unwrap().tuples[0].sigma;
        for _ in 0..1000 {
            let xs: Vec<Vec<f64>> = t.dims().iter().map(|&m| random_unit(&mut rng, m)).collect();
            let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
            assert!(contract_vectors(t, &refs).unwrap().abs() <= top + 1e-12);
        }
    }
}

#[test]
fn top_singular_value_matches_grid_search() {
    let mut rng = rng(23);
    let mut cases = vec![counterexample_entries()];
    cases.extend((0..5).map(|_| random_entries(&mut rng)));
    for a in cases {
        let t = from_entries(&a);
        let top = find_singular_tuples(&t, 2, &SingularOptions::default()).unwrap().tuples[0].sigma;
        let grid = grid_sigma_max_2x2x2(&a, 1500);
        // the grid undershoots by O(h^2)
        assert!(grid <= top + 1e-12, "{grid} > {top}");
        assert!(top - grid < 1e-5 * top, "{top} vs {grid}");
    }
    let found = find_singular_tuples(&golden::counterexample(), 2, &SingularOptions::default()).unwrap();
    assert!((found.tuples[0].sigma - 20f64.sqrt()).abs() < 1e-12);
}

#[test]
fn symmetric_solver_pairs_satisfy_the_defining_equation() {
    let mut rng = rng(24);
    for m in [3, 4] {
        let t = random_symmetric3(&mut rng, m);
        let found = pairs(&t, 1, EigenVariant::Z);
        assert!(!found.is_empty());
        for p in &found {
            assert!(eig_residual(&t, p).unwrap() < 1e-10);
            let norm: f64 = p.x.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        // symmetric: every mode yields the same spectrum
        let other = pairs(&t, 3, EigenVariant::Z);
        for p in &found {
            assert!(other.iter().any(|q| (q.lambda - p.lambda).abs() < 1e-8
                && max_abs_diff(&q.x, &p.x) < 1e-7));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn h_eigenvalues_scale_with_the_tensor(
        seed in any::<u64>(),
        c in prop_oneof![-3.0..-0.2f64, 0.2..3.0f64],
        mode in 1usize..=3,
    ) {
        let mut rng = rng(seed);
        let a = random_entries(&mut rng);
        let t = from_entries(&a);
        let ct = t.scale(c).unwrap();
        let base = pairs(&t, mode, EigenVariant::H);
        let scaled = pairs(&ct, mode, EigenVariant::H);
        for p in &base {
            let hit = scaled.iter().any(|q| {
                (q.lambda - c * p.lambda).abs() < 1e-8 * (1.0 + p.lambda.abs())
                    && equal_up_to_sign(&q.x, &p.x, 1e-7)
            });
            prop_assert!(hit, "({}, {:?}) has no scaled partner", p.lambda, p.x);
        }
    }

    #[test]
    fn z_eigenvalues_flip_with_the_vector(seed in any::<u64>(), mode in 1usize..=3) {
        // odd order: (λ, x) and (-λ, -x) come together
        let mut rng = rng(seed);
        let t = from_entries(&random_entries(&mut rng));
        let found = pairs(&t, mode, EigenVariant::Z);
        for p in &found {
            let neg: Vec<f64> = p.x.iter().map(|v| -v).collect();
            prop_assert!(found.iter().any(|q| (q.lambda + p.lambda).abs() < 1e-9
                && max_abs_diff(&q.x, &neg) < 1e-9));
        }
    }
}
