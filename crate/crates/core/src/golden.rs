//! Small tensors with known properties, built from CP descriptions.

use crate::decomp::{cp_eval, CpDecomposition};
use crate::tensor::DenseTensor;

fn e(i: usize) -> Vec<f64> {
    let mut v = vec![0.0; 2];
    v[i - 1] = 1.0;
    v
}

/// `(1,1) ⊗ (1,1) ⊗ (1,2)`: the 2×2×2 tensor with frontal slices of ones
/// and twos. Not symmetric; its mode-1 and mode-3 eigenpairs differ.
pub fn counterexample_cp() -> CpDecomposition {
    CpDecomposition::from_terms(&[(1.0, vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 2.0]])])
        .expect("valid CP")
}

pub fn counterexample() -> DenseTensor {
    cp_eval(&counterexample_cp()).expect("valid CP")
}

/// Unit-vector index triples of the three terms of each tensor.
const EIGHT_TERMS: [[[usize; 3]; 3]; 8] = [
    [[1, 1, 1], [1, 2, 2], [2, 1, 2]],
    [[1, 1, 1], [1, 2, 2], [2, 2, 1]],
    [[1, 1, 1], [2, 1, 2], [2, 2, 1]],
    [[1, 1, 2], [1, 2, 1], [2, 1, 1]],
    [[1, 1, 2], [1, 2, 1], [2, 2, 2]],
    [[1, 1, 2], [2, 1, 1], [2, 2, 2]],
    [[1, 2, 1], [2, 1, 1], [2, 2, 2]],
    [[1, 2, 2], [2, 1, 2], [2, 2, 1]],
];

/// Eight 2×2×2 tensors of tensor rank 3 whose multilinear ranks are all
/// `(2,2,2)`. Each is a sum of three products of standard unit vectors.
pub fn eight_cps() -> Vec<CpDecomposition> {
    EIGHT_TERMS
        .iter()
        .map(|terms| {
            let t: Vec<(f64, Vec<Vec<f64>>)> = terms
                .iter()
                .map(|idx| (1.0, idx.iter().map(|&i| e(i)).collect()))
                .collect();
            CpDecomposition::from_terms(&t).expect("valid CP")
        })
        .collect()
}

pub fn eight_tensors() -> Vec<DenseTensor> {
    eight_cps().iter().map(|cp| cp_eval(cp).expect("valid CP")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::MultiIndex;

    #[test]
    fn counterexample_slices() {
        let t = counterexample();
        for i in 1..=2 {
            for j in 1..=2 {
                assert_eq!(t.entry(&MultiIndex(vec![i, j, 1])).unwrap(), 1.0);
                assert_eq!(t.entry(&MultiIndex(vec![i, j, 2])).unwrap(), 2.0);
            }
        }
        assert!((t.frobenius_norm() - 20f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn eight_tensors_are_distinct_zero_one_tensors() {
        let ts = eight_tensors();
        for (i, a) in ts.iter().enumerate() {
            assert_eq!(a.data().iter().filter(|&&v| v == 1.0).count(), 3);
            assert!(a.data().iter().all(|&v| v == 0.0 || v == 1.0));
            for b in &ts[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }
}
