//! Contractions: dot products, traces, binary mode contractions, mode-`o`
//! products with matrices and multilinear vector contractions.
//!
//! Conventions:
//! - [`contract`] keeps the surviving modes of `a` before those of `b`.
//! - [`mode_product`] keeps the transformed mode at position `o` (some
//!   references move it to the end instead).

use crate::error::{Result, TensorError};
use crate::numeric::{accurate_dot, CompensatedSum};
use crate::shape::{Permutation, Shape};
use crate::tensor::{advance_colex, DenseTensor, Matrix};

/// Standard dot product.
pub fn dot(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(TensorError::ShapeMismatch(format!(
            "dot of lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(accurate_dot(u, v))
}

/// Puts `front` modes first (in the given order) and the rest after, in
/// increasing order.
fn bring_to_front(t: &DenseTensor, front: &[usize]) -> Result<DenseTensor> {
    let mut images = front.to_vec();
    images.extend((1..=t.order()).filter(|m| !front.contains(m)));
    t.permute_modes(&Permutation::new(images)?)
}

/// Contracts modes `mode_a` and `mode_b` of `t` against each other. The order
/// drops by two; the remaining modes keep their relative order.
pub fn trace_pair(t: &DenseTensor, mode_a: usize, mode_b: usize) -> Result<DenseTensor> {
    t.shape().check_mode(mode_a)?;
    t.shape().check_mode(mode_b)?;
    if mode_a == mode_b {
        return Err(TensorError::InvalidArgument(format!(
            "trace needs two distinct modes, got {mode_a} twice"
        )));
    }
    let n = t.dims()[mode_a - 1];
    if n != t.dims()[mode_b - 1] {
        return Err(TensorError::ShapeMismatch(format!(
            "modes {mode_a} and {mode_b} have sizes {n} and {}",
            t.dims()[mode_b - 1]
        )));
    }
    let p = bring_to_front(t, &[mode_a, mode_b])?;
    let rest: Vec<usize> = p.dims()[2..].to_vec();
    let block = n * n;
    let data = p
        .data()
        .chunks(block)
        .map(|c| (0..n).map(|i| c[i + n * i]).collect::<CompensatedSum>().value())
        .collect();
    DenseTensor::new(Shape::from_dims_unchecked(rest), data)
}

/// Contracts mode `mode_a` of `a` with mode `mode_b` of `b`. The result has
/// the remaining modes of `a` followed by the remaining modes of `b`.
pub fn contract(
    a: &DenseTensor,
    mode_a: usize,
    b: &DenseTensor,
    mode_b: usize,
) -> Result<DenseTensor> {
    a.shape().check_mode(mode_a)?;
    b.shape().check_mode(mode_b)?;
    let k = a.dims()[mode_a - 1];
    if k != b.dims()[mode_b - 1] {
        return Err(TensorError::ShapeMismatch(format!(
            "mode {mode_a} of {} and mode {mode_b} of {} differ",
            a.shape(),
            b.shape()
        )));
    }
    // both with the contracted mode first, so each column is one fiber
    let ap = bring_to_front(a, &[mode_a])?;
    let bp = bring_to_front(b, &[mode_b])?;
    let ra = ap.data().len() / k;
    let rb = bp.data().len() / k;
    let mut data = Vec::with_capacity(ra * rb);
    for jb in 0..rb {
        let fb = &bp.data()[jb * k..(jb + 1) * k];
        for ja in 0..ra {
            data.push(accurate_dot(&ap.data()[ja * k..(ja + 1) * k], fb));
        }
    }
    let mut dims = ap.dims()[1..].to_vec();
    dims.extend_from_slice(&bp.dims()[1..]);
    DenseTensor::new(Shape::from_dims_unchecked(dims), data)
}

/// Contracts several mode pairs `(mode in a, mode in b)` by one binary
/// contraction followed by traces.
pub fn contract_pairs(
    a: &DenseTensor,
    b: &DenseTensor,
    pairs: &[(usize, usize)],
) -> Result<DenseTensor> {
    let ((fa, fb), rest) = pairs
        .split_first()
        .ok_or_else(|| TensorError::InvalidArgument("no mode pairs given".into()))?;
    let mut t = contract(a, *fa, b, *fb)?;
    // track where each original mode ended up
    let mut pos_a: Vec<Option<usize>> = (1..=a.order())
        .map(|m| (m != *fa).then(|| if m < *fa { m } else { m - 1 }))
        .collect();
    let mut pos_b: Vec<Option<usize>> = (1..=b.order())
        .map(|m| (m != *fb).then(|| a.order() - 1 + if m < *fb { m } else { m - 1 }))
        .collect();
    for &(ma, mb) in rest {
        let (x, y) = match (
            pos_a.get(ma.wrapping_sub(1)).copied().flatten(),
            pos_b.get(mb.wrapping_sub(1)).copied().flatten(),
        ) {
            (Some(x), Some(y)) => (x, y),
            _ => {
                return Err(TensorError::InvalidArgument(format!(
                    "mode pair ({ma}, {mb}) invalid or already contracted"
                )))
            }
        };
        t = trace_pair(&t, x, y)?;
        let shift = |p: &mut Option<usize>| {
            if let Some(v) = *p {
                *p = if v == x || v == y {
                    None
                } else {
                    Some(v - usize::from(v > x) - usize::from(v > y))
                };
            }
        };
        pos_a.iter_mut().for_each(shift);
        pos_b.iter_mut().for_each(shift);
    }
    Ok(t)
}

/// Mode-`o` product: every mode-`o` fiber `f` is replaced by `l * f`. The
/// new mode (of size `l.rows()`) stays at position `o`.
pub fn mode_product(t: &DenseTensor, o: usize, l: &Matrix) -> Result<DenseTensor> {
    t.shape().check_mode(o)?;
    let dims = t.dims();
    let m = dims[o - 1];
    if l.cols() != m {
        return Err(TensorError::ShapeMismatch(format!(
            "matrix of width {} applied to mode {o} of size {m}",
            l.cols()
        )));
    }
    let n = l.rows();
    let inner: usize = dims[..o - 1].iter().product();
    let outer_count: usize = dims[o..].iter().product();
    let lt = l.transpose();
    let mut out = vec![0.0; inner * n * outer_count];
    let mut fiber = vec![0.0; m];
    for hi in 0..outer_count {
        for lo in 0..inner {
            for (i, f) in fiber.iter_mut().enumerate() {
                *f = t.data()[lo + inner * (i + m * hi)];
            }
            for r in 0..n {
                let row = &lt.data()[r * m..(r + 1) * m];
                out[lo + inner * (r + n * hi)] = accurate_dot(row, &fiber);
            }
        }
    }
    let mut new_dims = dims.to_vec();
    new_dims[o - 1] = n;
    DenseTensor::new(Shape::from_dims_unchecked(new_dims), out)
}

/// Applies one matrix per mode: `g •_1 L_1 ... •_O L_O`, i.e. the tensor
/// product of the linear maps applied to `g`.
pub fn multi_mode_product(g: &DenseTensor, factors: &[&Matrix]) -> Result<DenseTensor> {
    if factors.len() != g.order() {
        return Err(TensorError::ShapeMismatch(format!(
            "{} factors for a tensor of order {}",
            factors.len(),
            g.order()
        )));
    }
    factors
        .iter()
        .enumerate()
        .try_fold(g.clone(), |acc, (o, l)| mode_product(&acc, o + 1, l))
}

/// Full entrywise contraction `t •_[O] u`.
pub fn contract_all(t: &DenseTensor, u: &DenseTensor) -> Result<f64> {
    t.frobenius_inner(u)
}

fn check_vectors(t: &DenseTensor, skip: Option<usize>, xs: &[&[f64]]) -> Result<()> {
    let expected = t.order() - usize::from(skip.is_some());
    if xs.len() != expected {
        return Err(TensorError::ShapeMismatch(format!(
            "expected {expected} vectors, got {}",
            xs.len()
        )));
    }
    let modes = (1..=t.order()).filter(|&p| Some(p) != skip);
    for (x, p) in xs.iter().zip(modes) {
        if x.len() != t.dims()[p - 1] {
            return Err(TensorError::ShapeMismatch(format!(
                "vector of length {} for mode {p} of size {}",
                x.len(),
                t.dims()[p - 1]
            )));
        }
    }
    Ok(())
}

/// Contracts one vector into every mode except `o`. `xs` lists the vectors
/// for modes `1..o-1, o+1..O` in order; the result has length `M_o`.
pub fn contract_all_but(t: &DenseTensor, o: usize, xs: &[&[f64]]) -> Result<Vec<f64>> {
    t.shape().check_mode(o)?;
    check_vectors(t, Some(o), xs)?;
    Ok(contract_all_but_unchecked(t, o - 1, xs))
}

/// 0-based mode, validated inputs.
pub(crate) fn contract_all_but_unchecked(t: &DenseTensor, o0: usize, xs: &[&[f64]]) -> Vec<f64> {
    let dims = t.dims();
    let mut acc = vec![CompensatedSum::new(); dims[o0]];
    let mut coords = vec![0usize; dims.len()];
    for &v in t.data() {
        if v != 0.0 {
            let mut w = v;
            for (p, &c) in coords.iter().enumerate() {
                if p != o0 {
                    let k = if p < o0 { p } else { p - 1 };
                    w *= xs[k][c];
                }
            }
            acc[coords[o0]].add(w);
        }
        advance_colex(&mut coords, dims);
    }
    acc.iter().map(CompensatedSum::value).collect()
}

/// Same as [`contract_all_but`] with `x` in every contracted mode.
pub fn contract_all_but_same(t: &DenseTensor, o: usize, x: &[f64]) -> Result<Vec<f64>> {
    let xs = vec![x; t.order() - 1];
    contract_all_but(t, o, &xs)
}

/// Multilinear form `t(x_1, ..., x_O)`.
pub fn contract_vectors(t: &DenseTensor, xs: &[&[f64]]) -> Result<f64> {
    check_vectors(t, None, xs)?;
    Ok(contract_vectors_unchecked(t, xs))
}

pub(crate) fn contract_vectors_unchecked(t: &DenseTensor, xs: &[&[f64]]) -> f64 {
    let dims = t.dims();
    let mut acc = CompensatedSum::new();
    let mut coords = vec![0usize; dims.len()];
    for &v in t.data() {
        if v != 0.0 {
            let w = coords
                .iter()
                .zip(xs)
                .fold(v, |w, (&c, x)| w * x[c]);
            acc.add(w);
        }
        advance_colex(&mut coords, dims);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden;
    use crate::shape::MultiIndex;
    use crate::tensor::{kronecker_chain, outer, outer_vectors, unit_vector};

    fn mat(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn dot_examples() {
        assert_eq!(dot(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap(), 32.0);
        assert_eq!(dot(&[7.0, 8.0, 9.0], &[0.0, 1.0, 0.0]).unwrap(), 8.0);
        assert_eq!(dot(&[7.0, 8.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert!(dot(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn trace_examples() {
        let m = mat(&[&[1.0, 2.0], &[3.0, 4.0]]).into_tensor();
        let tr = trace_pair(&m, 1, 2).unwrap();
        assert_eq!(tr.order(), 0);
        assert_eq!(tr.scalar_value(), Some(5.0));

        let x = [1.0, -2.0, 0.5];
        let y = [3.0, 1.0, 4.0];
        let xy = outer_vectors(&[&x, &y]).unwrap();
        assert_eq!(
            trace_pair(&xy, 1, 2).unwrap().scalar_value(),
            Some(dot(&x, &y).unwrap())
        );

        let a = mat(&[&[1.0, 2.0, 0.0], &[-1.0, 0.5, 3.0]]);
        let b = mat(&[&[2.0, 1.0], &[0.0, 1.0], &[4.0, -2.0]]);
        let ab = outer(&[a.as_tensor(), b.as_tensor()]).unwrap();
        let prod = trace_pair(&ab, 2, 3).unwrap();
        assert_eq!(prod, a.matmul(&b).unwrap().into_tensor());

        assert!(trace_pair(&m, 1, 1).is_err());
        assert!(trace_pair(&a.into_tensor(), 1, 2).is_err());
    }

    #[test]
    fn contract_is_matrix_multiplication() {
        let x = mat(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        let y = mat(&[&[1.0, -1.0], &[0.5, 2.0], &[0.0, 3.0]]);
        let xy = contract(x.as_tensor(), 2, y.as_tensor(), 1).unwrap();
        assert_eq!(xy, x.matmul(&y).unwrap().into_tensor());
        assert!(!xy.to_string().is_empty());

        // AB = sum_m A[:, m] ⊗ B[m, :]
        let mut acc = DenseTensor::zeros(xy.shape().clone());
        for m in 1..=3 {
            let col = x.column(m).unwrap();
            let row = y.transpose().column(m).unwrap();
            acc = acc.add(&outer_vectors(&[&col, &row]).unwrap()).unwrap();
        }
        assert!(acc.max_abs_diff(&xy).unwrap() < 1e-15);

        assert!(contract(x.as_tensor(), 1, y.as_tensor(), 1).is_err());
    }

    #[test]
    fn contract_with_unit_vector_slices() {
        let t = golden::counterexample();
        let e2 = unit_vector(2, 2).unwrap();
        let s = contract(&t, 3, &e2, 1).unwrap();
        assert_eq!(s.dims(), &[2, 2]);
        assert_eq!(s.data(), &[2.0; 4]);
    }

    #[test]
    fn contract_pairs_matches_traces() {
        let a = DenseTensor::from_fn(Shape::new(vec![2, 3, 2]).unwrap(), |m| {
            (m.0[0] + 2 * m.0[1]) as f64 - m.0[2] as f64 * 0.5
        })
        .unwrap();
        let b = DenseTensor::from_fn(Shape::new(vec![3, 2]).unwrap(), |m| {
            m.0[0] as f64 * 1.5 - m.0[1] as f64
        })
        .unwrap();
        let full = contract_pairs(&a, &b, &[(2, 1), (3, 2)]).unwrap();
        let oracle: Vec<f64> = (1..=2)
            .map(|i| {
                let mut s = 0.0;
                for j in 1..=3 {
                    for k in 1..=2 {
                        s += a.entry(&MultiIndex(vec![i, j, k])).unwrap()
                            * b.entry(&MultiIndex(vec![j, k])).unwrap();
                    }
                }
                s
            })
            .collect();
        assert_eq!(full.dims(), &[2]);
        assert!(crate::numeric::max_abs_diff(full.data(), &oracle) < 1e-13);
        assert!(contract_pairs(&a, &b, &[(2, 1), (2, 2)]).is_err());
    }

    #[test]
    fn mode_product_examples() {
        let m = mat(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let l = mat(&[&[0.0, 1.0], &[2.0, -1.0], &[1.0, 1.0]]);
        assert_eq!(
            mode_product(m.as_tensor(), 1, &l).unwrap(),
            l.matmul(&m).unwrap().into_tensor()
        );
        assert_eq!(
            mode_product(m.as_tensor(), 2, &l).unwrap(),
            m.matmul(&l.transpose()).unwrap().into_tensor()
        );
        let t = golden::counterexample();
        for o in 1..=3 {
            assert_eq!(mode_product(&t, o, &Matrix::identity(2).unwrap()).unwrap(), t);
        }
        assert!(mode_product(&t, 1, &l.transpose()).is_err());
    }

    #[test]
    fn multi_mode_product_examples() {
        let t = golden::counterexample();
        let i2 = Matrix::identity(2).unwrap();
        assert_eq!(multi_mode_product(&t, &[&i2, &i2, &i2]).unwrap(), t);

        let g = DenseTensor::from_fn(Shape::new(vec![2, 3, 2]).unwrap(), |m| {
            m.0.iter().enumerate().map(|(i, &v)| (i + 1) as f64 * v as f64).sum::<f64>() - 3.0
        })
        .unwrap();
        let l1 = mat(&[&[1.0, 2.0], &[0.0, -1.0], &[3.0, 1.0]]);
        let l2 = mat(&[&[1.0, 0.0, 2.0], &[-1.0, 1.0, 0.5]]);
        let l3 = mat(&[&[2.0, 1.0], &[1.0, 1.0]]);
        let r = multi_mode_product(&g, &[&l1, &l2, &l3]).unwrap();
        let k = kronecker_chain(&[&l3, &l2, &l1]).unwrap();
        let want = k.matvec(g.data()).unwrap();
        assert!(crate::numeric::max_abs_diff(r.data(), &want) < 1e-12);
        assert!(multi_mode_product(&g, &[&l1, &l2]).is_err());
    }

    #[test]
    fn contract_all_but_examples() {
        let t = golden::counterexample();
        let one = [1.0, 1.0];
        // (x1+x2)^2 * (1, 2) at x = (1, 1)
        assert_eq!(contract_all_but(&t, 3, &[&one, &one]).unwrap(), vec![4.0, 8.0]);
        // (x1+x2)(x1+2x2) in both components
        assert_eq!(contract_all_but(&t, 1, &[&one, &one]).unwrap(), vec![6.0, 6.0]);
        let e1 = [1.0, 0.0];
        let e2 = [0.0, 1.0];
        assert_eq!(
            contract_all_but(&t, 3, &[&e1, &e2]).unwrap(),
            t.fiber(3, &[1, 2].into()).unwrap().data()
        );
        assert!(contract_all_but(&t, 3, &[&one]).is_err());
        assert!(contract_all_but(&t, 3, &[&one, &[1.0]]).is_err());
        assert_eq!(contract_vectors(&t, &[&one, &one, &one]).unwrap(), 12.0);
    }

    #[test]
    fn contract_all_aliases_inner() {
        let t = golden::counterexample();
        assert_eq!(contract_all(&t, &t).unwrap(), 20.0);
    }
}
