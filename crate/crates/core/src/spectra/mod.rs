//! Generalized eigenpairs (Z, H, per mode) and singular value tuples (ℓ², ℓᴼ).
//!
//! Mode-`o` eigenpairs contract `x` into every mode except `o`:
//!
//! * Z: `t(x, .., ·_o, .., x) = λ x` with `||x||_2 = 1`;
//! * H: `t(x, .., ·_o, .., x) = λ x^{[O-1]}` (entrywise power).
//!
//! Singular tuples solve `t(x_1, .., ·_o, .., x_O) = σ x_o` (ℓ²) or
//! `σ x_o^{[O-1]}` (ℓᴼ) for every mode simultaneously.

mod eigen;
mod singular;

use serde::{Deserialize, Serialize};

pub use eigen::{
    find_eigenpairs, find_eigenpairs_first_modes, find_eigenpairs_last_modes, EigenOptions,
    EigenSearch,
};
pub use singular::{
    best_rank_one, eig_singular_bridge, find_singular_tuples, BestRankOne, BridgeOutcome,
    SingularOptions, SingularSearch,
};

use crate::contract::contract_all_but_unchecked;
use crate::error::{Result, TensorError};
use crate::numeric::{entrywise_pow, norm_inf};
use crate::tensor::{advance_colex, DenseTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenVariant {
    Z,
    H,
}

impl std::fmt::Display for EigenVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EigenVariant::Z => "z",
            EigenVariant::H => "h",
        })
    }
}

impl std::str::FromStr for EigenVariant {
    type Err = TensorError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "z" | "Z" => Ok(EigenVariant::Z),
            "h" | "H" => Ok(EigenVariant::H),
            _ => Err(TensorError::InvalidArgument(format!("unknown eigen variant {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub variant: EigenVariant,
    /// 1-based mode left free by the contraction.
    pub mode: usize,
    pub lambda: f64,
    #[serde(rename = "vector")]
    pub x: Vec<f64>,
    pub residual: f64,
}

impl EigenPair {
    /// A record whose residual has not been evaluated yet (`+inf`); see
    /// [`EigenPair::evaluated`].
    pub fn new(variant: EigenVariant, mode: usize, lambda: f64, x: Vec<f64>) -> Self {
        EigenPair {
            variant,
            mode,
            lambda,
            x,
            residual: f64::INFINITY,
        }
    }

    /// Builds the pair and fills in its residual against `t`.
    pub fn evaluated(
        t: &DenseTensor,
        variant: EigenVariant,
        mode: usize,
        lambda: f64,
        x: Vec<f64>,
    ) -> Result<Self> {
        let mut p = EigenPair::new(variant, mode, lambda, x);
        p.residual = eig_residual(t, &p)?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularTuple {
    /// Either 2 or the tensor order.
    pub p: usize,
    pub sigma: f64,
    #[serde(rename = "vectors")]
    pub xs: Vec<Vec<f64>>,
    pub residual: f64,
}

impl SingularTuple {
    /// Unevaluated record (`residual = +inf`).
    pub fn new(p: usize, sigma: f64, xs: Vec<Vec<f64>>) -> Self {
        SingularTuple {
            p,
            sigma,
            xs,
            residual: f64::INFINITY,
        }
    }

    pub fn evaluated(t: &DenseTensor, p: usize, sigma: f64, xs: Vec<Vec<f64>>) -> Result<Self> {
        let mut s = SingularTuple::new(p, sigma, xs);
        s.residual = singular_residual(t, &s)?;
        Ok(s)
    }

    pub fn order(&self) -> usize {
        self.xs.len()
    }
}

fn check_pair(t: &DenseTensor, pair: &EigenPair) -> Result<()> {
    t.require_cubical()?;
    t.shape().check_mode(pair.mode)?;
    if pair.x.len() != t.dims()[0] {
        return Err(TensorError::ShapeMismatch(format!(
            "eigenvector of length {} for mode size {}",
            pair.x.len(),
            t.dims()[0]
        )));
    }
    Ok(())
}

/// `f(x) = t(x, .., ·_o, .., x)` for a 0-based mode.
pub(crate) fn eig_map(t: &DenseTensor, o0: usize, x: &[f64]) -> Vec<f64> {
    let xs = vec![x; t.order() - 1];
    contract_all_but_unchecked(t, o0, &xs)
}

/// Right-hand side vector of the eigen equation without `λ`.
pub(crate) fn eig_rhs(variant: EigenVariant, order: usize, x: &[f64]) -> Vec<f64> {
    match variant {
        EigenVariant::Z => x.to_vec(),
        EigenVariant::H => entrywise_pow(x, order - 1),
    }
}

/// ∞-norm defect of the eigen equation. `x` is used as given (no
/// normalization), so unnormalized orbit records can be checked too.
pub fn eig_residual(t: &DenseTensor, pair: &EigenPair) -> Result<f64> {
    check_pair(t, pair)?;
    let f = eig_map(t, pair.mode - 1, &pair.x);
    let w = eig_rhs(pair.variant, t.order(), &pair.x);
    Ok(f.iter()
        .zip(&w)
        .fold(0.0, |m, (a, b)| m.max((a - pair.lambda * b).abs())))
}

/// Image of a pair under `x -> s x`: `(s^{O-2} λ, s x)` for Z and `(λ, s x)`
/// for H. The stored residual is the exact-arithmetic bound
/// `|s|^{O-1} * residual`; call [`eig_residual`] to re-evaluate.
pub fn eig_orbit(pair: &EigenPair, t_scale: f64, order: usize) -> Result<EigenPair> {
    if t_scale == 0.0 || !t_scale.is_finite() {
        return Err(TensorError::InvalidArgument(format!(
            "orbit scale must be finite and nonzero, got {t_scale}"
        )));
    }
    if order < 2 {
        return Err(TensorError::InvalidArgument("eigenpairs need order >= 2".into()));
    }
    let lambda = match pair.variant {
        EigenVariant::Z => t_scale.powi(order as i32 - 2) * pair.lambda,
        EigenVariant::H => pair.lambda,
    };
    Ok(EigenPair {
        variant: pair.variant,
        mode: pair.mode,
        lambda,
        x: pair.x.iter().map(|v| t_scale * v).collect(),
        residual: t_scale.abs().powi(order as i32 - 1) * pair.residual,
    })
}

fn check_tuple(t: &DenseTensor, tuple: &SingularTuple) -> Result<()> {
    let order = t.order();
    if tuple.p != 2 && tuple.p != order {
        return Err(TensorError::InvalidArgument(format!(
            "p = {} is neither 2 nor the order {order}",
            tuple.p
        )));
    }
    if tuple.xs.len() != order {
        return Err(TensorError::ShapeMismatch(format!(
            "{} vectors for a tensor of order {order}",
            tuple.xs.len()
        )));
    }
    for (o, (x, &m)) in tuple.xs.iter().zip(t.dims()).enumerate() {
        if x.len() != m {
            return Err(TensorError::ShapeMismatch(format!(
                "vector {} has length {}, mode size is {m}",
                o + 1,
                x.len()
            )));
        }
    }
    Ok(())
}

/// Per-mode contractions `t(x_1, .., ·_o, .., x_O)` for every `o`.
pub(crate) fn singular_maps(t: &DenseTensor, xs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..t.order())
        .map(|o| {
            let others: Vec<&[f64]> = xs
                .iter()
                .enumerate()
                .filter(|(p, _)| *p != o)
                .map(|(_, v)| v.as_slice())
                .collect();
            contract_all_but_unchecked(t, o, &others)
        })
        .collect()
}

fn singular_residual_unchecked(t: &DenseTensor, p: usize, sigma: f64, xs: &[Vec<f64>]) -> f64 {
    let order = t.order();
    let maps = singular_maps(t, xs);
    maps.iter()
        .zip(xs)
        .map(|(f, x)| {
            let w = if p == 2 { x.clone() } else { entrywise_pow(x, order - 1) };
            let d: Vec<f64> = f.iter().zip(&w).map(|(a, b)| a - sigma * b).collect();
            norm_inf(&d)
        })
        .fold(0.0, f64::max)
}

/// Maximum over modes of the ∞-norm defect of the singular system.
pub fn singular_residual(t: &DenseTensor, tuple: &SingularTuple) -> Result<f64> {
    check_tuple(t, tuple)?;
    Ok(singular_residual_unchecked(t, tuple.p, tuple.sigma, &tuple.xs))
}

#[derive(Debug, Clone, PartialEq)]
pub enum SingularOrbitOp {
    /// `xs -> s xs` on every mode.
    Scale(f64),
    /// Negate `xs[o]` where `mask[o]` is true.
    Flip(Vec<bool>),
}

/// Applies a scaling or sign-flip symmetry of the singular system.
///
/// ℓ²: scaling by `s` gives `(s^{O-2} σ, s xs)`; flipping `k` vectors
/// multiplies `σ` by `(-1)^k`. ℓᴼ: scaling leaves `σ` unchanged; flips
/// follow the ℓ² rule for even `O` and are rejected for odd `O`. The stored
/// residual is the bound `|s|^{O-1} * residual`.
pub fn singular_orbit(tuple: &SingularTuple, op: &SingularOrbitOp) -> Result<SingularTuple> {
    let order = tuple.order();
    match op {
        SingularOrbitOp::Scale(s) => {
            let s = *s;
            if s == 0.0 || !s.is_finite() {
                return Err(TensorError::InvalidArgument(format!(
                    "orbit scale must be finite and nonzero, got {s}"
                )));
            }
            let sigma = if tuple.p == 2 {
                s.powi(order as i32 - 2) * tuple.sigma
            } else {
                tuple.sigma
            };
            Ok(SingularTuple {
                p: tuple.p,
                sigma,
                xs: tuple
                    .xs
                    .iter()
                    .map(|x| x.iter().map(|v| s * v).collect())
                    .collect(),
                residual: s.abs().powi(order as i32 - 1) * tuple.residual,
            })
        }
        SingularOrbitOp::Flip(mask) => {
            if mask.len() != order {
                return Err(TensorError::ShapeMismatch(format!(
                    "flip mask of length {} for order {order}",
                    mask.len()
                )));
            }
            if tuple.p != 2 && order % 2 == 1 {
                return Err(TensorError::InvalidArgument(
                    "sign flips are not symmetries of the odd-order l^O system".into(),
                ));
            }
            let k = mask.iter().filter(|&&b| b).count();
            let sigma = if k % 2 == 1 { -tuple.sigma } else { tuple.sigma };
            Ok(SingularTuple {
                p: tuple.p,
                sigma,
                xs: tuple
                    .xs
                    .iter()
                    .zip(mask)
                    .map(|(x, &f)| if f { x.iter().map(|v| -v).collect() } else { x.clone() })
                    .collect(),
                residual: tuple.residual,
            })
        }
    }
}

/// `∂ t(x_1, .., x_O)_o / ∂ x_q` as a row-major `M_o x M_q` matrix, with
/// every mode other than `o` and `q` contracted by `xs`. Modes are 0-based.
pub(crate) fn partial_matrix(t: &DenseTensor, o: usize, q: usize, xs: &[&[f64]]) -> Vec<Vec<f64>> {
    let dims = t.dims();
    let mut out = vec![vec![0.0; dims[q]]; dims[o]];
    let mut coords = vec![0usize; dims.len()];
    for &v in t.data() {
        if v != 0.0 {
            let mut w = v;
            for (p, &c) in coords.iter().enumerate() {
                if p != o && p != q {
                    w *= xs[p][c];
                }
            }
            out[coords[o]][coords[q]] += w;
        }
        advance_colex(&mut coords, dims);
    }
    out
}

/// Deterministic result order: decreasing `|value|`, then lexicographic
/// vector entries.
pub(crate) fn value_vector_cmp(a: (f64, &[f64]), b: (f64, &[f64])) -> std::cmp::Ordering {
    b.0.abs()
        .total_cmp(&a.0.abs())
        .then_with(|| b.0.total_cmp(&a.0))
        .then_with(|| {
            a.1.iter()
                .zip(b.1)
                .map(|(x, y)| x.total_cmp(y))
                .find(|c| c.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden::counterexample;

    #[test]
    fn counterexample_residuals() {
        let t = counterexample();
        let s = 0.5f64.sqrt();
        let z = EigenPair::new(EigenVariant::Z, 1, 3.0 * 2f64.sqrt(), vec![s, s]);
        assert!(eig_residual(&t, &z).unwrap() <= 1e-12);
        let h = EigenPair::new(EigenVariant::H, 1, 6.0, vec![s, s]);
        assert!(eig_residual(&t, &h).unwrap() <= 1e-12);
        // λ = 0 leaves the bare map norm
        let zero = EigenPair::new(EigenVariant::Z, 1, 0.0, vec![1.0, 0.0]);
        let f = eig_map(&t, 0, &[1.0, 0.0]);
        assert_eq!(eig_residual(&t, &zero).unwrap(), norm_inf(&f));
    }

    #[test]
    fn residual_requires_cubical_and_matching_lengths() {
        let t = DenseTensor::zeros(crate::shape::Shape::new(vec![2, 3]).unwrap());
        let p = EigenPair::new(EigenVariant::Z, 1, 0.0, vec![1.0, 0.0]);
        assert!(eig_residual(&t, &p).is_err());
        let p = EigenPair::new(EigenVariant::Z, 1, 0.0, vec![1.0, 0.0, 0.0]);
        assert!(eig_residual(&counterexample(), &p).is_err());
        let p = EigenPair::new(EigenVariant::Z, 4, 0.0, vec![1.0, 0.0]);
        assert!(eig_residual(&counterexample(), &p).is_err());
    }

    #[test]
    fn z_orbit_of_golden_pair() {
        let t = counterexample();
        let s = 0.5f64.sqrt();
        let p = EigenPair::evaluated(&t, EigenVariant::Z, 1, 3.0 * 2f64.sqrt(), vec![s, s]).unwrap();
        let q = eig_orbit(&p, 2.0, 3).unwrap();
        assert!((q.lambda - 6.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(eig_residual(&t, &q).unwrap() <= 1e-12);
        assert_eq!(eig_orbit(&p, 1.0, 3).unwrap().x, p.x);
        assert!(eig_orbit(&p, 0.0, 3).is_err());
        let h = EigenPair::new(EigenVariant::H, 1, 6.0, vec![s, s]);
        assert_eq!(eig_orbit(&h, -3.0, 3).unwrap().lambda, 6.0);
    }

    #[test]
    fn diagonal_matrix_singular_pair() {
        let t = crate::tensor::Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]])
            .unwrap()
            .into_tensor();
        let s = SingularTuple::new(2, 2.0, vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!(singular_residual(&t, &s).unwrap(), 0.0);
        let zero = SingularTuple::new(2, 0.0, vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!(singular_residual(&t, &zero).unwrap(), 2.0);
        let bad = SingularTuple::new(3, 2.0, vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert!(singular_residual(&t, &bad).is_err());
    }

    #[test]
    fn singular_orbit_rules() {
        let t = counterexample();
        let xs = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.6, 0.8]];
        let base = SingularTuple::evaluated(&t, 2, 1.5, xs.clone()).unwrap();
        let one = singular_orbit(&base, &SingularOrbitOp::Flip(vec![true, false, false])).unwrap();
        assert_eq!(one.sigma, -1.5);
        assert!((singular_residual(&t, &one).unwrap() - base.residual).abs() <= 1e-12);
        let two = singular_orbit(&base, &SingularOrbitOp::Flip(vec![true, true, false])).unwrap();
        assert_eq!(two.sigma, 1.5);
        let sc = singular_orbit(&base, &SingularOrbitOp::Scale(2.0)).unwrap();
        assert_eq!(sc.sigma, 3.0);

        let lo = SingularTuple::new(3, 1.5, xs);
        assert_eq!(singular_orbit(&lo, &SingularOrbitOp::Scale(5.0)).unwrap().sigma, 1.5);
        assert!(singular_orbit(&lo, &SingularOrbitOp::Flip(vec![true, false, false])).is_err());
        assert!(singular_orbit(&lo, &SingularOrbitOp::Scale(0.0)).is_err());
        assert!(singular_orbit(&lo, &SingularOrbitOp::Flip(vec![true])).is_err());
    }
}
