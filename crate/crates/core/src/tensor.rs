//! Dense real tensors stored in colex order.
//!
//! A [`DenseTensor`] is a shape plus a flat buffer where the entry at the
//! multi-index `m` lives at position `colex_rank(m) - 1`. For matrices this is
//! column-major storage, which makes the colex vectorization of a tensor the
//! raw buffer itself.

use std::fmt;

use crate::error::{Result, TensorError};
use crate::numeric::{accurate_dot, max_abs_diff};
use crate::shape::{
    colex_offset0, lex_rank, unrank, ContiguousPartition, MultiIndex, Ordering, Permutation,
    Shape,
};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Shape,
    data: Vec<f64>,
}

impl DenseTensor {
    /// Builds a tensor from a colex-ordered buffer. Rejects length mismatches
    /// and non-finite entries.
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.cardinality() {
            return Err(TensorError::ShapeMismatch(format!(
                "shape {shape} needs {} entries, got {}",
                shape.cardinality(),
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(TensorError::NonFinite(pos));
        }
        Ok(DenseTensor { shape, data })
    }

    pub fn zeros(shape: Shape) -> Self {
        let n = shape.cardinality();
        DenseTensor {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn scalar(value: f64) -> Result<Self> {
        DenseTensor::new(Shape::scalar(), vec![value])
    }

    /// Order-1 tensor holding `v`.
    pub fn vector(v: Vec<f64>) -> Result<Self> {
        let shape = Shape::new(vec![v.len()])?;
        DenseTensor::new(shape, v)
    }

    /// Fills every entry from its 1-based multi-index.
    pub fn from_fn(shape: Shape, mut f: impl FnMut(&MultiIndex) -> f64) -> Result<Self> {
        let data = shape.iter().map(|m| f(&m)).collect();
        DenseTensor::new(shape, data)
    }

    pub(crate) fn from_parts_unchecked(shape: Shape, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.cardinality(), data.len());
        DenseTensor { shape, data }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn order(&self) -> usize {
        self.shape.order()
    }

    /// Colex-ordered entries.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn entry(&self, m: &MultiIndex) -> Result<f64> {
        Ok(self.data[self.shape.offset(m)?])
    }

    /// Entry at 0-based coordinates; panics when out of range.
    pub(crate) fn at0(&self, coords: &[usize]) -> f64 {
        self.data[colex_offset0(self.dims(), coords.iter().copied())]
    }

    /// Value of an order-0 (or single-entry) tensor.
    pub fn scalar_value(&self) -> Option<f64> {
        (self.data.len() == 1).then(|| self.data[0])
    }

    pub fn is_cubical(&self) -> bool {
        self.shape.is_cubical()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        DenseTensor::new(self.shape.clone(), self.data.iter().map(|&x| f(x)).collect())
    }

    pub fn scale(&self, alpha: f64) -> Result<Self> {
        self.map(|x| alpha * x)
    }

    fn zip_with(&self, other: &DenseTensor, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.require_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        DenseTensor::new(self.shape.clone(), data)
    }

    pub fn add(&self, other: &DenseTensor) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &DenseTensor) -> Result<Self> {
        self.zip_with(other, |a, b| a + alpha * b)
    }

    pub(crate) fn require_same_shape(&self, other: &DenseTensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(TensorError::ShapeMismatch(format!(
                "{} vs {}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &DenseTensor) -> Result<f64> {
        self.require_same_shape(other)?;
        Ok(max_abs_diff(&self.data, &other.data))
    }

    /// The mode-`mode` fiber through the other coordinates in `fixed`
    /// (a multi-index over all modes except `mode`, in mode order).
    pub fn fiber(&self, mode: usize, fixed: &MultiIndex) -> Result<DenseTensor> {
        self.shape.check_mode(mode)?;
        let rest = self.shape.without_mode(mode);
        if fixed.len() != rest.order() {
            return Err(TensorError::IndexOutOfRange(format!(
                "fiber needs {} fixed coordinates, got {}",
                rest.order(),
                fixed.len()
            )));
        }
        if !rest.is_scalar() {
            rest.check_index(fixed)?;
        }
        let n = self.dims()[mode - 1];
        let mut coords: Vec<usize> = fixed.as_slice().iter().map(|&i| i - 1).collect();
        coords.insert(mode - 1, 0);
        let values = (0..n)
            .map(|i| {
                coords[mode - 1] = i;
                self.at0(&coords)
            })
            .collect();
        DenseTensor::vector(values)
    }

    /// Sum over all multi-indices of `a_m * b_m`.
    pub fn frobenius_inner(&self, other: &DenseTensor) -> Result<f64> {
        self.require_same_shape(other)?;
        Ok(accurate_dot(&self.data, &other.data))
    }

    pub fn frobenius_norm(&self) -> f64 {
        accurate_dot(&self.data, &self.data).sqrt()
    }

    /// Rearranges modes so that result mode `k` is the original mode
    /// `perm(k)`; the result has dims `[M_perm(1), ..., M_perm(O)]`.
    ///
    /// On elementary tensors this reorders the outer factors:
    /// `permute(v_1 ⊗ ... ⊗ v_O, p) = v_p(1) ⊗ ... ⊗ v_p(O)`.
    pub fn permute_modes(&self, perm: &Permutation) -> Result<DenseTensor> {
        if perm.len() != self.order() {
            return Err(TensorError::InvalidPermutation(perm.images().to_vec()));
        }
        let dims = self.dims();
        let new_dims: Vec<usize> = perm.images().iter().map(|&p| dims[p - 1]).collect();
        let new_shape = Shape::from_dims_unchecked(new_dims);
        // stride in the result for each original mode
        let new_strides = new_shape.colex_strides();
        let mut stride_of_orig = vec![0; self.order()];
        for (k, &p) in perm.images().iter().enumerate() {
            stride_of_orig[p - 1] = new_strides[k];
        }
        let mut out = vec![0.0; self.data.len()];
        let mut coords = vec![0usize; self.order()];
        for &value in &self.data {
            let dst: usize = coords.iter().zip(&stride_of_orig).map(|(c, s)| c * s).sum();
            out[dst] = value;
            advance_colex(&mut coords, dims);
        }
        Ok(DenseTensor::from_parts_unchecked(new_shape, out))
    }

    /// Largest entrywise deviation between `self` and its image under `perm`.
    fn permutation_deviation(&self, perm: &Permutation) -> Result<f64> {
        self.max_abs_diff(&self.permute_modes(perm)?)
    }

    /// Symmetry test via adjacent transpositions `(k, k+1)`.
    ///
    /// Adjacent transpositions generate the symmetric group, so exact
    /// invariance under each of them is equivalent to invariance under every
    /// permutation. With `tol > 0` a composite permutation may deviate by up to
    /// `O(O^2) * tol`; use [`DenseTensor::is_symmetric_exhaustive`] for the
    /// strict all-permutations bound.
    pub fn is_symmetric(&self, tol: f64) -> Result<bool> {
        self.require_cubical()?;
        let o = self.order();
        for k in 1..o {
            if self.permutation_deviation(&Permutation::swap(o, k, k + 1)?)? > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Symmetry test enumerating all `O!` mode permutations.
    pub fn is_symmetric_exhaustive(&self, tol: f64) -> Result<bool> {
        self.require_cubical()?;
        for p in Permutation::all(self.order()) {
            if self.permutation_deviation(&p)? > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub(crate) fn require_cubical(&self) -> Result<()> {
        if !self.is_cubical() || self.shape.is_scalar() {
            return Err(TensorError::NotCubical(self.dims().to_vec()));
        }
        Ok(())
    }

    /// Entries listed in the given ordering.
    pub fn vectorize(&self, ordering: Ordering) -> Vec<f64> {
        match ordering {
            Ordering::Colex => self.data.clone(),
            Ordering::Lex => self
                .shape
                .iter_ordered(Ordering::Lex)
                .map(|m| self.data[self.shape.offset(&m).expect("valid index")])
                .collect(),
        }
    }

    /// Inverse of [`DenseTensor::vectorize`].
    pub fn tensorize(shape: Shape, v: &[f64], ordering: Ordering) -> Result<DenseTensor> {
        if v.len() != shape.cardinality() {
            return Err(TensorError::ShapeMismatch(format!(
                "cannot tensorize {} values into {shape}",
                v.len()
            )));
        }
        match ordering {
            Ordering::Colex => DenseTensor::new(shape, v.to_vec()),
            Ordering::Lex => {
                let mut data = vec![0.0; v.len()];
                for (k, &x) in v.iter().enumerate() {
                    let m = unrank(&shape, k + 1, Ordering::Lex)?;
                    data[shape.offset(&m)?] = x;
                }
                DenseTensor::new(shape, data)
            }
        }
    }

    /// Matricization with rows indexed colexicographically over `row_modes`
    /// (in the order given) and columns over the remaining modes in
    /// increasing order.
    pub fn matricize(&self, row_modes: &[usize]) -> Result<Matrix> {
        self.matricize_ordered(row_modes, Ordering::Colex)
    }

    /// Matricization with both row and column multi-indices ranked by
    /// `ordering`.
    pub fn matricize_ordered(&self, row_modes: &[usize], ordering: Ordering) -> Result<Matrix> {
        let o = self.order();
        if row_modes.is_empty() || row_modes.len() >= o {
            return Err(TensorError::InvalidArgument(format!(
                "row modes {row_modes:?} must be a nonempty proper subset of [{o}]"
            )));
        }
        let mut seen = vec![false; o];
        for &r in row_modes {
            self.shape.check_mode(r)?;
            if seen[r - 1] {
                return Err(TensorError::InvalidArgument(format!(
                    "mode {r} repeated in {row_modes:?}"
                )));
            }
            seen[r - 1] = true;
        }
        let mut images = row_modes.to_vec();
        images.extend((1..=o).filter(|m| !seen[m - 1]));
        let permuted = self.permute_modes(&Permutation::new(images)?)?;
        let rows: usize = row_modes.iter().map(|&r| self.dims()[r - 1]).product();
        let cols = self.data.len() / rows;
        match ordering {
            Ordering::Colex => Matrix::from_col_major(rows, cols, permuted.data),
            Ordering::Lex => {
                let dims = permuted.dims().to_vec();
                let row_shape = Shape::new(dims[..row_modes.len()].to_vec())?;
                let col_shape = Shape::new(dims[row_modes.len()..].to_vec())?;
                let mut out = vec![0.0; permuted.data.len()];
                for (k, &x) in permuted.data.iter().enumerate() {
                    let m = permuted.shape.coords0(k);
                    let (rm, cm) = m.split_at(row_modes.len());
                    let r = lex_rank(&row_shape, &one_based(rm))? - 1;
                    let c = lex_rank(&col_shape, &one_based(cm))? - 1;
                    out[r + rows * c] = x;
                }
                Matrix::from_col_major(rows, cols, out)
            }
        }
    }

    /// Removes every size-1 mode (keeps one mode if all are degenerate).
    pub fn squeeze(&self) -> DenseTensor {
        let mut dims: Vec<usize> = self.dims().iter().copied().filter(|&d| d != 1).collect();
        if dims.is_empty() && !self.shape.is_scalar() {
            dims.push(1);
        }
        DenseTensor::from_parts_unchecked(Shape::from_dims_unchecked(dims), self.data.clone())
    }
}

fn one_based(c: &[usize]) -> MultiIndex {
    MultiIndex(c.iter().map(|&i| i + 1).collect())
}

/// Advances 0-based coordinates to the colex successor (wrapping to zero).
#[inline]
pub(crate) fn advance_colex(coords: &mut [usize], dims: &[usize]) {
    for (c, &d) in coords.iter_mut().zip(dims) {
        *c += 1;
        if *c < d {
            return;
        }
        *c = 0;
    }
}

impl fmt::Display for DenseTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseTensor{} {:?}", self.shape, self.data)
    }
}

/// Tensor with a single 1 at `m`.
pub fn unit_tensor(shape: &Shape, m: &MultiIndex) -> Result<DenseTensor> {
    let mut t = DenseTensor::zeros(shape.clone());
    let k = shape.offset(m)?;
    t.data[k] = 1.0;
    Ok(t)
}

/// Unit vector `e_i` of length `n` (1-based `i`).
pub fn unit_vector(n: usize, i: usize) -> Result<DenseTensor> {
    unit_tensor(&Shape::new(vec![n])?, &MultiIndex(vec![i]))
}

/// Outer (tensor) product. The result's shape is the concatenation of the
/// factor shapes and its entry at a concatenated multi-index is the product
/// of the factor entries.
pub fn outer(factors: &[&DenseTensor]) -> Result<DenseTensor> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| TensorError::InvalidArgument("outer product of no factors".into()))?;
    let mut dims = first.dims().to_vec();
    let mut data = first.data.clone();
    for f in rest {
        dims.extend_from_slice(f.dims());
        // colex: the earlier factor's index varies fastest
        let mut next = Vec::with_capacity(data.len() * f.data.len());
        for &b in &f.data {
            next.extend(data.iter().map(|&a| a * b));
        }
        data = next;
    }
    DenseTensor::new(Shape::from_dims_unchecked(dims), data)
}

/// Outer product of plain vectors.
pub fn outer_vectors(vs: &[&[f64]]) -> Result<DenseTensor> {
    let ts = vs
        .iter()
        .map(|v| DenseTensor::vector(v.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    outer(&ts.iter().collect::<Vec<_>>())
}

/// Cubical tensor with `values` on the hyperdiagonal and zeros elsewhere.
pub fn hyperdiagonal(values: &[f64], order: usize) -> Result<DenseTensor> {
    let shape = Shape::cubical(values.len(), order)?;
    let mut t = DenseTensor::zeros(shape);
    for (r, &v) in values.iter().enumerate() {
        let coords = vec![r; order];
        let k = colex_offset0(t.dims(), coords.into_iter());
        t.data[k] = v;
    }
    DenseTensor::new(t.shape, t.data)
}

/// Zehfuss product: the outer product of `a` and `b` followed by the mode
/// permutation that interleaves their blocks as
/// `(a-block 1, b-block 1, a-block 2, b-block 2, ...)`.
pub fn zehfuss(
    a: &DenseTensor,
    pa: &ContiguousPartition,
    b: &DenseTensor,
    pb: &ContiguousPartition,
) -> Result<DenseTensor> {
    if pa.ground_size() != a.order() || pb.ground_size() != b.order() {
        return Err(TensorError::PartitionMismatch(format!(
            "partitions {pa} / {pb} do not cover orders {} / {}",
            a.order(),
            b.order()
        )));
    }
    if pa.num_blocks() != pb.num_blocks() {
        return Err(TensorError::PartitionMismatch(format!(
            "block counts differ: {pa} has {}, {pb} has {}",
            pa.num_blocks(),
            pb.num_blocks()
        )));
    }
    let shift = a.order();
    let mut images = Vec::with_capacity(a.order() + b.order());
    for blk in 1..=pa.num_blocks() {
        images.extend(pa.block(blk));
        images.extend(pb.block(blk).map(|m| m + shift));
    }
    outer(&[a, b])?.permute_modes(&Permutation::new(images)?)
}

/// Empirical moment tensor: the mean of `x^{⊗order}` over the samples, or of
/// `(x - mean)^{⊗order}` when `central`.
pub fn moment_tensor(samples: &[Vec<f64>], order: usize, central: bool) -> Result<DenseTensor> {
    let first = samples
        .first()
        .ok_or_else(|| TensorError::InvalidArgument("no samples".into()))?;
    let m = first.len();
    if m == 0 || order == 0 {
        return Err(TensorError::InvalidArgument(
            "samples must be nonempty vectors and order >= 1".into(),
        ));
    }
    if samples.iter().any(|s| s.len() != m) {
        return Err(TensorError::InvalidArgument("ragged samples".into()));
    }
    let n = samples.len() as f64;
    let mean: Vec<f64> = (0..m)
        .map(|i| samples.iter().map(|s| s[i]).sum::<f64>() / n)
        .collect();
    let mut acc = DenseTensor::zeros(Shape::cubical(m, order)?);
    for s in samples {
        let x: Vec<f64> = if central {
            s.iter().zip(&mean).map(|(a, b)| a - b).collect()
        } else {
            s.clone()
        };
        let copies: Vec<&[f64]> = vec![x.as_slice(); order];
        let p = outer_vectors(&copies)?;
        for (a, b) in acc.data.iter_mut().zip(&p.data) {
            *a += b;
        }
    }
    acc.scale(1.0 / n)
}

/// Order-2 tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix(DenseTensor);

impl Matrix {
    /// Builds a matrix from a column-major buffer.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Ok(Matrix(DenseTensor::new(Shape::new(vec![rows, cols])?, data)?))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let h = rows.len();
        let w = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != w) {
            return Err(TensorError::ShapeMismatch("ragged matrix rows".into()));
        }
        let mut data = Vec::with_capacity(h * w);
        for j in 0..w {
            data.extend(rows.iter().map(|r| r[j]));
        }
        Matrix::from_col_major(h, w, data)
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let w = columns.len();
        let h = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != h) {
            return Err(TensorError::ShapeMismatch("ragged matrix columns".into()));
        }
        Matrix::from_col_major(h, w, columns.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Matrix::from_col_major(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i + n * i] = 1.0;
        }
        Matrix::from_col_major(n, n, data)
    }

    pub fn rows(&self) -> usize {
        self.0.dims()[0]
    }

    pub fn cols(&self) -> usize {
        self.0.dims()[1]
    }

    /// Entry at 1-based row `i` and column `j`.
    pub fn at(&self, i: usize, j: usize) -> Result<f64> {
        self.0.entry(&MultiIndex(vec![i, j]))
    }

    #[inline]
    pub(crate) fn get0(&self, i: usize, j: usize) -> f64 {
        self.0.data[i + self.rows() * j]
    }

    /// Column `j` (0-based) as a slice.
    pub(crate) fn col0(&self, j: usize) -> &[f64] {
        let h = self.rows();
        &self.0.data[j * h..(j + 1) * h]
    }

    /// Column `j` (1-based).
    pub fn column(&self, j: usize) -> Result<Vec<f64>> {
        if j == 0 || j > self.cols() {
            return Err(TensorError::IndexOutOfRange(format!(
                "column {j} outside [1, {}]",
                self.cols()
            )));
        }
        Ok(self.col0(j - 1).to_vec())
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols()).map(|j| self.col0(j).to_vec()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.get0(i, j)).collect())
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        let (h, w) = (self.rows(), self.cols());
        let mut data = vec![0.0; h * w];
        for j in 0..w {
            for i in 0..h {
                data[j + w * i] = self.get0(i, j);
            }
        }
        Matrix(DenseTensor::from_parts_unchecked(
            Shape::from_dims_unchecked(vec![w, h]),
            data,
        ))
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols() != other.rows() {
            return Err(TensorError::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        let (h, w) = (self.rows(), other.cols());
        let mut data = Vec::with_capacity(h * w);
        let row_t = self.transpose();
        for j in 0..w {
            let b = other.col0(j);
            for i in 0..h {
                data.push(accurate_dot(row_t.col0(i), b));
            }
        }
        Matrix::from_col_major(h, w, data)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols() {
            return Err(TensorError::ShapeMismatch(format!(
                "cannot apply {}x{} matrix to length-{} vector",
                self.rows(),
                self.cols(),
                v.len()
            )));
        }
        let t = self.transpose();
        Ok((0..self.rows()).map(|i| accurate_dot(t.col0(i), v)).collect())
    }

    pub fn as_tensor(&self) -> &DenseTensor {
        &self.0
    }

    pub fn into_tensor(self) -> DenseTensor {
        self.0
    }

    pub fn data(&self) -> &[f64] {
        self.0.data()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> Result<f64> {
        self.0.max_abs_diff(&other.0)
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_column_slice(self.rows(), self.cols(), self.data())
    }
}

impl TryFrom<DenseTensor> for Matrix {
    type Error = TensorError;
    fn try_from(t: DenseTensor) -> Result<Self> {
        if t.order() != 2 {
            return Err(TensorError::ShapeMismatch(format!(
                "expected an order-2 tensor, got shape {}",
                t.shape()
            )));
        }
        Ok(Matrix(t))
    }
}

impl From<Matrix> for DenseTensor {
    fn from(m: Matrix) -> Self {
        m.0
    }
}

/// Kronecker product: block `(i, j)` of the result is `a[i, j] * b`.
pub fn kronecker(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let (ha, wa, hb, wb) = (a.rows(), a.cols(), b.rows(), b.cols());
    let h = ha * hb;
    let mut data = vec![0.0; h * wa * wb];
    for ja in 0..wa {
        for jb in 0..wb {
            let col = ja * wb + jb;
            for ia in 0..ha {
                let x = a.get0(ia, ja);
                for ib in 0..hb {
                    data[ia * hb + ib + h * col] = x * b.get0(ib, jb);
                }
            }
        }
    }
    Matrix::from_col_major(h, wa * wb, data)
}

/// `m_1 ⊗ m_2 ⊗ ... ⊗ m_k` (Kronecker), left to right.
pub fn kronecker_chain(ms: &[&Matrix]) -> Result<Matrix> {
    let (first, rest) = ms
        .split_first()
        .ok_or_else(|| TensorError::InvalidArgument("empty Kronecker chain".into()))?;
    rest.iter()
        .try_fold((*first).clone(), |acc, m| kronecker(&acc, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden;

    fn mat(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn shape(d: &[usize]) -> Shape {
        Shape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn construction_rejects_bad_buffers() {
        assert!(DenseTensor::new(shape(&[2, 2]), vec![0.0; 3]).is_err());
        assert_eq!(
            DenseTensor::new(shape(&[2]), vec![1.0, f64::NAN]),
            Err(TensorError::NonFinite(1))
        );
        assert!(DenseTensor::new(shape(&[1]), vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn unit_tensor_examples() {
        let u = unit_tensor(&shape(&[2, 2]), &[1, 2].into()).unwrap();
        assert_eq!(u, mat(&[&[0.0, 1.0], &[0.0, 0.0]]).into_tensor());
        assert_eq!(unit_vector(2, 1).unwrap().data(), &[1.0, 0.0]);
        let u = unit_tensor(&shape(&[2, 2, 2]), &[2, 1, 2].into()).unwrap();
        // colex enumeration of [2,2,2]: (2,1,2) is the 6th element
        let pos = shape(&[2, 2, 2])
            .iter()
            .position(|m| m == MultiIndex(vec![2, 1, 2]))
            .unwrap();
        assert_eq!(pos + 1, 6);
        assert_eq!(u.data().iter().position(|&x| x == 1.0), Some(5));
        assert!(unit_tensor(&shape(&[2]), &[3].into()).is_err());
    }

    #[test]
    fn outer_examples() {
        let e1 = unit_vector(2, 1).unwrap();
        let e2 = unit_vector(2, 2).unwrap();
        assert_eq!(
            outer(&[&e1, &e2]).unwrap(),
            mat(&[&[0.0, 1.0], &[0.0, 0.0]]).into_tensor()
        );
        assert_eq!(
            outer(&[&e2, &e1]).unwrap(),
            mat(&[&[0.0, 0.0], &[1.0, 0.0]]).into_tensor()
        );
        let v = DenseTensor::vector(vec![3.0, 4.0]).unwrap();
        let one = DenseTensor::vector(vec![1.0]).unwrap();
        let w = outer(&[&v, &one]).unwrap();
        assert_eq!(w.dims(), &[2, 1]);
        assert_eq!(w.data(), v.data());
        assert!(outer(&[]).is_err());
    }

    #[test]
    fn outer_is_associative() {
        let a = DenseTensor::vector(vec![1.0, 2.0]).unwrap();
        let b = mat(&[&[1.0, -1.0, 0.5], &[2.0, 0.0, 3.0]]).into_tensor();
        let c = DenseTensor::vector(vec![-1.0, 4.0, 0.25]).unwrap();
        let flat = outer(&[&a, &b, &c]).unwrap();
        assert_eq!(outer(&[&outer(&[&a, &b]).unwrap(), &c]).unwrap(), flat);
        assert_eq!(outer(&[&a, &outer(&[&b, &c]).unwrap()]).unwrap(), flat);
    }

    #[test]
    fn fiber_examples() {
        let m = mat(&[&[1.0, 2.0], &[3.0, 4.0]]).into_tensor();
        assert_eq!(m.fiber(1, &[2].into()).unwrap().data(), &[2.0, 4.0]);
        assert_eq!(m.fiber(2, &[1].into()).unwrap().data(), &[1.0, 2.0]);
        let t = golden::counterexample();
        assert_eq!(t.fiber(3, &[1, 1].into()).unwrap().data(), &[1.0, 2.0]);
        assert!(m.fiber(3, &[1].into()).is_err());
        assert!(m.fiber(1, &[3].into()).is_err());
    }

    #[test]
    fn inner_product_examples() {
        let a = mat(&[&[1.0, 2.0], &[3.0, 4.0]]).into_tensor();
        let i = Matrix::identity(2).unwrap().into_tensor();
        assert_eq!(a.frobenius_inner(&i).unwrap(), 5.0);
        assert_eq!(a.frobenius_inner(&DenseTensor::zeros(shape(&[2, 2]))).unwrap(), 0.0);
        let t = golden::counterexample();
        // oracle: four entries equal to 1 and four equal to 2
        let oracle: f64 = t.shape().iter().map(|m| t.entry(&m).unwrap().powi(2)).sum();
        assert_eq!(oracle, 20.0);
        assert_eq!(t.frobenius_inner(&t).unwrap(), 20.0);
        assert!(a.frobenius_inner(&t).is_err());
    }

    #[test]
    fn permute_examples() {
        let m = mat(&[&[1.0, 2.0], &[3.0, 4.0]]).into_tensor();
        let p = Permutation::new(vec![2, 1]).unwrap();
        assert_eq!(
            m.permute_modes(&p).unwrap(),
            mat(&[&[1.0, 3.0], &[2.0, 4.0]]).into_tensor()
        );
        assert_eq!(m.permute_modes(&Permutation::identity(2)).unwrap(), m);
        let t = golden::counterexample();
        assert_eq!(
            t.permute_modes(&Permutation::swap(3, 1, 2).unwrap()).unwrap(),
            t
        );
        assert!(m.permute_modes(&Permutation::identity(3)).is_err());
    }

    #[test]
    fn permute_reorders_outer_factors() {
        let a = DenseTensor::vector(vec![1.0, 2.0]).unwrap();
        let b = DenseTensor::vector(vec![3.0, 5.0, 7.0]).unwrap();
        let c = DenseTensor::vector(vec![-1.0, 0.5]).unwrap();
        let p = Permutation::new(vec![3, 1, 2]).unwrap();
        assert_eq!(
            outer(&[&a, &b, &c]).unwrap().permute_modes(&p).unwrap(),
            outer(&[&c, &a, &b]).unwrap()
        );
    }

    #[test]
    fn symmetry_examples() {
        assert!(mat(&[&[1.0, 2.0], &[2.0, 5.0]])
            .into_tensor()
            .is_symmetric(0.0)
            .unwrap());
        assert!(!golden::counterexample().is_symmetric(1e-12).unwrap());
        let v = [0.3, -1.2, 2.0];
        let t = outer_vectors(&[&v, &v, &v]).unwrap();
        assert!(t.is_symmetric(0.0).unwrap());
        assert!(mat(&[&[1.0, 2.0, 3.0]]).into_tensor().is_symmetric(0.0).is_err());
    }

    #[test]
    fn vectorize_examples() {
        let m = mat(&[&[1.0, 2.0], &[3.0, 4.0]]).into_tensor();
        assert_eq!(m.vectorize(Ordering::Colex), vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(m.vectorize(Ordering::Lex), vec![1.0, 2.0, 3.0, 4.0]);
        let v = DenseTensor::vector(vec![5.0, 6.0]).unwrap();
        assert_eq!(v.vectorize(Ordering::Lex), vec![5.0, 6.0]);
        for ord in [Ordering::Lex, Ordering::Colex] {
            let back =
                DenseTensor::tensorize(m.shape().clone(), &m.vectorize(ord), ord).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn matricize_examples() {
        let t = golden::counterexample();
        let m3 = t.matricize(&[3]).unwrap();
        // oracle: row k holds T[i,j,k] for (i,j) in colex order
        let mut oracle = vec![vec![0.0; 4]; 2];
        for m in t.shape().iter() {
            let (i, j, k) = (m.0[0], m.0[1], m.0[2]);
            oracle[k - 1][(i - 1) + 2 * (j - 1)] = t.entry(&m).unwrap();
        }
        assert_eq!(oracle, vec![vec![1.0; 4], vec![2.0; 4]]);
        assert_eq!(m3.to_rows(), oracle);
        let a = mat(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        assert_eq!(a.as_tensor().matricize(&[1]).unwrap(), a);
        assert_eq!(a.as_tensor().matricize(&[2]).unwrap(), a.transpose());
        assert!(t.matricize(&[]).is_err());
        assert!(t.matricize(&[1, 2, 3]).is_err());
        assert!(t.matricize(&[1, 1]).is_err());
    }

    #[test]
    fn kronecker_examples() {
        let a = mat(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let i2 = Matrix::identity(2).unwrap();
        let k = kronecker(&i2, &a).unwrap();
        assert_eq!(
            k.to_rows(),
            vec![
                vec![1.0, 2.0, 0.0, 0.0],
                vec![3.0, 4.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 2.0],
                vec![0.0, 0.0, 3.0, 4.0],
            ]
        );
        assert_eq!(kronecker(&a, &Matrix::identity(1).unwrap()).unwrap(), a);
        let swap = mat(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(
            kronecker(&i2, &swap).unwrap().to_rows(),
            vec![
                vec![0.0, 1.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 1.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ]
        );
    }

    #[test]
    fn zehfuss_lex_matricization_is_kronecker() {
        let l1 = mat(&[&[1.0, 2.0, 0.5], &[-1.0, 3.0, 2.0]]);
        let l2 = mat(&[&[0.0, 1.0], &[4.0, -2.0], &[1.5, 1.0]]);
        let p = ContiguousPartition::parse("1|2").unwrap();
        let z = zehfuss(l1.as_tensor(), &p, l2.as_tensor(), &p).unwrap();
        assert_eq!(z.dims(), &[2, 3, 3, 2]);
        assert_eq!(
            z.matricize_ordered(&[1, 2], Ordering::Lex).unwrap(),
            kronecker(&l1, &l2).unwrap()
        );
        assert_eq!(
            z.matricize(&[1, 2]).unwrap(),
            kronecker(&l2, &l1).unwrap()
        );
    }

    #[test]
    fn zehfuss_single_block_is_outer() {
        let a = mat(&[&[1.0, 2.0], &[3.0, 4.0]]).into_tensor();
        let b = DenseTensor::vector(vec![1.0, -1.0, 2.0]).unwrap();
        let z = zehfuss(
            &a,
            &ContiguousPartition::single(2).unwrap(),
            &b,
            &ContiguousPartition::single(1).unwrap(),
        )
        .unwrap();
        assert_eq!(z, outer(&[&a, &b]).unwrap());
        assert!(zehfuss(
            &a,
            &ContiguousPartition::identity(2).unwrap(),
            &b,
            &ContiguousPartition::single(1).unwrap()
        )
        .is_err());
    }

    #[test]
    fn zehfuss_of_unit_tensors() {
        let sa = shape(&[2, 3, 2]);
        let sb = shape(&[3, 2]);
        let pa = ContiguousPartition::parse("12|3").unwrap();
        let pb = ContiguousPartition::parse("1|2").unwrap();
        for ma in sa.iter() {
            for mb in sb.iter() {
                let z = zehfuss(
                    &unit_tensor(&sa, &ma).unwrap(),
                    &pa,
                    &unit_tensor(&sb, &mb).unwrap(),
                    &pb,
                )
                .unwrap();
                // interleaved index: (a1, a2, b1, a3, b2)
                let want = MultiIndex(vec![ma.0[0], ma.0[1], mb.0[0], ma.0[2], mb.0[1]]);
                assert_eq!(z, unit_tensor(&shape(&[2, 3, 3, 2, 2]), &want).unwrap());
            }
        }
    }

    #[test]
    fn moment_examples() {
        let s = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(
            moment_tensor(&s, 2, false).unwrap(),
            mat(&[&[0.5, 0.0], &[0.0, 0.5]]).into_tensor()
        );
        let c = moment_tensor(&[vec![1.0, 2.0], vec![3.0, -1.0]], 1, true).unwrap();
        assert!(c.data().iter().all(|&x| x.abs() < 1e-15));
        let ones = moment_tensor(&[vec![1.0, 1.0]], 3, false).unwrap();
        assert_eq!(ones.data(), &[1.0; 8]);
        assert!(moment_tensor(&[], 2, false).is_err());
        assert!(moment_tensor(&[vec![1.0], vec![1.0, 2.0]], 2, false).is_err());
    }

    #[test]
    fn squeeze_is_explicit() {
        let t = DenseTensor::zeros(shape(&[2, 1, 3]));
        assert_eq!(t.dims(), &[2, 1, 3]);
        assert_eq!(t.squeeze().dims(), &[2, 3]);
        assert_eq!(DenseTensor::zeros(shape(&[1, 1])).squeeze().dims(), &[1]);
    }

    #[test]
    fn reconstruction_from_units_and_fibers() {
        let t = DenseTensor::from_fn(shape(&[2, 3, 2]), |m| {
            (m.0[0] * 7 + m.0[1] * 3 + m.0[2]) as f64 - 4.5
        })
        .unwrap();
        let mut acc = DenseTensor::zeros(t.shape().clone());
        for m in t.shape().iter() {
            acc = acc
                .axpy(t.entry(&m).unwrap(), &unit_tensor(t.shape(), &m).unwrap())
                .unwrap();
        }
        assert_eq!(acc, t);

        // standard fiber decomposition along each mode
        for o in 1..=3 {
            let rest = t.shape().without_mode(o);
            let mut acc = DenseTensor::zeros(t.shape().clone());
            for fixed in rest.iter() {
                let fib = t.fiber(o, &fixed).unwrap();
                let mut factors = Vec::new();
                let mut k = 0;
                for p in 1..=3 {
                    if p == o {
                        factors.push(fib.clone());
                    } else {
                        factors.push(unit_vector(t.dims()[p - 1], fixed.0[k]).unwrap());
                        k += 1;
                    }
                }
                let term = outer(&factors.iter().collect::<Vec<_>>()).unwrap();
                acc = acc.add(&term).unwrap();
            }
            assert_eq!(acc, t);
        }
    }

    #[test]
    fn generator_symmetry_matches_exhaustive() {
        let mut state = 17u64;
        let mut rnd = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) % 5) as f64 - 2.0
        };
        for order in 2..=4 {
            for _ in 0..20 {
                let s = Shape::cubical(2, order).unwrap();
                let t = DenseTensor::from_fn(s.clone(), |_| rnd()).unwrap();
                assert_eq!(
                    t.is_symmetric(0.0).unwrap(),
                    t.is_symmetric_exhaustive(0.0).unwrap()
                );
                // symmetrized copy
                let perms = Permutation::all(order);
                let mut sym = DenseTensor::zeros(s);
                for p in &perms {
                    sym = sym.add(&t.permute_modes(p).unwrap()).unwrap();
                }
                assert!(sym.is_symmetric(0.0).unwrap());
                assert!(sym.is_symmetric_exhaustive(0.0).unwrap());
            }
        }
    }
}
