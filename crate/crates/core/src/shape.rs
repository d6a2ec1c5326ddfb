//! Multi-index sets and their orderings.
//!
//! All public indices are 1-based: a multi-index `(m_1, ..., m_O)` of a shape
//! `[M_1, ..., M_O]` satisfies `1 <= m_o <= M_o`, and modes are numbered
//! `1..=O`. Conversion to 0-based storage offsets happens only in
//! [`Shape::offset`] and friends.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TensorError};

/// Linear ordering of a multi-index set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    /// First coordinate most significant (row-major for matrices).
    Lex,
    /// Last coordinate most significant (column-major for matrices).
    Colex,
}

/// Ordered list of mode sizes.
///
/// The empty shape is reserved for scalars produced by full contractions and
/// can only be built with [`Shape::scalar`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Shape {
    dims: Vec<usize>,
}

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(TensorError::InvalidShape("order must be at least 1".into()));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(TensorError::InvalidShape(format!(
                "mode {} has size 0",
                pos + 1
            )));
        }
        Ok(Shape { dims })
    }

    /// Order-0 shape with a single entry.
    pub fn scalar() -> Self {
        Shape { dims: Vec::new() }
    }

    /// `order` copies of `size`.
    pub fn cubical(size: usize, order: usize) -> Result<Self> {
        Shape::new(vec![size; order])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn is_scalar(&self) -> bool {
        self.dims.is_empty()
    }

    /// Size of mode `mode` (1-based).
    pub fn dim(&self, mode: usize) -> Result<usize> {
        self.check_mode(mode)?;
        Ok(self.dims[mode - 1])
    }

    pub fn cardinality(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_cubical(&self) -> bool {
        self.dims.windows(2).all(|w| w[0] == w[1])
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode == 0 || mode > self.order() {
            return Err(TensorError::InvalidMode {
                mode,
                order: self.order(),
            });
        }
        Ok(())
    }

    pub fn check_index(&self, m: &MultiIndex) -> Result<()> {
        if m.len() != self.order() {
            return Err(TensorError::IndexOutOfRange(format!(
                "multi-index {m} has length {}, shape {self} has order {}",
                m.len(),
                self.order()
            )));
        }
        for (o, (&i, &d)) in m.0.iter().zip(&self.dims).enumerate() {
            if i == 0 || i > d {
                return Err(TensorError::IndexOutOfRange(format!(
                    "component {} of {m} outside [1, {d}]",
                    o + 1
                )));
            }
        }
        Ok(())
    }

    /// Colex strides: `stride[0] = 1`, `stride[o] = M_1 * ... * M_o`.
    pub(crate) fn colex_strides(&self) -> Vec<usize> {
        let mut strides = Vec::with_capacity(self.order());
        let mut s = 1;
        for &d in &self.dims {
            strides.push(s);
            s *= d;
        }
        strides
    }

    /// 0-based storage offset of a validated multi-index (colex layout).
    pub fn offset(&self, m: &MultiIndex) -> Result<usize> {
        self.check_index(m)?;
        Ok(colex_offset0(&self.dims, m.0.iter().map(|&i| i - 1)))
    }

    /// Inverse of [`Shape::offset`], returning 0-based coordinates.
    pub(crate) fn coords0(&self, mut offset: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|&d| {
                let c = offset % d;
                offset /= d;
                c
            })
            .collect()
    }

    /// Iterates over all multi-indices in colex order.
    pub fn iter(&self) -> MultiIndexIter {
        MultiIndexIter::new(self.clone(), Ordering::Colex)
    }

    pub fn iter_ordered(&self, ordering: Ordering) -> MultiIndexIter {
        MultiIndexIter::new(self.clone(), ordering)
    }

    /// Shape with mode `mode` (1-based) removed.
    pub(crate) fn without_mode(&self, mode: usize) -> Shape {
        let mut dims = self.dims.clone();
        dims.remove(mode - 1);
        Shape { dims }
    }

    /// Unchecked constructor for internally derived shapes (may be order 0).
    pub(crate) fn from_dims_unchecked(dims: Vec<usize>) -> Shape {
        debug_assert!(dims.iter().all(|&d| d > 0));
        Shape { dims }
    }
}

impl<'de> Deserialize<'de> for Shape {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dims = Vec::<usize>::deserialize(d)?;
        if dims.is_empty() {
            return Ok(Shape::scalar());
        }
        Shape::new(dims).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.dims)
    }
}

pub(crate) fn colex_offset0(dims: &[usize], coords: impl Iterator<Item = usize>) -> usize {
    let mut offset = 0;
    let mut stride = 1;
    for (c, &d) in coords.zip(dims) {
        offset += c * stride;
        stride *= d;
    }
    offset
}

/// A 1-based multi-index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn new(indices: Vec<usize>) -> Self {
        MultiIndex(indices)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Componentwise (product-order) comparison.
    pub fn le_componentwise(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

impl<const N: usize> From<[usize; N]> for MultiIndex {
    fn from(v: [usize; N]) -> Self {
        MultiIndex(v.to_vec())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Enumerates a shape's multi-indices in lex or colex order.
pub struct MultiIndexIter {
    shape: Shape,
    ordering: Ordering,
    next: Option<Vec<usize>>,
}

impl MultiIndexIter {
    fn new(shape: Shape, ordering: Ordering) -> Self {
        let next = Some(vec![1; shape.order()]);
        MultiIndexIter {
            shape,
            ordering,
            next,
        }
    }
}

impl Iterator for MultiIndexIter {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let order = succ.len();
        let positions: Box<dyn Iterator<Item = usize>> = match self.ordering {
            Ordering::Colex => Box::new(0..order),
            Ordering::Lex => Box::new((0..order).rev()),
        };
        let mut advanced = false;
        for p in positions {
            if succ[p] < self.shape.dims[p] {
                succ[p] += 1;
                advanced = true;
                break;
            }
            succ[p] = 1;
        }
        if advanced {
            self.next = Some(succ);
        }
        Some(MultiIndex(current))
    }
}

/// 1-based position of `m` in the colexicographic enumeration of `shape`.
pub fn colex_rank(shape: &Shape, m: &MultiIndex) -> Result<usize> {
    Ok(shape.offset(m)? + 1)
}

/// 1-based position of `m` in the lexicographic enumeration of `shape`.
pub fn lex_rank(shape: &Shape, m: &MultiIndex) -> Result<usize> {
    shape.check_index(m)?;
    let mut offset = 0;
    for (&i, &d) in m.0.iter().zip(shape.dims()) {
        offset = offset * d + (i - 1);
    }
    Ok(offset + 1)
}

pub fn rank(shape: &Shape, m: &MultiIndex, ordering: Ordering) -> Result<usize> {
    match ordering {
        Ordering::Colex => colex_rank(shape, m),
        Ordering::Lex => lex_rank(shape, m),
    }
}

/// Inverse of [`rank`]: the multi-index at 1-based position `k`.
pub fn unrank(shape: &Shape, k: usize, ordering: Ordering) -> Result<MultiIndex> {
    let card = shape.cardinality();
    if k == 0 || k > card {
        return Err(TensorError::IndexOutOfRange(format!(
            "linear index {k} outside [1, {card}]"
        )));
    }
    let mut rest = k - 1;
    let mut idx = vec![0; shape.order()];
    let positions: Vec<usize> = match ordering {
        Ordering::Colex => (0..shape.order()).collect(),
        Ordering::Lex => (0..shape.order()).rev().collect(),
    };
    for p in positions {
        let d = shape.dims[p];
        idx[p] = rest % d + 1;
        rest /= d;
    }
    Ok(MultiIndex(idx))
}

/// A permutation of `[O]`, stored as the 1-based image list
/// `(perm(1), ..., perm(O))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i == 0 || i > n || seen[i - 1] {
                return Err(TensorError::InvalidPermutation(images));
            }
            seen[i - 1] = true;
        }
        Ok(Permutation(images))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((1..=n).collect())
    }

    /// Transposition of positions `a` and `b` (1-based) in `[n]`.
    pub fn swap(n: usize, a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 || a > n || b > n {
            return Err(TensorError::InvalidArgument(format!(
                "cannot swap {a} and {b} in [{n}]"
            )));
        }
        let mut p: Vec<usize> = (1..=n).collect();
        p.swap(a - 1, b - 1);
        Ok(Permutation(p))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `k -> self(other(k))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(TensorError::InvalidPermutation(other.0.clone()));
        }
        Ok(Permutation(other.0.iter().map(|&k| self.0[k - 1]).collect()))
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (k, &img) in self.0.iter().enumerate() {
            inv[img - 1] = k + 1;
        }
        Permutation(inv)
    }

    /// All permutations of `[n]` in lexicographic order of image lists.
    pub fn all(n: usize) -> Vec<Permutation> {
        fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
            if prefix.len() == used.len() {
                out.push(Permutation(prefix.clone()));
                return;
            }
            for i in 0..used.len() {
                if !used[i] {
                    used[i] = true;
                    prefix.push(i + 1);
                    rec(prefix, used, out);
                    prefix.pop();
                    used[i] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), &mut vec![false; n], &mut out);
        out
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = TensorError;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

/// Partition of `[N]` into consecutive intervals, stored as block lengths.
///
/// Equivalently a monotone surjection `[N] -> [B]`. Non-contiguous partitions
/// are not representable; general ordered partitions are expressed as a
/// [`Permutation`] followed by a contiguous partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ContiguousPartition {
    block_lengths: Vec<usize>,
}

impl ContiguousPartition {
    pub fn new(block_lengths: Vec<usize>) -> Result<Self> {
        if block_lengths.is_empty() {
            return Err(TensorError::PartitionMismatch("no blocks".into()));
        }
        if block_lengths.contains(&0) {
            return Err(TensorError::PartitionMismatch(format!(
                "empty block in {block_lengths:?}"
            )));
        }
        Ok(ContiguousPartition { block_lengths })
    }

    /// All-singleton partition of `[n]`.
    pub fn identity(n: usize) -> Result<Self> {
        ContiguousPartition::new(vec![1; n])
    }

    /// Single block covering `[n]`.
    pub fn single(n: usize) -> Result<Self> {
        ContiguousPartition::new(vec![n])
    }

    /// Builds a partition from the block label of every element, e.g.
    /// `[1,1,1,2,3,3]`. Labels must form a monotone surjection onto `[B]`.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        if labels.first() != Some(&1) {
            return Err(TensorError::PartitionMismatch(format!(
                "labels {labels:?} must start at block 1"
            )));
        }
        let mut lengths = vec![1usize];
        for w in labels.windows(2) {
            match w[1].checked_sub(w[0]) {
                Some(0) => *lengths.last_mut().unwrap() += 1,
                Some(1) => lengths.push(1),
                _ => {
                    return Err(TensorError::PartitionMismatch(format!(
                        "labels {labels:?} are not a monotone surjection"
                    )))
                }
            }
        }
        ContiguousPartition::new(lengths)
    }

    /// Parses bar notation such as `"123|4|56"`. Each block must list its
    /// elements in order and continue where the previous block stopped.
    pub fn parse(s: &str) -> Result<Self> {
        let mut next = 1usize;
        let mut lengths = Vec::new();
        for block in s.split('|') {
            let mut len = 0;
            for ch in block.chars() {
                let v = ch.to_digit(10).ok_or_else(|| {
                    TensorError::PartitionMismatch(format!("bad character {ch:?} in {s:?}"))
                })? as usize;
                if v != next {
                    return Err(TensorError::PartitionMismatch(format!(
                        "{s:?} is not a contiguous partition"
                    )));
                }
                next += 1;
                len += 1;
            }
            lengths.push(len);
        }
        ContiguousPartition::new(lengths)
    }

    pub fn block_lengths(&self) -> &[usize] {
        &self.block_lengths
    }

    pub fn num_blocks(&self) -> usize {
        self.block_lengths.len()
    }

    /// Size `N` of the partitioned set.
    pub fn ground_size(&self) -> usize {
        self.block_lengths.iter().sum()
    }

    /// Block labels `P(1), ..., P(N)`.
    pub fn labels(&self) -> Vec<usize> {
        self.block_lengths
            .iter()
            .enumerate()
            .flat_map(|(b, &len)| std::iter::repeat_n(b + 1, len))
            .collect()
    }

    /// Elements (1-based) of block `b` (1-based).
    pub fn block(&self, b: usize) -> std::ops::RangeInclusive<usize> {
        let start: usize = self.block_lengths[..b - 1].iter().sum::<usize>() + 1;
        start..=start + self.block_lengths[b - 1] - 1
    }
}

impl TryFrom<Vec<usize>> for ContiguousPartition {
    type Error = TensorError;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        ContiguousPartition::new(v)
    }
}

impl From<ContiguousPartition> for Vec<usize> {
    fn from(p: ContiguousPartition) -> Self {
        p.block_lengths
    }
}

impl fmt::Display for ContiguousPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut next = 1;
        for (b, &len) in self.block_lengths.iter().enumerate() {
            if b > 0 {
                write!(f, "|")?;
            }
            for _ in 0..len {
                if self.ground_size() > 9 {
                    write!(f, "{next},")?;
                } else {
                    write!(f, "{next}")?;
                }
                next += 1;
            }
        }
        Ok(())
    }
}

/// Merges the blocks of `p` along `q`: the partition whose labels are
/// `q(p(n))`. `q` must partition the block set of `p`.
pub fn coarsen(p: &ContiguousPartition, q: &ContiguousPartition) -> Result<ContiguousPartition> {
    if q.ground_size() != p.num_blocks() {
        return Err(TensorError::PartitionMismatch(format!(
            "cannot coarsen {p} ({} blocks) along {q} (partition of [{}])",
            p.num_blocks(),
            q.ground_size()
        )));
    }
    let mut lengths = Vec::with_capacity(q.num_blocks());
    let mut blocks = p.block_lengths.iter();
    for &qlen in &q.block_lengths {
        lengths.push(blocks.by_ref().take(qlen).sum());
    }
    ContiguousPartition::new(lengths)
}

/// True iff `p2` is coarser than `p1`: elements sharing a block of `p1`
/// always share a block of `p2`.
pub fn is_coarser(p2: &ContiguousPartition, p1: &ContiguousPartition) -> Result<bool> {
    if p1.ground_size() != p2.ground_size() {
        return Err(TensorError::PartitionMismatch(format!(
            "{p2} and {p1} partition different sets"
        )));
    }
    let l1 = p1.labels();
    let l2 = p2.labels();
    // blocks are intervals, so checking neighbours is enough
    Ok((1..l1.len()).all(|n| l1[n] != l1[n - 1] || l2[n] == l2[n - 1]))
}
