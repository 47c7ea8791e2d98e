//! Dense vectors, support sets, and the hard-thresholding operator.
//!
//! `hard_threshold(x, s)` keeps the `s` largest-magnitude entries of `x` and
//! zeroes the rest; `top_support(x, k)` returns their index set. Ties in
//! magnitude are broken toward the lower index, so both operators are
//! deterministic functions of their input. Selection runs in expected linear
//! time (see [`crate::select`]); a full sort is never performed.

use crate::select::select_top;
use crate::{Error, Result};

/// A dense model parameter or gradient of fixed dimension `d`.
///
/// All entries are finite; constructors reject NaN and infinities.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    values: Vec<f64>,
}

impl DenseVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            values: vec![0.0; dim],
        }
    }

    /// Builds a vector from raw values, rejecting non-finite entries.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.values.iter()
    }

    /// Number of nonzero entries (the ℓ₀ "norm").
    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0.0).count()
    }

    /// Index set of nonzero entries.
    pub fn support(&self) -> SupportSet {
        SupportSet {
            indices: self
                .values
                .iter()
                .enumerate()
                .filter(|&(_, &v)| v != 0.0)
                .map(|(i, _)| i)
                .collect(),
        }
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Euclidean distance to `other`.
    pub fn distance(&self, other: &DenseVector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Copy of `self` that is zero outside `keep`.
    pub fn restricted(&self, keep: &SupportSet) -> DenseVector {
        let mut out = DenseVector::zeros(self.dim());
        for &i in keep.iter() {
            if i < self.dim() {
                out.values[i] = self.values[i];
            }
        }
        out
    }

    /// Zeroes every coordinate outside `keep` in place.
    pub fn zero_outside(&mut self, keep: &SupportSet) {
        let mut kept = keep.iter().peekable();
        for (i, v) in self.values.iter_mut().enumerate() {
            match kept.peek() {
                Some(&&k) if k == i => {
                    kept.next();
                }
                _ => *v = 0.0,
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<usize> for DenseVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// A sorted, duplicate-free set of coordinate indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds from indices that must already be strictly increasing.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "support indices must be strictly increasing".into(),
            ));
        }
        Ok(Self { indices })
    }

    /// Builds from arbitrary indices, sorting and deduplicating.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.indices.iter()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    /// Set union by sorted merge.
    pub fn union(&self, other: &SupportSet) -> SupportSet {
        let mut merged = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (
            self.indices.iter().peekable(),
            other.indices.iter().peekable(),
        );
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    if x < y {
                        merged.push(x);
                        a.next();
                    } else if y < x {
                        merged.push(y);
                        b.next();
                    } else {
                        merged.push(x);
                        a.next();
                        b.next();
                    }
                }
                (Some(&&x), None) => {
                    merged.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    merged.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        SupportSet { indices: merged }
    }

    /// `true` when every index of `self` also lies in `other`.
    pub fn is_subset_of(&self, other: &SupportSet) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }
}

impl FromIterator<usize> for SupportSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self::from_unsorted(iter.into_iter().collect())
    }
}

/// Target number of nonzeros for a thresholding or selection operator.
///
/// Always at least one; operators additionally require it not to exceed the
/// vector dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparsityLevel(usize);

impl SparsityLevel {
    pub fn new(level: usize) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidSparsity { level, dim: 0 });
        }
        Ok(Self(level))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// Index set of the `k` largest-magnitude entries of `x`.
///
/// Ties are broken toward the lower index. Errors when `k` exceeds the
/// dimension or `x` contains a non-finite entry.
pub fn top_support(x: &DenseVector, k: SparsityLevel) -> Result<SupportSet> {
    let (set, _) = top_support_with_comparisons(x, k)?;
    Ok(set)
}

/// Same as [`top_support`], additionally reporting how many ranking
/// comparisons the selection performed. Useful for cost measurements.
pub fn top_support_with_comparisons(
    x: &DenseVector,
    k: SparsityLevel,
) -> Result<(SupportSet, u64)> {
    let k = k.get();
    if k > x.dim() {
        return Err(Error::InvalidSparsity {
            level: k,
            dim: x.dim(),
        });
    }
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let mut entries: Vec<(f64, u32)> = Vec::with_capacity(x.dim());
    let mut comparisons = 0;
    let set = top_k_indices(x.as_slice(), k, &mut entries, &mut comparisons);
    Ok((set, comparisons))
}

/// Selection core shared by the public operators and the solver fast paths.
/// `entries` is scratch space reused across calls.
pub(crate) fn top_k_indices(
    values: &[f64],
    k: usize,
    entries: &mut Vec<(f64, u32)>,
    comparisons: &mut u64,
) -> SupportSet {
    entries.clear();
    entries.extend(values.iter().enumerate().map(|(i, &v)| (v.abs(), i as u32)));
    select_top(entries, k, comparisons);
    let mut indices: Vec<usize> = entries[..k].iter().map(|&(_, i)| i as usize).collect();
    indices.sort_unstable();
    SupportSet { indices }
}

/// Hard-thresholding operator H_s: keeps the `s` largest-magnitude entries
/// of `x` (values untouched) and zeroes the rest.
pub fn hard_threshold(x: &DenseVector, s: SparsityLevel) -> Result<DenseVector> {
    let support = top_support(x, s)?;
    Ok(x.restricted(&support))
}

/// In-place H_s over a raw value buffer, skipping validation. `entries` is
/// reusable scratch. Solver hot paths use this; `s` must be in `1..=len`.
pub(crate) fn hard_threshold_in_place(values: &mut [f64], s: usize, entries: &mut Vec<(f64, u32)>) {
    debug_assert!(s >= 1 && s <= values.len());
    let mut comparisons = 0;
    let support = top_k_indices(values, s, entries, &mut comparisons);
    let mut kept = support.indices.iter().peekable();
    for (i, v) in values.iter_mut().enumerate() {
        match kept.peek() {
            Some(&&k) if k == i => {
                kept.next();
            }
            _ => *v = 0.0,
        }
    }
}
