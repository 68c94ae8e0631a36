//! Sparse feature vectors, labels and the sign convention shared by every
//! learner in the crate.
//!
//! Feature indices are 1-based, as in LIBSVM files. Entries are kept sorted by
//! index with no explicit zeros, so two vectors with the same non-zero pattern
//! compare equal.

use std::fmt;

use crate::error::BoostError;

/// A sparse real vector stored as sorted `(index, value)` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from arbitrary pairs. Zero values are dropped; a repeated
    /// index is an error.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, BoostError>
    where
        I: IntoIterator<Item = (u32, f64)>,
    {
        let mut entries: Vec<(u32, f64)> = pairs.into_iter().filter(|&(_, v)| v != 0.0).collect();
        entries.sort_by_key(|&(i, _)| i);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(BoostError::DuplicateIndex(w[0].0));
        }
        if entries.first().is_some_and(|&(i, _)| i == 0) {
            return Err(BoostError::ZeroIndex);
        }
        Ok(Self { entries })
    }

    /// Builds a vector from pairs the caller guarantees are sorted and unique.
    /// Zeros are still dropped.
    pub(crate) fn from_sorted_unchecked(entries: Vec<(u32, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        let entries = entries.into_iter().filter(|&(_, v)| v != 0.0).collect();
        Self { entries }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: u32) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0.0)
    }

    /// Largest stored index, 0 for the empty vector.
    pub fn max_index(&self) -> u32 {
        self.entries.last().map_or(0, |&(i, _)| i)
    }

    pub fn norm_squared(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_sorted_unchecked(self.entries.iter().map(|&(i, v)| (i, v * factor)).collect())
    }

    /// `self + factor * other`, merged in one pass.
    pub fn axpy(&self, factor: f64, other: &SparseVector) -> Self {
        let (a, b) = (&self.entries, &other.entries);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push((b[j].0, factor * b[j].1));
                j += 1;
            } else {
                out.push((a[i].0, a[i].1 + factor * b[j].1));
                i += 1;
                j += 1;
            }
        }
        Self::from_sorted_unchecked(out)
    }
}

impl fmt::Display for SparseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (i, v)) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{i}:{v}")?;
        }
        Ok(())
    }
}

/// Inner product over the indices both vectors store.
pub fn dot(a: &SparseVector, b: &SparseVector) -> f64 {
    let (a, b) = (&a.entries, &b.entries);
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Inner product of a sparse vector with a dense weight slice indexed by
/// feature id (slot 0 unused). Indices past the end contribute nothing.
pub(crate) fn dot_dense(x: &SparseVector, dense: &[f64]) -> f64 {
    x.iter()
        .map(|(i, v)| dense.get(i as usize).map_or(0.0, |w| w * v))
        .sum()
}

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn from_sign(v: i32) -> Option<Label> {
        match v {
            1 => Some(Label::Positive),
            -1 => Some(Label::Negative),
            _ => None,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }

    /// Slot in two-element per-class arrays: negative first.
    pub(crate) fn index(self) -> usize {
        match self {
            Label::Negative => 0,
            Label::Positive => 1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Positive => f.write_str("+1"),
            Label::Negative => f.write_str("-1"),
        }
    }
}

/// Hard sign with ties going to the positive class.
pub fn sign01(v: f64) -> Label {
    if v >= 0.0 {
        Label::Positive
    } else {
        Label::Negative
    }
}

/// `y * f(x)` for a vote `f(x)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Margin(pub f64);

impl Margin {
    pub fn of(label: Label, vote: f64) -> Margin {
        Margin(label.sign() * vote)
    }
}

/// One labelled instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: SparseVector,
    pub label: Label,
}

impl Example {
    pub fn new(features: SparseVector, label: Label) -> Self {
        Self { features, label }
    }
}
