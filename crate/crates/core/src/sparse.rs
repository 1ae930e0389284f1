//! Sparse real vectors keyed by coordinate index.
//!
//! Only nonzero entries are stored; reading an absent index yields zero. Entries
//! live in a `BTreeMap` so iteration order (and therefore floating point
//! summation order) is deterministic.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{ensure_finite, Result};

#[derive(Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: BTreeMap<usize, f64>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from `(index, value)` pairs. Zeros are dropped and later
    /// duplicates overwrite earlier ones.
    pub fn from_pairs<I: IntoIterator<Item = (usize, f64)>>(pairs: I) -> Self {
        let mut v = Self::new();
        for (i, x) in pairs {
            v.set(i, x);
        }
        v
    }

    pub fn from_dense(values: &[f64]) -> Self {
        Self::from_pairs(values.iter().copied().enumerate())
    }

    pub fn singleton(index: usize, value: f64) -> Self {
        Self::from_pairs([(index, value)])
    }

    #[inline]
    pub fn get(&self, index: usize) -> f64 {
        self.entries.get(&index).copied().unwrap_or(0.0)
    }

    /// Stores `value` at `index`, removing the entry when `value == 0`.
    pub fn set(&mut self, index: usize, value: f64) {
        if value == 0.0 {
            self.entries.remove(&index);
        } else {
            self.entries.insert(index, value);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&i, &v)| (i, v))
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    /// One past the largest stored index, or 0 when empty.
    pub fn dim_hint(&self) -> usize {
        self.entries.keys().next_back().map_or(0, |&i| i + 1)
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (i, v) in self.iter() {
            if i < dim {
                out[i] = v;
            }
        }
        out
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.values().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        dot(self, other)
    }

    pub fn scaled(&self, alpha: f64) -> SparseVector {
        SparseVector::from_pairs(self.iter().map(|(i, v)| (i, alpha * v)))
    }

    /// `self += alpha * u`, dropping entries that cancel to exactly zero.
    pub fn add_scaled(&mut self, alpha: f64, u: &SparseVector) {
        for (i, ui) in u.iter() {
            let next = self.get(i) + alpha * ui;
            self.set(i, next);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.entries.values().all(|v| v.is_finite())
    }

    pub(crate) fn ensure_finite(&self, what: &str) -> Result<()> {
        for (i, v) in self.iter() {
            ensure_finite(v, &format!("{what}[{i}]"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for SparseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

impl FromIterator<(usize, f64)> for SparseVector {
    fn from_iter<I: IntoIterator<Item = (usize, f64)>>(iter: I) -> Self {
        Self::from_pairs(iter)
    }
}

/// Inner product over the intersection of supports. Iterates the smaller
/// operand and looks up into the larger one.
pub fn dot(u: &SparseVector, v: &SparseVector) -> f64 {
    let (small, large) = if u.len() <= v.len() { (u, v) } else { (v, u) };
    small
        .entries
        .iter()
        .filter_map(|(i, a)| large.entries.get(i).map(|b| a * b))
        .sum()
}

/// Returns `v + alpha * u`.
pub fn axpy(alpha: f64, u: &SparseVector, v: &SparseVector) -> SparseVector {
    let mut out = v.clone();
    out.add_scaled(alpha, u);
    out
}
