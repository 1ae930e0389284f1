//! Datasets: LIBSVM ingestion, deterministic shuffling, unit scaling, result
//! tables, and the bundled synthetic streams.

mod libsvm;
mod results;
mod shuffle;
pub mod synthetic;

use std::path::Path;

use crate::example::Example;
use crate::sparse::SparseVector;

pub use libsvm::{load_libsvm, parse_libsvm, parse_libsvm_str, to_libsvm_string, write_libsvm};
pub use results::{format_sig6, write_results_csv, ResultRow};
pub use shuffle::{bounded_index, shuffle, shuffle_order};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metadata {
    pub name: String,
    /// Path the data was read from, empty for generated data.
    pub source: String,
    pub count: usize,
    pub positive_fraction: f64,
    /// Examples left untouched by [`unit_scale`] because they had no features.
    pub zero_vectors: usize,
}

/// Labelled examples plus bookkeeping. Labels are exactly `-1.0` or `+1.0`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub examples: Vec<Example>,
    /// Largest feature index plus one.
    pub dim: usize,
    pub metadata: Metadata,
}

impl Dataset {
    pub fn new(name: impl Into<String>, examples: Vec<Example>) -> Self {
        let mut ds = Self {
            examples,
            dim: 0,
            metadata: Metadata {
                name: name.into(),
                ..Metadata::default()
            },
        };
        ds.refresh();
        ds
    }

    pub fn with_source(mut self, path: &Path) -> Self {
        self.metadata.source = path.display().to_string();
        self
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    fn refresh(&mut self) {
        self.dim = self
            .examples
            .iter()
            .map(|e| e.features.dim_hint())
            .max()
            .unwrap_or(0);
        self.metadata.count = self.examples.len();
        let positives = self.examples.iter().filter(|e| e.label > 0.0).count();
        self.metadata.positive_fraction = if self.examples.is_empty() {
            0.0
        } else {
            positives as f64 / self.examples.len() as f64
        };
    }
}

/// Divide every feature vector by its L2 norm. Empty vectors stay empty and
/// are counted in `metadata.zero_vectors`.
pub fn unit_scale(dataset: &Dataset) -> Dataset {
    let mut out = dataset.clone();
    out.metadata.zero_vectors = 0;
    for e in &mut out.examples {
        let norm = e.features.norm();
        if norm == 0.0 {
            out.metadata.zero_vectors += 1;
        } else {
            e.features = e.features.iter().map(|(i, v)| (i, v / norm)).collect::<SparseVector>();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_scale_examples() {
        let ds = Dataset::new(
            "t",
            vec![
                Example::new(SparseVector::from_pairs([(0, 3.0), (1, 4.0)]), 1.0),
                Example::new(SparseVector::new(), -1.0),
            ],
        );
        let scaled = unit_scale(&ds);
        assert!((scaled.examples[0].features.get(0) - 0.6).abs() < 1e-15);
        assert!((scaled.examples[0].features.get(1) - 0.8).abs() < 1e-15);
        assert!(scaled.examples[1].features.is_empty());
        assert_eq!(scaled.metadata.zero_vectors, 1);

        let again = unit_scale(&scaled);
        for (a, b) in again.examples[0].features.iter().zip(scaled.examples[0].features.iter()) {
            assert_eq!(a.0, b.0);
            assert!((a.1 - b.1).abs() < 1e-12);
        }
    }

    #[test]
    fn metadata_counts() {
        let ds = Dataset::new(
            "t",
            vec![
                Example::new(SparseVector::singleton(4, 1.0), 1.0),
                Example::new(SparseVector::singleton(1, 1.0), -1.0),
                Example::new(SparseVector::singleton(0, 1.0), -1.0),
                Example::new(SparseVector::new(), 1.0),
            ],
        );
        assert_eq!(ds.dim, 5);
        assert_eq!(ds.metadata.count, 4);
        assert_eq!(ds.metadata.positive_fraction, 0.5);
    }
}
