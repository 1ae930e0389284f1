use crate::sparse::SparseVector;

/// A labelled feature vector. Classification labels are exactly `-1.0` or `+1.0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub features: SparseVector,
    pub label: f64,
}

impl Example {
    pub fn new(features: SparseVector, label: f64) -> Self {
        Self { features, label }
    }

    /// `label * (x . features)`.
    pub fn margin(&self, x: &SparseVector) -> f64 {
        self.label * x.dot(&self.features)
    }
}
