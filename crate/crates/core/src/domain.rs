//! Axis-aligned box feasible sets and Euclidean projection onto them.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::sparse::SparseVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Bounds {
    /// Same interval on every coordinate. `dim == None` admits any index.
    Uniform {
        lower: f64,
        upper: f64,
        dim: Option<usize>,
    },
    Explicit {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
}

/// The feasible set `[a_0, b_0] x ... x [a_{n-1}, b_{n-1}]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    bounds: Bounds,
}

impl BoxDomain {
    pub fn uniform(lower: f64, upper: f64, dim: Option<usize>) -> Result<Self> {
        check_interval(0, lower, upper)?;
        Ok(Self {
            bounds: Bounds::Uniform { lower, upper, dim },
        })
    }

    /// `[-radius, radius]^n`.
    pub fn symmetric(radius: f64, dim: Option<usize>) -> Result<Self> {
        Self::uniform(-radius, radius, dim)
    }

    /// `[0, 1]^n`.
    pub fn unit(dim: Option<usize>) -> Self {
        Self {
            bounds: Bounds::Uniform {
                lower: 0.0,
                upper: 1.0,
                dim,
            },
        }
    }

    pub fn explicit(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidInput(format!(
                "box bounds have different lengths ({} vs {})",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (&a, &b)) in lower.iter().zip(&upper).enumerate() {
            check_interval(i, a, b)?;
        }
        Ok(Self {
            bounds: Bounds::Explicit { lower, upper },
        })
    }

    /// Number of coordinates, or `None` for an unbounded uniform box.
    pub fn dim(&self) -> Option<usize> {
        match &self.bounds {
            Bounds::Uniform { dim, .. } => *dim,
            Bounds::Explicit { lower, .. } => Some(lower.len()),
        }
    }

    pub fn has_index(&self, i: usize) -> bool {
        self.dim().is_none_or(|n| i < n)
    }

    /// `(a_i, b_i)`. Panics when `i` is outside the box's dimension.
    #[inline]
    pub fn interval(&self, i: usize) -> (f64, f64) {
        match &self.bounds {
            Bounds::Uniform { lower, upper, dim } => {
                assert!(dim.is_none_or(|n| i < n), "coordinate {i} outside box");
                (*lower, *upper)
            }
            Bounds::Explicit { lower, upper } => (lower[i], upper[i]),
        }
    }

    #[inline]
    pub fn diameter(&self, i: usize) -> f64 {
        let (a, b) = self.interval(i);
        b - a
    }

    /// Per-coordinate diameters `D_i`, when the dimension is known.
    pub fn diameters(&self) -> Option<Vec<f64>> {
        let n = self.dim()?;
        Some((0..n).map(|i| self.diameter(i)).collect())
    }

    /// `D = sqrt(sum_i D_i^2)`, when the dimension is known.
    pub fn full_diameter(&self) -> Option<f64> {
        self.diameters()
            .map(|d| d.iter().map(|x| x * x).sum::<f64>().sqrt())
    }

    #[inline]
    pub fn clip(&self, i: usize, value: f64) -> f64 {
        let (a, b) = self.interval(i);
        value.clamp(a, b)
    }

    /// Whether every coordinate interval contains 0, so that a sparse point with
    /// implicit zeros is feasible.
    pub fn zero_feasible(&self) -> bool {
        match &self.bounds {
            Bounds::Uniform { lower, upper, .. } => *lower <= 0.0 && 0.0 <= *upper,
            Bounds::Explicit { lower, upper } => lower
                .iter()
                .zip(upper)
                .all(|(&a, &b)| a <= 0.0 && 0.0 <= b),
        }
    }

    pub fn contains(&self, point: &SparseVector) -> bool {
        let stored_ok = point
            .iter()
            .all(|(i, v)| self.has_index(i) && {
                let (a, b) = self.interval(i);
                a <= v && v <= b
            });
        stored_ok && self.implicit_zeros_ok(point)
    }

    fn implicit_zeros_ok(&self, point: &SparseVector) -> bool {
        match &self.bounds {
            Bounds::Uniform { lower, upper, .. } => {
                (*lower <= 0.0 && 0.0 <= *upper) || point.len() == self.dim().unwrap_or(usize::MAX)
            }
            Bounds::Explicit { lower, upper } => (0..lower.len())
                .filter(|&i| point.get(i) == 0.0)
                .all(|i| lower[i] <= 0.0 && 0.0 <= upper[i]),
        }
    }

    /// Euclidean projection of a sparse point. Absent coordinates are read as 0
    /// and materialised only when 0 lies outside their interval, which requires
    /// a known dimension.
    pub fn project(&self, point: &SparseVector) -> Result<SparseVector> {
        point.ensure_finite("point")?;
        let mut out = SparseVector::new();
        for (i, v) in point.iter() {
            if !self.has_index(i) {
                return Err(Error::InvalidInput(format!(
                    "coordinate {i} outside box of dimension {:?}",
                    self.dim()
                )));
            }
            out.set(i, self.clip(i, v));
        }
        if !self.zero_feasible() {
            let n = self.dim().ok_or_else(|| {
                Error::Config("box excluding 0 needs an explicit dimension".into())
            })?;
            for i in 0..n {
                if point.get(i) == 0.0 {
                    out.set(i, self.clip(i, 0.0));
                }
            }
        }
        Ok(out)
    }

    pub fn project_dense(&self, point: &[f64]) -> Result<Vec<f64>> {
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                ensure_finite(v, &format!("point[{i}]"))?;
                if !self.has_index(i) {
                    return Err(Error::InvalidInput(format!("coordinate {i} outside box")));
                }
                Ok(self.clip(i, v))
            })
            .collect()
    }

    /// Projection of the origin; the starting point of every learner.
    pub fn origin(&self) -> SparseVector {
        self.project(&SparseVector::new())
            .expect("origin is finite and the box is well formed")
    }
}

/// Free-function form of [`BoxDomain::project`].
pub fn project(point: &SparseVector, domain: &BoxDomain) -> Result<SparseVector> {
    domain.project(point)
}

fn check_interval(i: usize, a: f64, b: f64) -> Result<()> {
    ensure_finite(a, &format!("lower[{i}]"))?;
    ensure_finite(b, &format!("upper[{i}]"))?;
    if a > b {
        return Err(Error::InvalidInput(format!(
            "coordinate {i}: lower bound {a} exceeds upper bound {b}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_examples() {
        let unit2 = BoxDomain::unit(Some(2));
        let p = unit2.project_dense(&[1.5, -0.2]).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);
        assert_eq!(unit2.project_dense(&[0.3, 0.7]).unwrap(), vec![0.3, 0.7]);
        let sym = BoxDomain::symmetric(1.0, Some(1)).unwrap();
        assert_eq!(sym.project_dense(&[2.0]).unwrap(), vec![1.0]);

        let sparse = unit2
            .project(&SparseVector::from_dense(&[1.5, -0.2]))
            .unwrap();
        assert_eq!(sparse.to_dense(2), vec![1.0, 0.0]);
    }

    #[test]
    fn non_finite_point_rejected() {
        let b = BoxDomain::unit(Some(1));
        assert!(matches!(
            b.project(&SparseVector::singleton(0, f64::NAN)),
            Err(Error::InvalidInput(_))
        ));
        assert!(b.project_dense(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn malformed_boxes_rejected() {
        assert!(BoxDomain::uniform(1.0, 0.0, None).is_err());
        assert!(BoxDomain::explicit(vec![0.0], vec![1.0, 2.0]).is_err());
        assert!(BoxDomain::explicit(vec![0.0, 3.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn diameters() {
        let b = BoxDomain::explicit(vec![0.0, -1.0, 1.0], vec![3.0, 3.0, 1.0]).unwrap();
        assert_eq!(b.diameters().unwrap(), vec![3.0, 4.0, 0.0]);
        assert_eq!(b.full_diameter().unwrap(), 5.0);
        assert_eq!(BoxDomain::unit(None).full_diameter(), None);
    }

    #[test]
    fn box_without_origin_densifies() {
        let b = BoxDomain::explicit(vec![-1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let o = b.origin();
        assert_eq!(o.to_dense(2), vec![0.0, 1.0]);
        assert!(b.contains(&o));
        assert!(!b.contains(&SparseVector::new()));
    }
}
