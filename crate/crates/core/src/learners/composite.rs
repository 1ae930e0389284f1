//! Coordinate-wise decomposition of a convex loss into one-dimensional
//! surrogates, and the composite learner that runs an independent scalar
//! learner per coordinate on them.
//!
//! The surrogates at round `t` satisfy `sum_i l_i(x_{t,i}) = f_t(x_t)` and
//! `sum_i l_i(y_i) <= f_t(y)` on the feasible set, so the composite's regret is
//! at most the sum of the scalar learners' regrets.

use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::losses::{ConvexLoss, LossFunction};
use crate::sparse::SparseVector;

use super::{Learner, StrongConvexity};

/// `l(y) = constant + slope * (y - anchor) + (curvature / 2) * (y - anchor)^2`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Surrogate {
    pub constant: f64,
    pub slope: f64,
    pub anchor: f64,
    pub curvature: f64,
}

impl Surrogate {
    pub fn value(&self, y: f64) -> f64 {
        let d = y - self.anchor;
        self.constant + self.slope * d + 0.5 * self.curvature * d * d
    }

    pub fn derivative(&self, y: f64) -> f64 {
        self.slope + self.curvature * (y - self.anchor)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SurrogateMode {
    /// `l_i(y) = g_i * y` (plus the constant share).
    Linearized,
    /// `l_i(y) = c_i + g_i (y - x_i) + (H_i / 2)(y - x_i)^2`.
    StronglyConvex(StrongConvexity),
}

/// Where the constant part of the decomposition goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstantPlacement {
    /// Entirely on one coordinate, normally a bias fixed at 1.
    Bias(usize),
    /// Split evenly across the coordinates being decomposed.
    Spread,
}

/// Builds the per-coordinate surrogates of `loss` at `x_t`, one per entry of
/// `coords` (returned in the same order). `coords` must cover the support of
/// the subgradient at `x_t`.
pub fn decompose(
    loss: &dyn ConvexLoss,
    x_t: &SparseVector,
    coords: &[usize],
    mode: &SurrogateMode,
    placement: ConstantPlacement,
) -> Result<Vec<Surrogate>> {
    if coords.is_empty() {
        return Err(Error::InvalidInput("decomposition needs at least one coordinate".into()));
    }
    let value = loss.value(x_t);
    let g = loss.subgradient(x_t);
    if let Some(i) = g.indices().find(|i| !coords.contains(i)) {
        return Err(Error::InvalidInput(format!(
            "subgradient coordinate {i} is not among the decomposed coordinates"
        )));
    }
    let bias_pos = match placement {
        ConstantPlacement::Bias(b) => Some(coords.iter().position(|&i| i == b).ok_or_else(|| {
            Error::Config(format!("bias coordinate {b} is not among the decomposed coordinates"))
        })?),
        ConstantPlacement::Spread => None,
    };

    let mut out = Vec::with_capacity(coords.len());
    let mut linear_part = 0.0;
    for &i in coords {
        let (xi, gi) = (x_t.get(i), g.get(i));
        let (constant, curvature) = match mode {
            SurrogateMode::Linearized => {
                linear_part += gi * xi;
                (gi * xi, 0.0)
            }
            SurrogateMode::StronglyConvex(h) => (0.0, surrogate_curvature(h, i)?),
        };
        out.push(Surrogate {
            constant,
            slope: gi,
            anchor: xi,
            curvature,
        });
    }

    let remainder = value - linear_part;
    match bias_pos {
        Some(p) => out[p].constant += remainder,
        None => {
            let share = remainder / coords.len() as f64;
            for s in &mut out {
                s.constant += share;
            }
        }
    }
    Ok(out)
}

fn surrogate_curvature(h: &StrongConvexity, i: usize) -> Result<f64> {
    let value = match h {
        StrongConvexity::Uniform(v) => Some(*v),
        StrongConvexity::PerCoordinate(m) => m.get(&i).copied(),
    };
    match value {
        Some(v) if v >= 0.0 && v.is_finite() => Ok(v),
        Some(v) => Err(Error::Config(format!(
            "surrogate curvature for coordinate {i} must be non-negative, got {v}"
        ))),
        None => Err(Error::Config(format!("no surrogate curvature for coordinate {i}"))),
    }
}

/// A one-dimensional online learner on an interval.
pub trait ScalarLearner {
    fn point(&self) -> f64;
    fn observe(&mut self, loss: &Surrogate);
}

/// Scalar version of the per-coordinate rate: `scale * D / sqrt(sum g^2)`.
#[derive(Clone, Debug)]
pub struct ScalarAdaptive {
    lower: f64,
    upper: f64,
    x: f64,
    sum_sq: f64,
    scale: f64,
}

impl ScalarAdaptive {
    pub fn new(lower: f64, upper: f64, scale: f64) -> Self {
        Self {
            lower,
            upper,
            x: 0f64.clamp(lower, upper),
            sum_sq: 0.0,
            scale,
        }
    }
}

impl ScalarLearner for ScalarAdaptive {
    fn point(&self) -> f64 {
        self.x
    }

    fn observe(&mut self, loss: &Surrogate) {
        let g = loss.derivative(self.x);
        if g == 0.0 {
            return;
        }
        self.sum_sq += g * g;
        let eta = self.scale * (self.upper - self.lower) / self.sum_sq.sqrt();
        self.x = (self.x - eta * g).clamp(self.lower, self.upper);
    }
}

/// Scalar strongly-convex rate `1 / (H * tau)`.
#[derive(Clone, Debug)]
pub struct ScalarStronglyConvex {
    lower: f64,
    upper: f64,
    x: f64,
    modulus: f64,
    tau: u64,
}

impl ScalarStronglyConvex {
    pub fn new(lower: f64, upper: f64, modulus: f64) -> Result<Self> {
        if !(modulus > 0.0 && modulus.is_finite()) {
            return Err(Error::Config(format!("modulus must be positive, got {modulus}")));
        }
        Ok(Self {
            lower,
            upper,
            x: 0f64.clamp(lower, upper),
            modulus,
            tau: 0,
        })
    }
}

impl ScalarLearner for ScalarStronglyConvex {
    fn point(&self) -> f64 {
        self.x
    }

    fn observe(&mut self, loss: &Surrogate) {
        let g = loss.derivative(self.x);
        if g == 0.0 {
            return;
        }
        self.tau += 1;
        let eta = 1.0 / (self.modulus * self.tau as f64);
        self.x = (self.x - eta * g).clamp(self.lower, self.upper);
    }
}

/// Runs one [`ScalarLearner`] per coordinate of a finite box on surrogate losses.
pub struct CompositeLearner {
    coords: Vec<usize>,
    learners: Vec<Box<dyn ScalarLearner + Send>>,
    mode: SurrogateMode,
    placement: ConstantPlacement,
    x: SparseVector,
    round: u64,
}

impl CompositeLearner {
    pub fn new<F>(
        domain: &BoxDomain,
        mode: SurrogateMode,
        placement: ConstantPlacement,
        mut factory: F,
    ) -> Result<Self>
    where
        F: FnMut(usize, f64, f64) -> Result<Box<dyn ScalarLearner + Send>>,
    {
        let n = domain
            .dim()
            .ok_or_else(|| Error::Config("composite learner needs a box of known dimension".into()))?;
        let coords: Vec<usize> = (0..n).collect();
        let learners = coords
            .iter()
            .map(|&i| {
                let (a, b) = domain.interval(i);
                factory(i, a, b)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut me = Self {
            coords,
            learners,
            mode,
            placement,
            x: SparseVector::new(),
            round: 0,
        };
        me.refresh_point();
        Ok(me)
    }

    fn refresh_point(&mut self) {
        self.x = self
            .coords
            .iter()
            .zip(&self.learners)
            .map(|(&i, l)| (i, l.point()))
            .collect();
    }

    /// Decomposes `loss` at the current point, feeds each scalar learner its
    /// surrogate, and returns the surrogates (ordered by coordinate).
    pub fn observe_loss(&mut self, loss: &dyn ConvexLoss) -> Result<Vec<Surrogate>> {
        let surrogates = decompose(loss, &self.x, &self.coords, &self.mode, self.placement)?;
        for (learner, s) in self.learners.iter_mut().zip(&surrogates) {
            learner.observe(s);
        }
        self.round += 1;
        self.refresh_point();
        Ok(surrogates)
    }
}

impl Learner for CompositeLearner {
    fn point(&self) -> &SparseVector {
        &self.x
    }

    fn rounds(&self) -> u64 {
        self.round
    }

    fn observe(&mut self, loss: &LossFunction<'_>) -> Result<()> {
        self.observe_loss(loss).map(|_| ())
    }

    fn name(&self) -> &'static str {
        "composite"
    }
}

/// `f(x) = 0.5 (x - c)^T A (x - c)` with `A` symmetric positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticLoss {
    matrix: Vec<Vec<f64>>,
    center: Vec<f64>,
}

impl QuadraticLoss {
    pub fn new(matrix: Vec<Vec<f64>>, center: Vec<f64>) -> Result<Self> {
        let n = center.len();
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput("quadratic matrix must be n x n".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if matrix[i][j] != matrix[j][i] {
                    return Err(Error::InvalidInput("quadratic matrix must be symmetric".into()));
                }
            }
        }
        Ok(Self { matrix, center })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn value_dense(&self, x: &[f64]) -> f64 {
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let mut acc = 0.0;
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, a) in row.iter().enumerate() {
                acc += d[i] * a * d[j];
            }
        }
        0.5 * acc
    }

    /// Per-coordinate moduli `H_i = A_ii - sum_{j != i} |A_ij|`. When all are
    /// non-negative, `A - diag(H)` is diagonally dominant, so `f` is strongly
    /// convex with respect to the vector `H`.
    pub fn diagonal_dominance_moduli(&self) -> Vec<f64> {
        self.matrix
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let off: f64 = row
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, a)| a.abs())
                    .sum();
                row[i] - off
            })
            .collect()
    }
}

impl ConvexLoss for QuadraticLoss {
    fn value(&self, x: &SparseVector) -> f64 {
        self.value_dense(&x.to_dense(self.dim()))
    }

    fn subgradient(&self, x: &SparseVector) -> SparseVector {
        let x = x.to_dense(self.dim());
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        self.matrix
            .iter()
            .enumerate()
            .map(|(i, row)| (i, row.iter().zip(&d).map(|(a, b)| a * b).sum()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_loss_decomposes_exactly() {
        let f = LossFunction::linear(SparseVector::from_dense(&[1.0, -2.0]));
        let x = SparseVector::from_dense(&[0.3, 0.4]);
        let s = decompose(&f, &x, &[0, 1], &SurrogateMode::Linearized, ConstantPlacement::Spread)
            .unwrap();
        for y in [-1.0, 0.0, 0.7] {
            assert!((s[0].value(y) - y).abs() < 1e-15);
            assert!((s[1].value(y) + 2.0 * y).abs() < 1e-15);
        }
        let at_x: f64 = s[0].value(0.3) + s[1].value(0.4);
        assert!((at_x - f.value(&x)).abs() < 1e-15);
    }

    #[test]
    fn tangent_line_lower_bounds_square() {
        let f = QuadraticLoss::new(vec![vec![2.0]], vec![0.0]).unwrap();
        let x = SparseVector::singleton(0, 0.5);
        let s = decompose(&f, &x, &[0], &SurrogateMode::Linearized, ConstantPlacement::Bias(0))
            .unwrap()[0];
        for k in 0..20 {
            let y = -1.0 + 2.0 * k as f64 / 19.0;
            let tangent = 0.25 + (y - 0.5);
            assert!((s.value(y) - tangent).abs() < 1e-12);
            assert!(s.value(y) <= y * y + 1e-12);
        }
    }

    #[test]
    fn strongly_convex_surrogate_is_exact_for_square() {
        let f = QuadraticLoss::new(vec![vec![2.0]], vec![0.0]).unwrap();
        let x = SparseVector::singleton(0, 1.0);
        let mode = SurrogateMode::StronglyConvex(StrongConvexity::Uniform(2.0));
        let s = decompose(&f, &x, &[0], &mode, ConstantPlacement::Spread).unwrap()[0];
        for y in [-1.0, -0.3, 0.0, 0.5, 1.0] {
            assert!((s.value(y) - y * y).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_curvature_rejected() {
        let f = QuadraticLoss::new(vec![vec![2.0]], vec![0.0]).unwrap();
        let mode = SurrogateMode::StronglyConvex(StrongConvexity::Uniform(-1.0));
        let err = decompose(&f, &SparseVector::new(), &[0], &mode, ConstantPlacement::Spread);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn composite_matches_per_coordinate_learner() {
        use crate::learners::PerCoordinateOgd;
        let dom = BoxDomain::symmetric(1.0, Some(2)).unwrap();
        let mut comp = CompositeLearner::new(
            &dom,
            SurrogateMode::Linearized,
            ConstantPlacement::Spread,
            |_, a, b| Ok(Box::new(ScalarAdaptive::new(a, b, 1.0))),
        )
        .unwrap();
        let mut pc = PerCoordinateOgd::new(dom, 1.0).unwrap();
        let f = QuadraticLoss::new(vec![vec![2.0, 0.5], vec![0.5, 1.0]], vec![0.3, -0.6]).unwrap();
        for _ in 0..30 {
            let g = f.subgradient(pc.point());
            pc.step(&g).unwrap();
            comp.observe_loss(&f).unwrap();
            for i in 0..2 {
                assert!((comp.point().get(i) - pc.point().get(i)).abs() < 1e-12);
            }
        }
    }
}
