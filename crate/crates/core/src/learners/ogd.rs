use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::losses::{ConvexLoss, LossFunction};
use crate::sparse::SparseVector;

use super::Learner;

/// Running squared-gradient sums: global `S`, per-coordinate `S_i`, and the
/// squared diameters of every coordinate seen with a nonzero gradient.
#[derive(Clone, Debug, Default)]
pub struct GradientStats {
    total_sq: f64,
    per_coord: BTreeMap<usize, f64>,
    seen_diameter_sq: f64,
}

impl GradientStats {
    fn record(&mut self, g: &SparseVector, domain: &BoxDomain) {
        for (i, gi) in g.iter() {
            let sq = gi * gi;
            self.total_sq += sq;
            let s = self.per_coord.entry(i).or_insert_with(|| {
                let d = domain.diameter(i);
                self.seen_diameter_sq += d * d;
                0.0
            });
            *s += sq;
        }
    }

    pub fn total_sq(&self) -> f64 {
        self.total_sq
    }

    pub fn coord_sq(&self, i: usize) -> f64 {
        self.per_coord.get(&i).copied().unwrap_or(0.0)
    }

    pub fn per_coord(&self) -> &BTreeMap<usize, f64> {
        &self.per_coord
    }

    pub fn seen(&self) -> usize {
        self.per_coord.len()
    }

    /// `sqrt(sum of D_i^2 over seen coordinates)`.
    pub fn seen_diameter(&self) -> f64 {
        self.seen_diameter_sq.sqrt()
    }
}

/// State shared by the projected gradient learners.
#[derive(Clone, Debug)]
struct OgdCore {
    domain: BoxDomain,
    x: SparseVector,
    round: u64,
    stats: GradientStats,
}

impl OgdCore {
    fn new(domain: BoxDomain) -> Self {
        let x = domain.origin();
        Self {
            domain,
            x,
            round: 0,
            stats: GradientStats::default(),
        }
    }

    fn check(&self, g: &SparseVector) -> Result<()> {
        g.ensure_finite("gradient")?;
        if let Some(i) = g.indices().find(|&i| !self.domain.has_index(i)) {
            return Err(Error::InvalidInput(format!(
                "gradient coordinate {i} outside box of dimension {:?}",
                self.domain.dim()
            )));
        }
        Ok(())
    }

    /// `x_i <- clip(x_i - rate(i) * g_i)` on the support of `g`; other
    /// coordinates are already feasible and stay put.
    fn descend(&mut self, g: &SparseVector, mut rate: impl FnMut(usize) -> f64) {
        for (i, gi) in g.iter() {
            let y = self.x.get(i) - rate(i) * gi;
            let next = self.domain.clip(i, y);
            self.x.set(i, next);
        }
        self.round += 1;
    }
}

macro_rules! gradient_learner {
    ($ty:ty, $name:literal) => {
        impl Learner for $ty {
            fn point(&self) -> &SparseVector {
                &self.core.x
            }
            fn rounds(&self) -> u64 {
                self.core.round
            }
            fn observe(&mut self, loss: &LossFunction<'_>) -> Result<()> {
                let g = loss.subgradient(&self.core.x);
                self.step(&g)
            }
            fn name(&self) -> &'static str {
                $name
            }
        }

        impl $ty {
            pub fn domain(&self) -> &BoxDomain {
                &self.core.domain
            }
            pub fn stats(&self) -> &GradientStats {
                &self.core.stats
            }
        }
    };
}

/// Projected online gradient descent with a caller-chosen rate.
#[derive(Clone, Debug)]
pub struct FixedRateOgd {
    core: OgdCore,
    eta: f64,
}

impl FixedRateOgd {
    pub fn new(domain: BoxDomain, eta: f64) -> Result<Self> {
        check_rate(eta)?;
        Ok(Self {
            core: OgdCore::new(domain),
            eta,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `x <- P(x - eta g)` using the configured rate.
    pub fn step(&mut self, g: &SparseVector) -> Result<()> {
        self.step_with_rate(g, self.eta)
    }

    /// `x <- P(x - eta g)` for this round only; supports arbitrary schedules.
    pub fn step_with_rate(&mut self, g: &SparseVector, eta: f64) -> Result<()> {
        check_rate(eta)?;
        self.core.check(g)?;
        self.core.stats.record(g, &self.core.domain);
        self.core.descend(g, |_| eta);
        Ok(())
    }
}

gradient_learner!(FixedRateOgd, "fixed");

/// Diameter used by the adaptive global rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiameterEstimate {
    /// `sqrt(sum D_i^2)` over coordinates that have had a nonzero gradient.
    Online,
    Fixed(f64),
}

/// Global rate `eta_t = scale * D / sqrt(2 * sum_{s<=t} ||g_s||^2)`.
#[derive(Clone, Debug)]
pub struct AdaptiveGlobalOgd {
    core: OgdCore,
    scale: f64,
    diameter: DiameterEstimate,
    last_rate: Option<f64>,
}

impl AdaptiveGlobalOgd {
    pub fn new(domain: BoxDomain, scale: f64, diameter: DiameterEstimate) -> Result<Self> {
        check_rate(scale)?;
        if let DiameterEstimate::Fixed(d) = diameter {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::Config(format!("diameter must be non-negative, got {d}")));
            }
        }
        Ok(Self {
            core: OgdCore::new(domain),
            scale,
            diameter,
            last_rate: None,
        })
    }

    /// Uses the box's true diameter.
    pub fn with_true_diameter(domain: BoxDomain, scale: f64) -> Result<Self> {
        let d = domain
            .full_diameter()
            .ok_or_else(|| Error::Config("true diameter needs a box of known dimension".into()))?;
        Self::new(domain, scale, DiameterEstimate::Fixed(d))
    }

    /// Rate used by the most recent moving step.
    pub fn last_rate(&self) -> Option<f64> {
        self.last_rate
    }

    pub fn diameter_estimate(&self) -> f64 {
        match self.diameter {
            DiameterEstimate::Online => self.core.stats.seen_diameter(),
            DiameterEstimate::Fixed(d) => d,
        }
    }

    pub fn step(&mut self, g: &SparseVector) -> Result<()> {
        self.core.check(g)?;
        self.core.stats.record(g, &self.core.domain);
        let s = self.core.stats.total_sq();
        if s == 0.0 {
            // 0/0 rate: nothing observed yet, stay put.
            self.core.round += 1;
            return Ok(());
        }
        let eta = self.scale * self.diameter_estimate() / (2.0 * s).sqrt();
        self.last_rate = Some(eta);
        self.core.descend(g, |_| eta);
        Ok(())
    }
}

gradient_learner!(AdaptiveGlobalOgd, "global");

/// Per-coordinate rates `eta_{t,i} = scale * D_i / sqrt(sum_{s<=t} g_{s,i}^2)`.
#[derive(Clone, Debug)]
pub struct PerCoordinateOgd {
    core: OgdCore,
    scale: f64,
}

impl PerCoordinateOgd {
    pub fn new(domain: BoxDomain, scale: f64) -> Result<Self> {
        check_rate(scale)?;
        Ok(Self {
            core: OgdCore::new(domain),
            scale,
        })
    }

    /// Current rate for coordinate `i`; `None` before its first nonzero gradient.
    pub fn rate(&self, i: usize) -> Option<f64> {
        let s = self.core.stats.coord_sq(i);
        (s > 0.0).then(|| self.scale * self.core.domain.diameter(i) / s.sqrt())
    }

    pub fn step(&mut self, g: &SparseVector) -> Result<()> {
        self.core.check(g)?;
        self.core.stats.record(g, &self.core.domain);
        let (scale, domain, stats) = (self.scale, &self.core.domain, &self.core.stats);
        // Support entries are nonzero, so every S_i used here is positive.
        let rates: Vec<f64> = g
            .indices()
            .map(|i| scale * domain.diameter(i) / stats.coord_sq(i).sqrt())
            .collect();
        let mut it = rates.into_iter();
        self.core.descend(g, |_| it.next().unwrap_or(0.0));
        Ok(())
    }
}

gradient_learner!(PerCoordinateOgd, "per-coord");

/// Per-coordinate strong-convexity moduli `H_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrongConvexity {
    Uniform(f64),
    PerCoordinate(BTreeMap<usize, f64>),
}

impl StrongConvexity {
    pub fn modulus(&self, i: usize) -> Result<f64> {
        let h = match self {
            StrongConvexity::Uniform(h) => Some(*h),
            StrongConvexity::PerCoordinate(map) => map.get(&i).copied(),
        };
        match h {
            Some(h) if h > 0.0 && h.is_finite() => Ok(h),
            Some(h) => Err(Error::Config(format!(
                "strong convexity modulus for coordinate {i} must be positive, got {h}"
            ))),
            None => Err(Error::Config(format!(
                "no strong convexity modulus for coordinate {i}"
            ))),
        }
    }
}

/// Per-coordinate rates `eta_{t,i} = 1 / (H_i * tau_i)`, `tau_i` counting the
/// rounds with `g_i != 0`.
#[derive(Clone, Debug)]
pub struct StronglyConvexOgd {
    core: OgdCore,
    curvature: StrongConvexity,
    active_rounds: BTreeMap<usize, u64>,
}

impl StronglyConvexOgd {
    pub fn new(domain: BoxDomain, curvature: StrongConvexity) -> Result<Self> {
        if let StrongConvexity::Uniform(h) = curvature {
            curvature.modulus(0).map_err(|_| {
                Error::Config(format!("strong convexity modulus must be positive, got {h}"))
            })?;
        }
        Ok(Self {
            core: OgdCore::new(domain),
            curvature,
            active_rounds: BTreeMap::new(),
        })
    }

    pub fn step(&mut self, g: &SparseVector) -> Result<()> {
        self.core.check(g)?;
        let moduli = g
            .indices()
            .map(|i| self.curvature.modulus(i))
            .collect::<Result<Vec<_>>>()?;
        self.core.stats.record(g, &self.core.domain);
        let mut rates = Vec::with_capacity(moduli.len());
        for (i, h) in g.indices().zip(moduli) {
            let tau = self.active_rounds.entry(i).or_insert(0);
            *tau += 1;
            rates.push(1.0 / (h * *tau as f64));
        }
        let mut it = rates.into_iter();
        self.core.descend(g, |_| it.next().unwrap_or(0.0));
        Ok(())
    }
}

gradient_learner!(StronglyConvexOgd, "strongly-convex");

fn check_rate(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("learning rate must be positive and finite, got {eta}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1(v: f64) -> SparseVector {
        SparseVector::singleton(0, v)
    }

    #[test]
    fn fixed_rate_examples() {
        let mut l = FixedRateOgd::new(BoxDomain::unit(Some(1)), 0.5).unwrap();
        l.step(&g1(-1.0)).unwrap();
        assert_eq!(l.point().get(0), 0.5);
        l.step(&g1(1.0)).unwrap();
        assert_eq!(l.point().get(0), 0.0);

        let mut l = FixedRateOgd::new(BoxDomain::unit(Some(2)), 1.0).unwrap();
        l.step(&g1(-1.0)).unwrap();
        assert_eq!(l.point().to_dense(2), vec![1.0, 0.0]);
        l.step(&g1(-1.0)).unwrap();
        assert_eq!(l.point().to_dense(2), vec![1.0, 0.0]);
    }

    #[test]
    fn adaptive_global_rates() {
        let dom = BoxDomain::unit(Some(1));
        let mut l = AdaptiveGlobalOgd::new(dom.clone(), 1.0, DiameterEstimate::Fixed(1.0)).unwrap();
        for _ in 0..3 {
            l.step(&g1(1.0)).unwrap();
        }
        assert!((l.last_rate().unwrap() - 1.0 / 6f64.sqrt()).abs() < 1e-15);

        let mut l = AdaptiveGlobalOgd::new(dom, 1.0, DiameterEstimate::Fixed(1.0)).unwrap();
        l.step(&g1(2.0)).unwrap();
        assert!((l.last_rate().unwrap() - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn adaptive_global_stays_put_on_zero_gradients() {
        let dom = BoxDomain::symmetric(1.0, Some(3)).unwrap();
        let mut l = AdaptiveGlobalOgd::new(dom, 1.0, DiameterEstimate::Online).unwrap();
        for _ in 0..10 {
            l.step(&SparseVector::new()).unwrap();
        }
        assert!(l.point().is_empty());
        assert_eq!(l.rounds(), 10);
        assert_eq!(l.last_rate(), None);
    }

    #[test]
    fn online_diameter_counts_seen_coordinates() {
        let dom = BoxDomain::symmetric(100.0, None).unwrap();
        let mut l = AdaptiveGlobalOgd::new(dom, 1.0, DiameterEstimate::Online).unwrap();
        l.step(&SparseVector::from_pairs([(3, 1.0), (7, 1.0)])).unwrap();
        l.step(&SparseVector::from_pairs([(3, 1.0), (9, 1.0)])).unwrap();
        assert!((l.diameter_estimate() - 200.0 * 3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn per_coordinate_examples() {
        let mut l = PerCoordinateOgd::new(BoxDomain::unit(Some(2)), 1.0).unwrap();
        l.step(&g1(-1.0)).unwrap();
        assert_eq!(l.rate(0), Some(1.0));
        assert_eq!(l.point().to_dense(2), vec![1.0, 0.0]);
        l.step(&g1(-1.0)).unwrap();
        assert!((l.rate(0).unwrap() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(l.point().to_dense(2), vec![1.0, 0.0]);
        l.step(&SparseVector::new()).unwrap();
        assert_eq!(l.point().to_dense(2), vec![1.0, 0.0]);
        assert_eq!(l.stats().total_sq(), 2.0);
        assert_eq!(l.rate(1), None);
    }

    #[test]
    fn strongly_convex_examples() {
        let dom = BoxDomain::symmetric(1.0, Some(1)).unwrap();
        let mut l = StronglyConvexOgd::new(dom.clone(), StrongConvexity::Uniform(1.0)).unwrap();
        l.step(&g1(2.0)).unwrap();
        assert_eq!(l.point().get(0), -1.0);

        // Box [-1, 0]: the first active round is absorbed by the upper bound, so
        // the second active round starts from x = 0 with tau = 2.
        let dom = BoxDomain::uniform(-1.0, 0.0, Some(1)).unwrap();
        let mut l = StronglyConvexOgd::new(dom, StrongConvexity::Uniform(2.0)).unwrap();
        l.step(&g1(-1.0)).unwrap();
        assert_eq!(l.point().get(0), 0.0);
        l.step(&g1(1.0)).unwrap();
        assert!((l.point().get(0) + 0.25).abs() < 1e-15);

        let before = l.point().clone();
        l.step(&SparseVector::new()).unwrap();
        assert_eq!(l.point(), &before);
    }

    #[test]
    fn strongly_convex_requires_moduli() {
        let dom = BoxDomain::symmetric(1.0, Some(2)).unwrap();
        assert!(StronglyConvexOgd::new(dom.clone(), StrongConvexity::Uniform(0.0)).is_err());
        let map = [(0usize, 1.0)].into_iter().collect();
        let mut l = StronglyConvexOgd::new(dom.clone(), StrongConvexity::PerCoordinate(map)).unwrap();
        assert!(matches!(l.step(&SparseVector::singleton(1, 1.0)), Err(Error::Config(_))));
        let map = [(0usize, -1.0)].into_iter().collect();
        let mut l = StronglyConvexOgd::new(dom, StrongConvexity::PerCoordinate(map)).unwrap();
        assert!(matches!(l.step(&g1(1.0)), Err(Error::Config(_))));
    }

    #[test]
    fn non_finite_gradient_rejected() {
        let dom = BoxDomain::unit(Some(1));
        let bad = g1(f64::NAN);
        assert!(FixedRateOgd::new(dom.clone(), 0.1).unwrap().step(&bad).is_err());
        assert!(PerCoordinateOgd::new(dom.clone(), 1.0).unwrap().step(&bad).is_err());
        assert!(AdaptiveGlobalOgd::new(dom, 1.0, DiameterEstimate::Online)
            .unwrap()
            .step(&bad)
            .is_err());
    }

    #[test]
    fn gradient_outside_box_rejected() {
        let mut l = PerCoordinateOgd::new(BoxDomain::unit(Some(2)), 1.0).unwrap();
        assert!(l.step(&SparseVector::singleton(5, 1.0)).is_err());
    }
}
