//! Online learners over box feasible sets.
//!
//! Every learner starts at the projection of the origin, plays [`Learner::point`],
//! and then observes the round's loss. Gradient learners also expose a `step`
//! taking the subgradient directly.

mod composite;
mod ogd;
mod pa;

use serde::{Deserialize, Serialize};

use crate::domain::BoxDomain;
use crate::error::Result;
use crate::losses::LossFunction;
use crate::sparse::SparseVector;

pub use composite::{
    decompose, CompositeLearner, ConstantPlacement, QuadraticLoss, ScalarAdaptive, ScalarLearner,
    ScalarStronglyConvex, Surrogate, SurrogateMode,
};
pub use ogd::{
    AdaptiveGlobalOgd, DiameterEstimate, FixedRateOgd, GradientStats, PerCoordinateOgd,
    StrongConvexity, StronglyConvexOgd,
};
pub use pa::PassiveAggressive;

pub trait Learner {
    /// The point `x_t` played this round.
    fn point(&self) -> &SparseVector;

    /// Number of completed rounds.
    fn rounds(&self) -> u64;

    /// Reveals the round's loss; the learner updates to `x_{t+1}`.
    fn observe(&mut self, loss: &LossFunction<'_>) -> Result<()>;

    fn name(&self) -> &'static str;

    /// `x_t . features`, the learner's raw score for an example.
    fn score(&self, features: &SparseVector) -> f64 {
        self.point().dot(features)
    }
}

impl<L: Learner + ?Sized> Learner for Box<L> {
    fn point(&self) -> &SparseVector {
        (**self).point()
    }
    fn rounds(&self) -> u64 {
        (**self).rounds()
    }
    fn observe(&mut self, loss: &LossFunction<'_>) -> Result<()> {
        (**self).observe(loss)
    }
    fn name(&self) -> &'static str {
        (**self).name()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LearnerKind {
    FixedRate { eta: f64 },
    AdaptiveGlobal { diameter: DiameterEstimate },
    PerCoordinate,
    StronglyConvex { curvature: StrongConvexity },
    PassiveAggressive,
}

/// Plain serialisable description of a learner; persisted next to results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    #[serde(flatten)]
    pub kind: LearnerKind,
    pub scale: f64,
    pub domain: BoxDomain,
    pub l2: f64,
    pub seed: u64,
}

impl LearnerConfig {
    pub fn build(&self) -> Result<Box<dyn Learner + Send>> {
        let domain = self.domain.clone();
        Ok(match &self.kind {
            LearnerKind::FixedRate { eta } => Box::new(FixedRateOgd::new(domain, *eta)?),
            LearnerKind::AdaptiveGlobal { diameter } => {
                Box::new(AdaptiveGlobalOgd::new(domain, self.scale, *diameter)?)
            }
            LearnerKind::PerCoordinate => Box::new(PerCoordinateOgd::new(domain, self.scale)?),
            LearnerKind::StronglyConvex { curvature } => {
                Box::new(StronglyConvexOgd::new(domain, curvature.clone())?)
            }
            LearnerKind::PassiveAggressive => Box::new(PassiveAggressive::new()),
        })
    }
}
