use crate::error::{Error, Result};
use crate::example::Example;
use crate::losses::LossFunction;
use crate::sparse::SparseVector;

use super::Learner;

/// Passive-Aggressive classifier, no-slack variant: on positive hinge loss `L`,
/// `x <- x + (L / ||theta||^2) * y * theta`. Runs unconstrained.
#[derive(Clone, Debug, Default)]
pub struct PassiveAggressive {
    x: SparseVector,
    round: u64,
    skipped: u64,
}

impl PassiveAggressive {
    pub fn new() -> Self {
        Self::default()
    }

    /// Updates skipped because the example had positive loss but no features.
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    pub fn update(&mut self, example: &Example) {
        self.round += 1;
        let loss = (1.0 - example.margin(&self.x)).max(0.0);
        if loss == 0.0 {
            return;
        }
        let norm_sq = example.features.norm_sq();
        if norm_sq == 0.0 {
            self.skipped += 1;
            log::warn!("passive-aggressive: empty feature vector with positive loss, skipping");
            return;
        }
        let tau = loss / norm_sq;
        self.x.add_scaled(tau * example.label, &example.features);
    }
}

impl Learner for PassiveAggressive {
    fn point(&self) -> &SparseVector {
        &self.x
    }

    fn rounds(&self) -> u64 {
        self.round
    }

    fn observe(&mut self, loss: &LossFunction<'_>) -> Result<()> {
        match loss {
            LossFunction::Hinge { example } => {
                self.update(example);
                Ok(())
            }
            other => Err(Error::Config(format!(
                "passive-aggressive needs hinge-loss rounds, got {other:?}"
            ))),
        }
    }

    fn name(&self) -> &'static str {
        "pa"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_updates() {
        let mut pa = PassiveAggressive::new();
        pa.update(&Example::new(SparseVector::singleton(0, 1.0), 1.0));
        assert_eq!(pa.point(), &SparseVector::singleton(0, 1.0));

        let mut pa = PassiveAggressive::new();
        pa.update(&Example::new(SparseVector::singleton(0, 2.0), -1.0));
        assert_eq!(pa.point(), &SparseVector::singleton(0, -0.5));
    }

    #[test]
    fn passive_when_margin_met() {
        let mut pa = PassiveAggressive::new();
        let e = Example::new(SparseVector::singleton(0, 1.0), 1.0);
        pa.update(&e);
        pa.update(&Example::new(SparseVector::singleton(0, 2.0), 1.0));
        assert_eq!(pa.point(), &SparseVector::singleton(0, 1.0));
    }

    #[test]
    fn empty_features_skip() {
        let mut pa = PassiveAggressive::new();
        pa.update(&Example::new(SparseVector::new(), 1.0));
        assert_eq!(pa.skipped(), 1);
        assert!(pa.point().is_empty());
        assert_eq!(pa.rounds(), 1);
    }

    #[test]
    fn rejects_non_hinge_rounds() {
        let mut pa = PassiveAggressive::new();
        assert!(pa.observe(&LossFunction::linear(SparseVector::new())).is_err());
    }
}
