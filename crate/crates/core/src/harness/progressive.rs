use crate::error::Result;
use crate::example::Example;
use crate::learners::Learner;
use crate::losses::{ConvexLoss, LossFunction};
use crate::regret::RegretLedger;

/// Counters from one progressive-validation pass.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PassSummary {
    pub rounds: usize,
    pub hinge_sum: f64,
    /// Examples with `y * score <= 0`; a zero score counts as a mistake.
    pub mistakes: usize,
}

impl PassSummary {
    pub fn avg_hinge_loss(&self) -> f64 {
        self.hinge_sum / self.rounds.max(1) as f64
    }

    pub fn mistake_fraction(&self) -> f64 {
        self.mistakes as f64 / self.rounds.max(1) as f64
    }
}

/// Runs `learner` once through `examples`. For each example the learner's
/// current point is scored and charged the round's loss before the learner
/// observes that loss, so no example is seen before it is evaluated.
pub fn progressive_pass<'a, L, F>(
    learner: &mut L,
    examples: &'a [Example],
    loss_of: F,
    ledger: &mut RegretLedger,
) -> Result<PassSummary>
where
    L: Learner + ?Sized,
    F: Fn(&'a Example) -> LossFunction<'a>,
{
    let mut summary = PassSummary::default();
    for example in examples {
        let margin = example.label * learner.score(&example.features);
        let loss = loss_of(example);
        ledger.record(loss.value(learner.point()), None);
        summary.rounds += 1;
        summary.hinge_sum += (1.0 - margin).max(0.0);
        if margin <= 0.0 {
            summary.mistakes += 1;
        }
        learner.observe(&loss)?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use std::cell::RefCell;

    use super::*;
    use crate::error::Error;
    use crate::sparse::SparseVector;

    #[derive(Debug, PartialEq)]
    enum Event {
        Score(f64),
        Point,
        Observe(f64),
    }

    /// Records every call, identifying examples by their single feature value.
    struct Spy {
        x: SparseVector,
        events: RefCell<Vec<Event>>,
    }

    impl Learner for Spy {
        fn point(&self) -> &SparseVector {
            self.events.borrow_mut().push(Event::Point);
            &self.x
        }
        fn rounds(&self) -> u64 {
            0
        }
        fn observe(&mut self, loss: &LossFunction<'_>) -> Result<()> {
            let id = loss.example().ok_or(Error::Config("no example".into()))?.features.get(0);
            self.events.borrow_mut().push(Event::Observe(id));
            Ok(())
        }
        fn name(&self) -> &'static str {
            "spy"
        }
        fn score(&self, features: &SparseVector) -> f64 {
            self.events.borrow_mut().push(Event::Score(features.get(0)));
            0.0
        }
    }

    #[test]
    fn every_example_is_scored_before_it_is_observed() {
        let examples: Vec<Example> = (1..=4)
            .map(|k| Example::new(SparseVector::singleton(0, k as f64), 1.0))
            .collect();
        let mut spy = Spy {
            x: SparseVector::new(),
            events: RefCell::new(Vec::new()),
        };
        let mut ledger = RegretLedger::new();
        let s = progressive_pass(&mut spy, &examples, LossFunction::hinge, &mut ledger).unwrap();
        let events = spy.events.into_inner();
        for k in 1..=4 {
            let id = k as f64;
            let scored = events.iter().position(|e| *e == Event::Score(id)).unwrap();
            let observed = events.iter().position(|e| *e == Event::Observe(id)).unwrap();
            assert!(scored < observed, "{events:?}");
            // the loss charged for example k is read before the update
            assert!(events[scored..observed].contains(&Event::Point));
            if k < 4 {
                let next = events.iter().position(|e| *e == Event::Score(id + 1.0)).unwrap();
                assert!(observed < next);
            }
        }
        // zero scores are mistakes
        assert_eq!(s.mistakes, 4);
        assert_eq!(s.avg_hinge_loss(), 1.0);
        assert_eq!(ledger.rounds(), 4);
    }
}
