//! Oblivious adversarial loss streams: the one-dimensional oscillation and ramp
//! subproblems, and the interleaved family on which any global learning rate
//! pays `T^(2/3)` regret while per-coordinate rates pay `sqrt(T)`.

use serde::{Deserialize, Serialize};

use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::learners::{FixedRateOgd, Learner};
use crate::losses::{ConvexLoss, LossFunction};
use crate::regret::Comparator;
use crate::sparse::SparseVector;

pub const DEFAULT_EPSILON: f64 = 0.01;

/// `rounds` copies of `g * |x_0 - epsilon|`.
pub fn oscillation_stream(g: f64, epsilon: f64, rounds: usize) -> Vec<LossFunction<'static>> {
    vec![LossFunction::absolute(g, epsilon, 0); rounds]
}

/// `rounds` copies of `-g * x_coord`.
pub fn ramp_stream(g: f64, rounds: usize, coord: usize) -> Vec<LossFunction<'static>> {
    vec![LossFunction::linear(SparseVector::singleton(coord, -g)); rounds]
}

/// One oscillation subproblem of `oscillation_rounds` rounds on coordinate 0,
/// followed by `blocks` ramp subproblems of `block_rounds` rounds each on
/// coordinates `1..=blocks`, over `[0, 1]^(1 + blocks)` with `G = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BadFamily {
    pub oscillation_rounds: usize,
    pub blocks: usize,
    pub block_rounds: usize,
    pub epsilon: f64,
}

impl BadFamily {
    /// `blocks = block_rounds = floor(cbrt(oscillation_rounds))`.
    pub fn canonical(oscillation_rounds: usize, epsilon: f64) -> Result<Self> {
        if oscillation_rounds < 8 {
            return Err(Error::InvalidInput(format!(
                "need at least 8 oscillation rounds, got {oscillation_rounds}"
            )));
        }
        let c = integer_cbrt(oscillation_rounds);
        Self::new(oscillation_rounds, c, c, epsilon)
    }

    pub fn new(oscillation_rounds: usize, blocks: usize, block_rounds: usize, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        if oscillation_rounds == 0 || (blocks > 0 && block_rounds == 0) {
            return Err(Error::InvalidInput("subproblems need at least one round".into()));
        }
        Ok(Self {
            oscillation_rounds,
            blocks,
            block_rounds,
            epsilon,
        })
    }

    pub fn total_rounds(&self) -> usize {
        self.oscillation_rounds + self.blocks * self.block_rounds
    }

    pub fn dim(&self) -> usize {
        1 + self.blocks
    }

    pub fn domain(&self) -> BoxDomain {
        BoxDomain::unit(Some(self.dim()))
    }

    /// Zero-based coordinate targeted in 1-based round `t`: 0 during the
    /// oscillation phase, then `ceil((t - T0) / T1)`.
    pub fn coordinate(&self, t: usize) -> usize {
        assert!(t >= 1 && t <= self.total_rounds(), "round {t} out of range");
        if t <= self.oscillation_rounds {
            0
        } else {
            (t - self.oscillation_rounds).div_ceil(self.block_rounds)
        }
    }

    pub fn loss(&self, t: usize) -> LossFunction<'static> {
        match self.coordinate(t) {
            0 => LossFunction::absolute(1.0, self.epsilon, 0),
            j => LossFunction::linear(SparseVector::singleton(j, -1.0)),
        }
    }

    pub fn losses(&self) -> Vec<LossFunction<'static>> {
        (1..=self.total_rounds()).map(|t| self.loss(t)).collect()
    }

    /// `x* = (epsilon, 1, ..., 1)` with loss `-blocks * block_rounds`.
    pub fn comparator(&self) -> Comparator {
        let point: SparseVector = std::iter::once((0, self.epsilon))
            .chain((1..=self.blocks).map(|j| (j, 1.0)))
            .collect();
        Comparator::exact(point, -((self.blocks * self.block_rounds) as f64))
    }

    /// `(T0 / 2) eta + (C / 2) min(T1, 1 / (2 eta))`, the lower bound on the
    /// regret of any fixed rate `eta`.
    pub fn fixed_rate_lower_bound(&self, eta: f64) -> f64 {
        let t0 = self.oscillation_rounds as f64;
        let c = self.blocks as f64;
        let t1 = self.block_rounds as f64;
        0.5 * t0 * eta + 0.5 * c * t1.min(1.0 / (2.0 * eta))
    }
}

/// Largest `r` with `r^3 <= n`.
pub fn integer_cbrt(n: usize) -> usize {
    let mut r = (n as f64).cbrt().round() as usize;
    while r > 0 && r.pow(3) > n {
        r -= 1;
    }
    while (r + 1).pow(3) <= n {
        r += 1;
    }
    r
}

/// Outcome of playing a learner through an instance.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceRun {
    pub cumulative_loss: f64,
    pub regret: f64,
    /// Regret on each subproblem: index 0 is the oscillation coordinate.
    pub subproblem_regret: Vec<f64>,
    pub gradients: Vec<SparseVector>,
}

/// Plays `learner` through every round of `instance`, scoring against the
/// exact comparator.
pub fn run_instance(instance: &BadFamily, learner: &mut dyn Learner) -> Result<InstanceRun> {
    let mut per_coord = vec![0.0; instance.dim()];
    let mut gradients = Vec::with_capacity(instance.total_rounds());
    for t in 1..=instance.total_rounds() {
        let f = instance.loss(t);
        let x = learner.point();
        per_coord[instance.coordinate(t)] += f.value(x);
        gradients.push(f.subgradient(x));
        learner.observe(&f)?;
    }
    let cumulative_loss = per_coord.iter().sum();
    let comparator = instance.comparator();
    let subproblem_regret = per_coord
        .iter()
        .enumerate()
        .map(|(j, &loss)| if j == 0 { loss } else { loss + instance.block_rounds as f64 })
        .collect();
    Ok(InstanceRun {
        cumulative_loss,
        regret: cumulative_loss - comparator.loss,
        subproblem_regret,
        gradients,
    })
}

/// Regret of fixed-rate gradient descent from the origin.
pub fn fixed_rate_regret(instance: &BadFamily, eta: f64) -> Result<f64> {
    let mut learner = FixedRateOgd::new(instance.domain(), eta)?;
    Ok(run_instance(instance, &mut learner)?.regret)
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..points)
                .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp())
                .collect()
        }
    }
}

/// 50 log-spaced rates over `[1e-4, 1]`.
pub fn default_eta_grid() -> Vec<f64> {
    log_grid(1e-4, 1.0, 50)
}

/// Runs fixed-rate descent for every rate in `grid` and returns the rate with
/// the smallest regret (first one on ties) together with that regret.
pub fn best_fixed_eta_regret(instance: &BadFamily, grid: &[f64]) -> Result<(f64, f64)> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("rate grid is empty".into()));
    }
    #[cfg(feature = "parallel")]
    let regrets: Vec<Result<f64>> = {
        use rayon::prelude::*;
        grid.par_iter().map(|&eta| fixed_rate_regret(instance, eta)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let regrets: Vec<Result<f64>> = grid.iter().map(|&eta| fixed_rate_regret(instance, eta)).collect();

    let mut best: Option<(f64, f64)> = None;
    for (&eta, r) in grid.iter().zip(regrets) {
        let r = r?;
        if best.is_none_or(|(_, b)| r < b) {
            best = Some((eta, r));
        }
    }
    Ok(best.expect("grid is nonempty"))
}
