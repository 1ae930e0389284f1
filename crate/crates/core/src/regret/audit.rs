//! Randomised batteries checking the regret bounds on generated streams.
//! Each battery is deterministic in its seed and reports the first violation.

use std::fmt;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::BoxDomain;
use crate::error::Result;
use crate::example::Example;
use crate::learners::{AdaptiveGlobalOgd, Learner, PerCoordinateOgd};
use crate::losses::{ConvexLoss, L2Scope, LossFunction};
use crate::sparse::SparseVector;

use super::{
    bound_percoord, check_dominance, lemma1_lhs_rhs, minimize_constant_rate_bound, r_min_global,
    static_optimum, ComparatorMode,
};

pub const LEMMA1_CASES: usize = 10_000;
pub const STREAM_CASES: usize = 500;
pub const COMPARATOR_CASES: usize = 20;

#[derive(Clone, Debug)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub violations: usize,
    /// Largest observed `lhs / rhs` for inequalities, or the largest error for
    /// approximation checks.
    pub worst: f64,
    pub counterexample: Option<String>,
    pub elapsed: Duration,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl PropertyOutcome {
    /// The report line with the elapsed time appended.
    pub fn timed(&self) -> String {
        let mut line = self.to_string();
        let at = line.find('\n').unwrap_or(line.len());
        line.insert_str(at, &format!(" [{:.0} ms]", self.elapsed.as_secs_f64() * 1e3));
        line
    }
}

/// Deterministic report line: no timing, so repeated runs print the same text.
impl fmt::Display for PropertyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} ({} cases, {} violations, worst {:.3e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.violations,
            self.worst,
        )?;
        if let Some(c) = &self.counterexample {
            write!(f, "\n  counterexample: {c}")?;
        }
        Ok(())
    }
}

struct Tally {
    name: &'static str,
    cases: usize,
    violations: usize,
    worst: f64,
    counterexample: Option<String>,
    start: Timer,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            violations: 0,
            worst: f64::NEG_INFINITY,
            counterexample: None,
            start: Timer::start(),
        }
    }

    fn check(&mut self, excess: f64, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        self.worst = self.worst.max(excess);
        if !ok {
            self.violations += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(describe());
            }
        }
    }

    fn finish(self) -> PropertyOutcome {
        PropertyOutcome {
            name: self.name,
            cases: self.cases,
            violations: self.violations,
            worst: self.worst,
            counterexample: self.counterexample,
            elapsed: self.start.elapsed(),
        }
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else {
        0.0
    }
}

// std::time::Instant panics on wasm32-unknown-unknown.
#[cfg(not(target_arch = "wasm32"))]
struct Timer(std::time::Instant);
#[cfg(not(target_arch = "wasm32"))]
impl Timer {
    fn start() -> Self {
        Timer(std::time::Instant::now())
    }
    fn elapsed(&self) -> Duration {
        self.0.elapsed()
    }
}
#[cfg(target_arch = "wasm32")]
struct Timer;
#[cfg(target_arch = "wasm32")]
impl Timer {
    fn start() -> Self {
        Timer
    }
    fn elapsed(&self) -> Duration {
        Duration::ZERO
    }
}

/// A linear-loss stream `f_t(x) = g_t . x` over a box.
#[derive(Clone, Debug)]
pub struct LinearStream {
    pub domain: BoxDomain,
    pub gradients: Vec<SparseVector>,
}

impl LinearStream {
    pub fn diameters(&self) -> Vec<f64> {
        self.domain.diameters().expect("generated boxes have a dimension")
    }

    pub fn norms_sq(&self) -> Vec<f64> {
        self.gradients.iter().map(SparseVector::norm_sq).collect()
    }

    /// Regret of `learner` played through the stream, against the exact comparator.
    pub fn regret_of(&self, learner: &mut dyn Learner) -> Result<f64> {
        let losses: Vec<LossFunction<'static>> =
            self.gradients.iter().cloned().map(LossFunction::linear).collect();
        let mut total = 0.0;
        for f in &losses {
            total += f.value(learner.point());
            learner.observe(f)?;
        }
        let best = static_optimum(&losses, &self.domain, &ComparatorMode::ClosedForm)?;
        Ok(total - best.loss)
    }
}

/// Random box (dimension `<= max_dim`, diameters `<= max_diameter`) and
/// gradient stream (`<= max_rounds` rounds). Coordinates get individual
/// activity rates and magnitudes spanning three decades; about one box in
/// five excludes the origin.
pub fn random_linear_stream(
    rng: &mut impl Rng,
    max_dim: usize,
    max_rounds: usize,
    max_diameter: f64,
) -> LinearStream {
    let n = rng.random_range(1..=max_dim);
    let t = rng.random_range(1..=max_rounds);
    let shifted = rng.random_bool(0.2);
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for _ in 0..n {
        let d = max_diameter * rng.random_range(0.01..=1.0);
        let a = if shifted {
            rng.random_range(-2.0 * max_diameter..2.0 * max_diameter)
        } else {
            -d * rng.random::<f64>()
        };
        lower.push(a);
        upper.push(a + d);
    }
    let domain = BoxDomain::explicit(lower, upper).expect("valid generated box");
    let activity: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..=1.0)).collect();
    let magnitude: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-2.0..1.0))).collect();
    let drift: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let gradients = (0..t)
        .map(|_| {
            let mut g = SparseVector::new();
            for i in 0..n {
                if rng.random_bool(activity[i]) {
                    g.set(i, magnitude[i] * (drift[i] + rng.random_range(-1.0..1.0)));
                }
            }
            g
        })
        .collect();
    LinearStream { domain, gradients }
}

/// Lemma-1 inequality on random non-negative sequences (lengths 1..=100,
/// magnitudes log-uniform over 1e-6..1e6, with occasional zeros).
pub fn lemma1_battery(seed: u64, cases: usize) -> PropertyOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("lemma1-sum-inequality");
    for _ in 0..cases {
        let len = rng.random_range(1..=100);
        let xs: Vec<f64> = (0..len)
            .map(|_| {
                if rng.random_bool(0.05) {
                    0.0
                } else {
                    10f64.powf(rng.random_range(-6.0..=6.0))
                }
            })
            .collect();
        let (lhs, rhs) = lemma1_lhs_rhs(&xs).expect("generated inputs are valid");
        let ok = lhs <= rhs * (1.0 + 1e-9);
        tally.check(ratio(lhs, rhs), ok, || format!("{xs:?}"));
    }
    tally.finish()
}

/// Adaptive global rate (true diameter, scale 1): regret <= D sqrt(2 sum ||g||^2) + 1e-6.
pub fn global_rate_battery(seed: u64, cases: usize) -> PropertyOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("adaptive-global-regret-bound");
    for _ in 0..cases {
        let s = random_linear_stream(&mut rng, 8, 200, 10.0);
        let mut learner = AdaptiveGlobalOgd::with_true_diameter(s.domain.clone(), 1.0)
            .expect("finite box");
        let regret = s.regret_of(&mut learner).expect("valid stream");
        let d = s.domain.full_diameter().expect("finite box");
        let bound = r_min_global(d, &s.norms_sq()).adaptive;
        tally.check(ratio(regret, bound), regret <= bound + 1e-6, || {
            format!("regret {regret} > bound {bound}: {s:?}")
        });
    }
    tally.finish()
}

/// Golden-section minimum of `B(eta)` over constant rates equals `R_min`
/// within 1e-6 relative.
pub fn constant_rate_optimum_battery(seed: u64, cases: usize) -> PropertyOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("constant-rate-optimum-equals-r-min");
    for _ in 0..cases {
        let s = random_linear_stream(&mut rng, 8, 200, 10.0);
        let norms = s.norms_sq();
        let d = s.domain.full_diameter().expect("finite box");
        let r_min = r_min_global(d, &norms).r_min;
        if r_min == 0.0 {
            continue;
        }
        let (eta, b) = minimize_constant_rate_bound(d, &norms).expect("valid sequence");
        let rel = (b - r_min).abs() / r_min;
        tally.check(rel, rel <= 1e-6, || {
            format!("golden-section min {b} at eta {eta} vs r_min {r_min}")
        });
    }
    tally.finish()
}

/// Per-coordinate rates (scale 1): regret <= sum_i D_i sqrt(2 sum g_{t,i}^2) + 1e-6.
pub fn per_coordinate_battery(seed: u64, cases: usize) -> PropertyOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("per-coordinate-regret-bound");
    for _ in 0..cases {
        let s = random_linear_stream(&mut rng, 8, 200, 10.0);
        let mut learner = PerCoordinateOgd::new(s.domain.clone(), 1.0).expect("valid scale");
        let regret = s.regret_of(&mut learner).expect("valid stream");
        let bound = bound_percoord(|i| s.domain.diameter(i), &s.gradients).total;
        tally.check(ratio(regret, bound), regret <= bound + 1e-6, || {
            format!("regret {regret} > bound {bound}: {s:?}")
        });
    }
    tally.finish()
}

/// Per-coordinate bound never exceeds the global bound.
pub fn dominance_battery(seed: u64, cases: usize) -> PropertyOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("per-coordinate-bound-dominates");
    for _ in 0..cases {
        let s = random_linear_stream(&mut rng, 8, 200, 10.0);
        let d = check_dominance(&s.diameters(), &s.gradients).expect("diameters cover stream");
        tally.check(ratio(d.lhs, d.rhs), d.holds, || format!("{d:?}: {s:?}"));
    }
    tally.finish()
}

/// Iterative comparator agrees with a 10^5-point grid on one-dimensional
/// logistic streams within 1e-4 absolute loss.
pub fn comparator_grid_battery(seed: u64, cases: usize) -> PropertyOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("iterative-comparator-matches-grid");
    for _ in 0..cases {
        let radius = rng.random_range(0.5..=5.0);
        let domain = BoxDomain::symmetric(radius, Some(1)).expect("valid radius");
        let t = rng.random_range(5..=40);
        let bias = rng.random_range(0.2..0.8);
        let l2 = [0.0, 1e-3, 1e-2][rng.random_range(0..3)];
        let examples: Vec<Example> = (0..t)
            .map(|_| {
                let label = if rng.random_bool(bias) { 1.0 } else { -1.0 };
                Example::new(SparseVector::singleton(0, rng.random_range(0.1..=2.0)), label)
            })
            .collect();
        let losses: Vec<LossFunction<'_>> = examples
            .iter()
            .map(|e| LossFunction::Logistic {
                example: e,
                l2,
                scope: L2Scope::Full,
            })
            .collect();
        let it = static_optimum(&losses, &domain, &ComparatorMode::iterative(1.0))
            .expect("valid stream");
        let grid = static_optimum(&losses, &domain, &ComparatorMode::grid()).expect("1-D box");
        let gap = (it.loss - grid.loss).abs();
        tally.check(gap, gap <= 1e-4 && it.converged, || {
            format!(
                "iterative {} (converged {}, {} passes) vs grid {} on radius {radius}, l2 {l2}",
                it.loss, it.converged, it.passes, grid.loss
            )
        });
    }
    tally.finish()
}

/// Every battery with its default size.
pub fn full_battery(seed: u64) -> Vec<PropertyOutcome> {
    vec![
        lemma1_battery(seed, LEMMA1_CASES),
        global_rate_battery(seed, STREAM_CASES),
        constant_rate_optimum_battery(seed, STREAM_CASES),
        per_coordinate_battery(seed, STREAM_CASES),
        dominance_battery(seed, STREAM_CASES),
        comparator_grid_battery(seed, COMPARATOR_CASES),
    ]
}
