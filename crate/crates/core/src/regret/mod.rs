//! Regret accounting and the analytical regret bounds for projected gradient
//! descent with global and per-coordinate rates.

pub mod audit;
mod comparator;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::sparse::SparseVector;

pub use comparator::{
    golden_section_min, grid_minimize, grid_minimize_box, minimize_constant_rate_bound,
    static_optimum, Comparator, ComparatorMode, DEFAULT_GRID_POINTS, DEFAULT_MAX_PASSES,
    DEFAULT_TOL_REL,
};

/// `B = D^2 / (2 eta_T) + 0.5 * sum_t ||g_t||^2 eta_t` for a non-increasing
/// positive rate sequence.
pub fn bound_b(diameter: f64, rates: &[f64], grad_norms_sq: &[f64]) -> Result<f64> {
    if rates.is_empty() || rates.len() != grad_norms_sq.len() {
        return Err(Error::Contract(format!(
            "need equal-length nonempty sequences (rates {}, gradients {})",
            rates.len(),
            grad_norms_sq.len()
        )));
    }
    if let Some(t) = rates.iter().position(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::Contract(format!("rate at round {} is not positive", t + 1)));
    }
    if let Some(t) = rates.windows(2).position(|w| w[1] > w[0]) {
        return Err(Error::Contract(format!(
            "rates must be non-increasing; round {} increases",
            t + 2
        )));
    }
    let last = *rates.last().expect("nonempty");
    let sum: f64 = rates.iter().zip(grad_norms_sq).map(|(r, g)| r * g).sum();
    Ok(diameter * diameter / (2.0 * last) + 0.5 * sum)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlobalBound {
    /// `D * sqrt(sum ||g_t||^2)`, the best bound any non-increasing schedule achieves.
    pub r_min: f64,
    /// `sqrt(2) * r_min`, guaranteed by the adaptive global rate.
    pub adaptive: f64,
}

pub fn r_min_global(diameter: f64, grad_norms_sq: &[f64]) -> GlobalBound {
    let r_min = diameter * grad_norms_sq.iter().sum::<f64>().sqrt();
    GlobalBound {
        r_min,
        adaptive: std::f64::consts::SQRT_2 * r_min,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerCoordBound {
    /// `D_i * sqrt(2 * sum_t g_{t,i}^2)` for each coordinate with a nonzero gradient.
    pub terms: BTreeMap<usize, f64>,
    pub total: f64,
}

/// Per-coordinate sums of squared gradient components.
pub fn coordinate_sums(grads: &[SparseVector]) -> BTreeMap<usize, f64> {
    let mut sums = BTreeMap::new();
    for g in grads {
        for (i, v) in g.iter() {
            *sums.entry(i).or_insert(0.0) += v * v;
        }
    }
    sums
}

pub fn bound_percoord(diameter: impl Fn(usize) -> f64, grads: &[SparseVector]) -> PerCoordBound {
    percoord_from_sums(diameter, &coordinate_sums(grads))
}

fn percoord_from_sums(diameter: impl Fn(usize) -> f64, sums: &BTreeMap<usize, f64>) -> PerCoordBound {
    let terms: BTreeMap<usize, f64> = sums
        .iter()
        .map(|(&i, &s)| (i, diameter(i) * (2.0 * s).sqrt()))
        .collect();
    let total = terms.values().sum();
    PerCoordBound { terms, total }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dominance {
    /// `sum_i D_i sqrt(2 sum_t g_{t,i}^2)`
    pub lhs: f64,
    /// `D sqrt(2 sum_t ||g_t||^2)` with `D = sqrt(sum_i D_i^2)`
    pub rhs: f64,
    pub holds: bool,
}

/// Compares the per-coordinate bound with the global one. `holds` allows a
/// relative slack of 1e-9.
pub fn check_dominance(diameters: &[f64], grads: &[SparseVector]) -> Result<Dominance> {
    let sums = coordinate_sums(grads);
    if let Some((&i, _)) = sums.range(diameters.len()..).next() {
        return Err(Error::InvalidInput(format!(
            "gradient coordinate {i} has no diameter (dimension {})",
            diameters.len()
        )));
    }
    let lhs = percoord_from_sums(|i| diameters[i], &sums).total;
    let d = diameters.iter().map(|x| x * x).sum::<f64>().sqrt();
    let total_sq: f64 = sums.values().sum();
    let rhs = d * (2.0 * total_sq).sqrt();
    Ok(Dominance {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-9),
    })
}

/// Both sides of `sum_i x_i / sqrt(sum_{j<=i} x_j) <= 2 sqrt(sum_i x_i)`. Terms
/// whose running sum is zero contribute zero.
pub fn lemma1_lhs_rhs(xs: &[f64]) -> Result<(f64, f64)> {
    let mut running = 0.0;
    let mut lhs = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "element {i} must be a finite non-negative number, got {x}"
            )));
        }
        running += x;
        if running > 0.0 {
            lhs += x / running.sqrt();
        }
    }
    Ok((lhs, 2.0 * running.sqrt()))
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than three
/// points or non-positive values.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 3 || points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Named bound values attached to a ledger.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundValues {
    pub b_global: f64,
    pub r_min: f64,
    pub b_percoord: f64,
    pub r_min_percoord_sum: f64,
}

/// Per-round record of an online run.
#[derive(Clone, Debug, Default)]
pub struct RegretLedger {
    losses: Vec<f64>,
    gradients: Option<Vec<SparseVector>>,
    cumulative: f64,
    comparator: Option<Comparator>,
    waived: bool,
}

impl RegretLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// A ledger that also keeps every round's gradient (support entries only).
    pub fn with_gradient_log() -> Self {
        Self {
            gradients: Some(Vec::new()),
            ..Self::default()
        }
    }

    pub fn record(&mut self, loss: f64, gradient: Option<&SparseVector>) {
        self.losses.push(loss);
        self.cumulative += loss;
        if let (Some(log), Some(g)) = (self.gradients.as_mut(), gradient) {
            log.push(g.clone());
        }
    }

    pub fn rounds(&self) -> usize {
        self.losses.len()
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    pub fn gradients(&self) -> Option<&[SparseVector]> {
        self.gradients.as_deref()
    }

    pub fn cumulative_loss(&self) -> f64 {
        self.cumulative
    }

    pub fn resolve(&mut self, comparator: Comparator) {
        self.comparator = Some(comparator);
    }

    /// Mark the comparator as deliberately not computed (e.g. classification
    /// runs that report hinge loss and mistakes only).
    pub fn waive_comparator(&mut self) {
        self.waived = true;
    }

    pub fn is_resolved(&self) -> bool {
        self.comparator.is_some() || self.waived
    }

    pub fn comparator(&self) -> Option<&Comparator> {
        self.comparator.as_ref()
    }

    pub fn regret(&self) -> Option<f64> {
        self.comparator.as_ref().map(|c| self.cumulative - c.loss)
    }

    pub fn regret_per_round(&self) -> Option<f64> {
        let t = self.rounds();
        self.regret().filter(|_| t > 0).map(|r| r / t as f64)
    }

    /// Bound values over the logged gradients for a box with the given
    /// per-coordinate diameters. `None` without a gradient log.
    pub fn bounds(&self, diameters: &[f64]) -> Option<Result<BoundValues>> {
        let grads = self.gradients.as_ref()?;
        Some(check_dominance(diameters, grads).map(|dom| {
            let d = diameters.iter().map(|x| x * x).sum::<f64>().sqrt();
            let norms: Vec<f64> = grads.iter().map(SparseVector::norm_sq).collect();
            let global = r_min_global(d, &norms);
            BoundValues {
                b_global: global.adaptive,
                r_min: global.r_min,
                b_percoord: dom.lhs,
                r_min_percoord_sum: dom.lhs / std::f64::consts::SQRT_2,
            }
        }))
    }
}
