//! Browser bindings. Each export returns a JSON string for the page in `www/`
//! to plot; the same computations are available natively for testing.

use adaptive_ogd::adversarial::{
    best_fixed_eta_regret, log_grid, oscillation_stream, run_instance, BadFamily,
};
use adaptive_ogd::learners::{AdaptiveGlobalOgd, FixedRateOgd, Learner, PerCoordinateOgd};
use adaptive_ogd::regret::loglog_slope;
use adaptive_ogd::{BoxDomain, ConvexLoss, Error, LossFunction, Result, SparseVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct Trace {
    pub label: String,
    /// `x_t` for each round.
    pub points: Vec<f64>,
    /// Cumulative loss after each round.
    pub loss: Vec<f64>,
}

/// One-dimensional oscillation `|x - epsilon|` on `[0, 1]`: a fixed rate and the
/// per-coordinate adaptive rate, round by round.
pub fn oscillation(eta: f64, rounds: usize, epsilon: f64) -> Result<Vec<Trace>> {
    let domain = BoxDomain::unit(Some(1));
    let losses = oscillation_stream(1.0, epsilon, rounds);
    let mut fixed = FixedRateOgd::new(domain.clone(), eta)?;
    let mut adaptive = PerCoordinateOgd::new(domain, 1.0)?;
    Ok(vec![
        trace(format!("fixed eta = {eta}"), &mut fixed, &losses)?,
        trace("per-coordinate".into(), &mut adaptive, &losses)?,
    ])
}

fn trace(label: String, learner: &mut dyn Learner, losses: &[LossFunction<'_>]) -> Result<Trace> {
    let mut points = Vec::with_capacity(losses.len());
    let mut loss = Vec::with_capacity(losses.len());
    let mut total = 0.0;
    for f in losses {
        points.push(learner.point().get(0));
        total += f.value(learner.point());
        loss.push(total);
        learner.observe(f)?;
    }
    Ok(Trace { label, points, loss })
}

#[derive(Debug, Serialize)]
pub struct SeparationPoint {
    pub t0: usize,
    pub rounds: usize,
    pub best_eta: f64,
    pub global: f64,
    pub per_coord: f64,
}

#[derive(Debug, Serialize)]
pub struct Separation {
    pub points: Vec<SeparationPoint>,
    pub slope_global: Option<f64>,
    pub slope_per_coord: Option<f64>,
}

/// Best fixed rate (over a 30-point grid) against the per-coordinate rate on
/// the interleaved adversarial family, for each oscillation length in `t0s`.
pub fn separation(t0s: &[usize], epsilon: f64) -> Result<Separation> {
    let grid = log_grid(1e-4, 1.0, 30);
    let mut points = Vec::new();
    for &t0 in t0s {
        let instance = BadFamily::canonical(t0, epsilon)?;
        let (best_eta, global) = best_fixed_eta_regret(&instance, &grid)?;
        let mut learner = PerCoordinateOgd::new(instance.domain(), 1.0)?;
        let per_coord = run_instance(&instance, &mut learner)?.regret;
        points.push(SeparationPoint {
            t0,
            rounds: instance.total_rounds(),
            best_eta,
            global,
            per_coord,
        });
    }
    let slope = |f: fn(&SeparationPoint) -> f64| {
        let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.rounds as f64, f(p))).collect();
        loglog_slope(&xy)
    };
    Ok(Separation {
        slope_global: slope(|p| p.global),
        slope_per_coord: slope(|p| p.per_coord),
        points,
    })
}

#[derive(Debug, Default, Serialize)]
pub struct BoundCurves {
    pub rounds: Vec<usize>,
    pub regret_global: Vec<f64>,
    pub regret_per_coord: Vec<f64>,
    /// `D sqrt(2 sum ||g||^2)`
    pub bound_global: Vec<f64>,
    /// `sum_i D_i sqrt(2 sum g_i^2)`
    pub bound_per_coord: Vec<f64>,
}

/// Sparse linear losses on `[-1, 1]^dim`: coordinate `i` is active with
/// probability `(i + 1)^-skew`, with a persistent random sign plus noise.
/// Regret of the adaptive global rate (true diameter) and of the per-coordinate
/// rate, with their bounds, sampled at `samples` points.
pub fn bound_comparison(
    seed: u64,
    dim: usize,
    rounds: usize,
    skew: f64,
    samples: usize,
) -> Result<BoundCurves> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = BoxDomain::symmetric(1.0, Some(dim))?;
    let drift: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut global = AdaptiveGlobalOgd::with_true_diameter(domain.clone(), 1.0)?;
    let mut per_coord = PerCoordinateOgd::new(domain.clone(), 1.0)?;
    let d = domain
        .full_diameter()
        .ok_or_else(|| Error::InvalidInput("dimension unknown".into()))?;

    let mut loss_global = 0.0;
    let mut loss_per_coord = 0.0;
    let mut sums = vec![0.0; dim];
    let mut sq = vec![0.0; dim];
    let mut total_sq = 0.0;
    let every = (rounds / samples.max(1)).max(1);
    let mut out = BoundCurves::default();
    for t in 1..=rounds {
        let mut g = SparseVector::new();
        for (i, &mu) in drift.iter().enumerate() {
            if rng.random_bool((i as f64 + 1.0).powf(-skew).min(1.0)) {
                g.set(i, mu + rng.random_range(-1.0..1.0));
            }
        }
        let f = LossFunction::linear(g.clone());
        loss_global += f.value(global.point());
        loss_per_coord += f.value(per_coord.point());
        global.observe(&f)?;
        per_coord.observe(&f)?;
        for (i, v) in g.iter() {
            sums[i] += v;
            sq[i] += v * v;
        }
        total_sq += g.norm_sq();
        if t % every == 0 || t == rounds {
            // best fixed point of a linear objective on [-1, 1]^n
            let best: f64 = -sums.iter().map(|s| s.abs()).sum::<f64>();
            out.rounds.push(t);
            out.regret_global.push(loss_global - best);
            out.regret_per_coord.push(loss_per_coord - best);
            out.bound_global.push(d * (2.0 * total_sq).sqrt());
            out.bound_per_coord.push(sq.iter().map(|s| 2.0 * (2.0 * s).sqrt()).sum());
        }
    }
    Ok(out)
}

fn to_js<T: Serialize>(value: Result<T>) -> std::result::Result<String, JsError> {
    let value = value.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = oscillationTrace)]
pub fn oscillation_trace(eta: f64, rounds: usize, epsilon: f64) -> std::result::Result<String, JsError> {
    to_js(oscillation(eta, rounds.min(100_000), epsilon))
}

#[wasm_bindgen(js_name = separationCurve)]
pub fn separation_curve(t0s: Vec<u32>, epsilon: f64) -> std::result::Result<String, JsError> {
    let t0s: Vec<usize> = t0s.into_iter().map(|t| (t as usize).min(200_000)).collect();
    to_js(separation(&t0s, epsilon))
}

#[wasm_bindgen(js_name = boundComparison)]
pub fn bound_comparison_json(
    seed: u32,
    dim: usize,
    rounds: usize,
    skew: f64,
) -> std::result::Result<String, JsError> {
    to_js(bound_comparison(u64::from(seed), dim.clamp(1, 10_000), rounds.min(200_000), skew, 200))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillation_fixed_rate_pays_half_eta_per_round() {
        let traces = oscillation(0.5, 1000, 0.01).unwrap();
        assert!((traces[0].loss[999] - 250.0).abs() < 1e-9);
        assert!(traces[1].loss[999] < traces[0].loss[999]);
    }

    #[test]
    fn separation_slopes_order() {
        let s = separation(&[64, 512, 4096], 0.01).unwrap();
        assert_eq!(s.points.len(), 3);
        assert!(s.slope_global.unwrap() > s.slope_per_coord.unwrap());
    }

    #[test]
    fn bounds_hold_along_the_way() {
        let c = bound_comparison(3, 50, 5_000, 1.0, 50).unwrap();
        assert_eq!(c.rounds.last(), Some(&5_000));
        for k in 0..c.rounds.len() {
            assert!(c.regret_global[k] <= c.bound_global[k] + 1e-6);
            assert!(c.regret_per_coord[k] <= c.bound_per_coord[k] + 1e-6);
            assert!(c.bound_per_coord[k] <= c.bound_global[k] + 1e-9);
        }
    }

    #[test]
    fn json_exports() {
        let s = oscillation_trace(0.25, 10, 0.01).unwrap();
        assert!(s.starts_with('['));
        assert!(bound_comparison_json(1, 5, 100, 1.0).unwrap().contains("bound_global"));
    }
}
