//! The best fixed point in hindsight, plus the grid and golden-section
//! minimisers used as verification oracles.

use std::collections::BTreeMap;

use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::example::Example;
use crate::losses::{sigmoid, softplus, ConvexLoss, L2Scope, LossFunction};
use crate::sparse::SparseVector;

use super::bound_b;

pub const DEFAULT_TOL_REL: f64 = 1e-6;
pub const DEFAULT_MAX_PASSES: usize = 200;
pub const DEFAULT_GRID_POINTS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Comparator {
    pub point: SparseVector,
    /// `sum_t f_t(point)`
    pub loss: f64,
    /// False when an iterative solve hit its pass limit.
    pub converged: bool,
    pub passes: usize,
}

impl Comparator {
    pub fn exact(point: SparseVector, loss: f64) -> Self {
        Self {
            point,
            loss,
            converged: true,
            passes: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ComparatorMode {
    /// Exact minimiser for coordinate-separable piecewise-linear streams
    /// (linear and absolute losses).
    ClosedForm,
    /// Repeated full passes of per-coordinate adaptive descent until the total
    /// loss changes by less than `tol_rel` (relative) between passes.
    Iterative {
        tol_rel: f64,
        max_passes: usize,
        scale: f64,
    },
    /// Exhaustive evenly spaced grid on a one-dimensional box.
    Grid { points: usize },
}

impl ComparatorMode {
    pub fn iterative(scale: f64) -> Self {
        ComparatorMode::Iterative {
            tol_rel: DEFAULT_TOL_REL,
            max_passes: DEFAULT_MAX_PASSES,
            scale,
        }
    }

    pub fn grid() -> Self {
        ComparatorMode::Grid {
            points: DEFAULT_GRID_POINTS,
        }
    }
}

pub fn static_optimum(
    losses: &[LossFunction<'_>],
    domain: &BoxDomain,
    mode: &ComparatorMode,
) -> Result<Comparator> {
    if losses.is_empty() {
        return Err(Error::InvalidInput("comparator needs at least one loss".into()));
    }
    match mode {
        ComparatorMode::ClosedForm => closed_form(losses, domain),
        ComparatorMode::Iterative {
            tol_rel,
            max_passes,
            scale,
        } => iterative(losses, domain, *tol_rel, *max_passes, *scale),
        ComparatorMode::Grid { points } => grid(losses, domain, *points),
    }
}

fn total_loss(losses: &[LossFunction<'_>], x: &SparseVector) -> f64 {
    losses.iter().map(|f| f.value(x)).sum()
}

/// Per coordinate the objective is `s * y + sum_k w_k |y - c_k|`, convex and
/// piecewise linear, so the minimum sits at an endpoint or a kink. Ties go to
/// the smallest minimiser (the lower endpoint for a flat objective).
fn closed_form(losses: &[LossFunction<'_>], domain: &BoxDomain) -> Result<Comparator> {
    let mut slopes: BTreeMap<usize, f64> = BTreeMap::new();
    let mut kinks: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for f in losses {
        match f {
            LossFunction::Linear { gradient } => {
                for (i, g) in gradient.iter() {
                    *slopes.entry(i).or_insert(0.0) += g;
                }
            }
            LossFunction::Absolute { scale, kink, coord } => {
                kinks.entry(*coord).or_default().push((*kink, *scale));
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "closed-form comparator handles linear and absolute losses only, got {other:?}"
                )))
            }
        }
    }

    let mut point = domain.origin();
    let coords: Vec<usize> = slopes.keys().chain(kinks.keys()).copied().collect();
    for i in coords {
        if !domain.has_index(i) {
            return Err(Error::InvalidInput(format!("loss touches coordinate {i} outside the box")));
        }
        let (a, b) = domain.interval(i);
        let s = slopes.get(&i).copied().unwrap_or(0.0);
        let y = piecewise_linear_argmin(s, kinks.get(&i).map_or(&[][..], Vec::as_slice), a, b);
        point.set(i, y);
    }
    let loss = total_loss(losses, &point);
    Ok(Comparator::exact(point, loss))
}

fn piecewise_linear_argmin(slope: f64, kinks: &[(f64, f64)], lo: f64, hi: f64) -> f64 {
    let mut sorted: Vec<(f64, f64)> = kinks.to_vec();
    sorted.sort_by(|p, q| p.0.total_cmp(&q.0));
    // prefix sums of w and w * c over sorted kinks
    let mut pw = vec![0.0];
    let mut pwc = vec![0.0];
    for &(c, w) in &sorted {
        pw.push(pw.last().unwrap() + w);
        pwc.push(pwc.last().unwrap() + w * c);
    }
    let (tw, twc) = (*pw.last().unwrap(), *pwc.last().unwrap());
    let eval = |y: f64| {
        let k = sorted.partition_point(|&(c, _)| c < y);
        let below = pw[k] * y - pwc[k];
        let above = (twc - pwc[k]) - (tw - pw[k]) * y;
        slope * y + below + above
    };
    let mut best = (lo, eval(lo));
    let inner = sorted.iter().map(|&(c, _)| c).filter(|&c| c > lo && c < hi);
    for y in inner.chain(std::iter::once(hi)) {
        let v = eval(y);
        if v < best.1 {
            best = (y, v);
        }
    }
    best.0
}

/// Each pass sums the subgradients of every loss at the current point and
/// takes one per-coordinate adaptive step on that aggregate. Adaptive steps on
/// a smooth objective tend to settle into a slowly damped oscillation around
/// the minimiser, where successive iterates have nearly equal loss on either
/// side of it. The midpoint of consecutive iterates is therefore evaluated as
/// well, and the solve stops only once both the last-iterate loss and the best
/// candidate loss have stopped moving.
///
/// The iterate is held densely over the box, so every pass costs time linear
/// in the dimension plus the total support of the stream.
fn iterative(
    losses: &[LossFunction<'_>],
    domain: &BoxDomain,
    tol_rel: f64,
    max_passes: usize,
    scale: f64,
) -> Result<Comparator> {
    check_rate(scale)?;
    let objective = DenseObjective::new(losses, domain)?;
    let n = objective.dim;
    let mut x = domain.origin().to_dense(n);
    let mut sum_sq = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut mid = vec![0.0; n];
    let mut best_point = x.clone();
    let mut best = objective.value(&x);
    let mut previous_last = best;
    let mut previous_best = best;
    let settled = |a: f64, b: f64| (a - b).abs() <= tol_rel * a.abs().max(b.abs());
    for pass in 1..=max_passes {
        objective.gradient(&x, &mut g);
        for i in 0..n {
            mid[i] = x[i];
            if g[i] != 0.0 {
                ensure_finite(g[i], "comparator gradient")?;
                sum_sq[i] += g[i] * g[i];
                let eta = scale * domain.diameter(i) / sum_sq[i].sqrt();
                x[i] = domain.clip(i, x[i] - eta * g[i]);
            }
        }
        let last = objective.value(&x);
        if last < best {
            best = last;
            best_point.copy_from_slice(&x);
        }
        for (m, xi) in mid.iter_mut().zip(&x) {
            *m = 0.5 * *m + 0.5 * xi;
        }
        let mid_loss = objective.value(&mid);
        if mid_loss < best {
            best = mid_loss;
            best_point.copy_from_slice(&mid);
        }
        log::debug!("comparator pass {pass}: last {last}, best {best}");
        if pass > 1 && settled(previous_last, last) && settled(previous_best, best) {
            return Ok(Comparator {
                point: SparseVector::from_dense(&best_point),
                loss: best,
                converged: true,
                passes: pass,
            });
        }
        previous_last = last;
        previous_best = best;
    }
    log::warn!("comparator did not converge in {max_passes} passes");
    Ok(Comparator {
        point: SparseVector::from_dense(&best_point),
        loss: best,
        converged: false,
        passes: max_passes,
    })
}

fn check_rate(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("comparator scale must be positive and finite, got {scale}")))
    }
}

fn ensure_finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} is not finite: {v}")))
    }
}

/// `sum_t f_t` over dense points. Full-scope L2 penalties are pooled into one
/// term so that no single loss costs time proportional to the dimension.
struct DenseObjective<'s, 'a> {
    losses: &'s [LossFunction<'a>],
    dim: usize,
    pooled_l2: f64,
}

impl<'s, 'a> DenseObjective<'s, 'a> {
    fn new(losses: &'s [LossFunction<'a>], domain: &BoxDomain) -> Result<Self> {
        let mut top = 0;
        let mut pooled_l2 = 0.0;
        for f in losses {
            let reach = match f {
                LossFunction::Linear { gradient } => gradient.dim_hint(),
                LossFunction::Absolute { coord, .. } => coord + 1,
                LossFunction::Hinge { example } => example.features.dim_hint(),
                LossFunction::Logistic { example, l2, scope } => {
                    if *scope == L2Scope::Full {
                        pooled_l2 += l2;
                    }
                    example.features.dim_hint()
                }
            };
            top = top.max(reach);
        }
        let dim = match domain.dim() {
            Some(n) if top > n => {
                return Err(Error::InvalidInput(format!(
                    "loss touches coordinate {} outside box of dimension {n}",
                    top - 1
                )))
            }
            Some(n) => n,
            None => top,
        };
        Ok(Self {
            losses,
            dim,
            pooled_l2,
        })
    }

    fn value(&self, x: &[f64]) -> f64 {
        let margin = |e: &Example| e.label * e.features.iter().map(|(i, v)| v * x[i]).sum::<f64>();
        let mut total = 0.0;
        for f in self.losses {
            total += match f {
                LossFunction::Linear { gradient } => gradient.iter().map(|(i, v)| v * x[i]).sum(),
                LossFunction::Absolute { scale, kink, coord } => scale * (x[*coord] - kink).abs(),
                LossFunction::Hinge { example } => (1.0 - margin(example)).max(0.0),
                LossFunction::Logistic { example, l2, scope } => {
                    let mut v = softplus(-margin(example));
                    if *scope == L2Scope::Active {
                        v += 0.5 * l2 * example.features.indices().map(|i| x[i] * x[i]).sum::<f64>();
                    }
                    v
                }
            };
        }
        if self.pooled_l2 != 0.0 {
            total += 0.5 * self.pooled_l2 * x.iter().map(|v| v * v).sum::<f64>();
        }
        total
    }

    /// Writes the summed subgradient at `x` into `out`, using the same
    /// subgradient selection as [`ConvexLoss::subgradient`].
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let margin = |e: &Example| e.label * e.features.iter().map(|(i, v)| v * x[i]).sum::<f64>();
        for f in self.losses {
            match f {
                LossFunction::Linear { gradient } => {
                    for (i, v) in gradient.iter() {
                        out[i] += v;
                    }
                }
                LossFunction::Absolute { scale, kink, coord } => {
                    let xi = x[*coord];
                    if xi < *kink {
                        out[*coord] -= scale;
                    } else if xi > *kink {
                        out[*coord] += scale;
                    }
                }
                LossFunction::Hinge { example } => {
                    if margin(example) < 1.0 {
                        for (i, v) in example.features.iter() {
                            out[i] -= example.label * v;
                        }
                    }
                }
                LossFunction::Logistic { example, l2, scope } => {
                    let w = -example.label * sigmoid(-margin(example));
                    for (i, v) in example.features.iter() {
                        out[i] += w * v;
                        if *scope == L2Scope::Active {
                            out[i] += l2 * x[i];
                        }
                    }
                }
            }
        }
        if self.pooled_l2 != 0.0 {
            for (o, xi) in out.iter_mut().zip(x) {
                *o += self.pooled_l2 * xi;
            }
        }
    }
}

fn grid(losses: &[LossFunction<'_>], domain: &BoxDomain, points: usize) -> Result<Comparator> {
    if domain.dim() != Some(1) {
        return Err(Error::InvalidInput("grid comparator needs a one-dimensional box".into()));
    }
    let (a, b) = domain.interval(0);
    let mut x = SparseVector::new();
    let (y, loss) = grid_minimize(a, b, points, |y| {
        x.set(0, y);
        total_loss(losses, &x)
    });
    Ok(Comparator::exact(SparseVector::singleton(0, y), loss))
}

/// Minimum of `f` over `points` evenly spaced values in `[lo, hi]`
/// (endpoints included).
pub fn grid_minimize(lo: f64, hi: f64, points: usize, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    if points < 2 || lo == hi {
        return (lo, f(lo));
    }
    let step = (hi - lo) / (points - 1) as f64;
    let mut best = (lo, f(lo));
    for k in 1..points {
        let y = if k == points - 1 { hi } else { lo + step * k as f64 };
        let v = f(y);
        if v < best.1 {
            best = (y, v);
        }
    }
    best
}

/// Tensor grid over a box with about `total_points` points
/// (`floor(total_points^(1/n))` per axis).
pub fn grid_minimize_box(
    intervals: &[(f64, f64)],
    total_points: usize,
    mut f: impl FnMut(&[f64]) -> f64,
) -> (Vec<f64>, f64) {
    let n = intervals.len();
    if n == 0 {
        return (Vec::new(), f(&[]));
    }
    let mut per_axis = (total_points as f64).powf(1.0 / n as f64).floor() as usize;
    while (per_axis + 1).pow(n as u32) <= total_points {
        per_axis += 1;
    }
    let per_axis = per_axis.max(2);
    let axis = |k: usize, j: usize| {
        let (a, b) = intervals[k];
        if j == per_axis - 1 {
            b
        } else {
            a + (b - a) * j as f64 / (per_axis - 1) as f64
        }
    };
    let mut idx = vec![0usize; n];
    let mut y: Vec<f64> = (0..n).map(|k| axis(k, 0)).collect();
    let mut best = (y.clone(), f(&y));
    loop {
        let mut k = 0;
        loop {
            if k == n {
                return best;
            }
            idx[k] += 1;
            if idx[k] < per_axis {
                y[k] = axis(k, idx[k]);
                break;
            }
            idx[k] = 0;
            y[k] = axis(k, 0);
            k += 1;
        }
        let v = f(&y);
        if v < best.1 {
            best = (y.clone(), v);
        }
    }
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_min(
    mut f: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    iterations: usize,
) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iterations {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Minimises `B(eta, ..., eta)` over constant rates by golden-section search
/// on `ln eta` in `[1e-12, 1e12]`. Returns `(eta, B)`.
pub fn minimize_constant_rate_bound(diameter: f64, grad_norms_sq: &[f64]) -> Result<(f64, f64)> {
    if grad_norms_sq.is_empty() {
        return Err(Error::Contract("need at least one round".into()));
    }
    let t = grad_norms_sq.len();
    let mut err = None;
    let (u, value) = golden_section_min(
        |u| {
            let rates = vec![u.exp(); t];
            bound_b(diameter, &rates, grad_norms_sq).unwrap_or_else(|e| {
                err = Some(e);
                f64::INFINITY
            })
        },
        (1e-12f64).ln(),
        (1e12f64).ln(),
        200,
    );
    match err {
        Some(e) => Err(e),
        None => Ok((u.exp(), value)),
    }
}
