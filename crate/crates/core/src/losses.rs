//! Convex per-round losses and their subgradients.

use crate::example::Example;
use crate::sparse::SparseVector;

/// A convex function of the iterate together with a subgradient oracle.
pub trait ConvexLoss {
    fn value(&self, x: &SparseVector) -> f64;
    fn subgradient(&self, x: &SparseVector) -> SparseVector;
}

/// Which coordinates the L2 penalty of a logistic loss covers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum L2Scope {
    /// `(lambda / 2) * ||x||^2` over every coordinate.
    #[default]
    Full,
    /// `(lambda / 2) * sum x_i^2` over the example's nonzero features only, so a
    /// round costs time proportional to the example's support.
    Active,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LossFunction<'a> {
    /// `g . x`
    Linear { gradient: SparseVector },
    /// `scale * |x_coord - kink|`
    Absolute { scale: f64, kink: f64, coord: usize },
    /// `max(0, 1 - y (x . theta))`
    Hinge { example: &'a Example },
    /// `log(1 + exp(-y (x . theta))) + (l2 / 2) ||x||^2`
    Logistic {
        example: &'a Example,
        l2: f64,
        scope: L2Scope,
    },
}

impl LossFunction<'_> {
    pub fn linear(gradient: SparseVector) -> LossFunction<'static> {
        LossFunction::Linear { gradient }
    }

    pub fn absolute(scale: f64, kink: f64, coord: usize) -> LossFunction<'static> {
        LossFunction::Absolute { scale, kink, coord }
    }

    pub fn hinge(example: &Example) -> LossFunction<'_> {
        LossFunction::Hinge { example }
    }

    pub fn logistic(example: &Example, l2: f64) -> LossFunction<'_> {
        LossFunction::Logistic {
            example,
            l2,
            scope: L2Scope::Full,
        }
    }

    pub fn example(&self) -> Option<&Example> {
        match self {
            LossFunction::Hinge { example } | LossFunction::Logistic { example, .. } => {
                Some(example)
            }
            _ => None,
        }
    }
}

impl ConvexLoss for LossFunction<'_> {
    fn value(&self, x: &SparseVector) -> f64 {
        match self {
            LossFunction::Linear { gradient } => gradient.dot(x),
            LossFunction::Absolute { scale, kink, coord } => scale * (x.get(*coord) - kink).abs(),
            LossFunction::Hinge { example } => (1.0 - example.margin(x)).max(0.0),
            LossFunction::Logistic { example, l2, scope } => {
                let z = -example.margin(x);
                softplus(z) + 0.5 * l2 * l2_mass(x, example, *scope)
            }
        }
    }

    fn subgradient(&self, x: &SparseVector) -> SparseVector {
        match self {
            LossFunction::Linear { gradient } => gradient.clone(),
            LossFunction::Absolute { scale, kink, coord } => {
                let xi = x.get(*coord);
                let g = if xi < *kink {
                    -scale
                } else if xi > *kink {
                    *scale
                } else {
                    0.0
                };
                SparseVector::singleton(*coord, g)
            }
            LossFunction::Hinge { example } => {
                // Zero at the kink: exactly-met margins do not move the iterate.
                if example.margin(x) < 1.0 {
                    example.features.scaled(-example.label)
                } else {
                    SparseVector::new()
                }
            }
            LossFunction::Logistic { example, l2, scope } => {
                let z = -example.margin(x);
                let mut g = example.features.scaled(-example.label * sigmoid(z));
                if *l2 != 0.0 {
                    match scope {
                        L2Scope::Full => g.add_scaled(*l2, x),
                        L2Scope::Active => {
                            for i in example.features.indices() {
                                let next = g.get(i) + l2 * x.get(i);
                                g.set(i, next);
                            }
                        }
                    }
                }
                g
            }
        }
    }
}

fn l2_mass(x: &SparseVector, example: &Example, scope: L2Scope) -> f64 {
    match scope {
        L2Scope::Full => x.norm_sq(),
        L2Scope::Active => example
            .features
            .indices()
            .map(|i| x.get(i).powi(2))
            .sum(),
    }
}

/// `log(1 + exp(z))` without overflow.
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// `1 / (1 + exp(-z))` without overflow.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
