//! Online convex optimisation over axis-aligned boxes with per-coordinate
//! adaptive learning rates.
//!
//! The crate provides sparse vectors and box projection ([`sparse`],
//! [`domain`]), per-round convex losses ([`losses`]), online learners
//! ([`learners`]), regret accounting and bound calculators ([`regret`]),
//! adversarial loss streams ([`adversarial`]), LIBSVM ingestion and result
//! emission ([`data`]), and the experiment drivers behind the `aogd` CLI
//! ([`harness`]).

pub mod adversarial;
pub mod data;
pub mod domain;
mod error;
pub mod example;
pub mod harness;
pub mod learners;
pub mod losses;
pub mod regret;
pub mod sparse;

pub use domain::{project, BoxDomain};
pub use error::{Error, Result};
pub use example::Example;
pub use learners::Learner;
pub use losses::{ConvexLoss, LossFunction};
pub use sparse::{axpy, dot, SparseVector};
