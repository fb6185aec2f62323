//! Streaming sketches that estimate the SVM hinge objective at a query
//! hyperplane, and a grid-search reduction that turns those estimates into
//! an approximate minimizer.
//!
//! - [`mult1d`]: `(1+ε)` multiplicative estimators for `d = 1` (offline prefix
//!   sketch and the streaming level-sample sketch).
//! - [`dyn1d`]: streaming dynamic-interval multiplicative sketch.
//! - [`add1d`], [`add2d`]: additive-ε tree sketches for `d = 1, 2`.
//! - [`optimize`]: grid reduction with median boosting, plus a
//!   reservoir + SGD baseline.
//! - [`gen`]: synthetic and adversarial stream generators.

pub mod add1d;
pub mod add2d;
pub mod bench;
pub mod codec;
pub mod dyn1d;
pub mod error;
pub mod estimator;
pub mod gen;
pub mod io;
pub mod mult1d;
pub mod objective;
pub mod optimize;
pub mod sampler;
pub mod sketch;
pub mod types;
pub mod verify;

pub use error::{HskError, Result};
pub use types::{HyperplaneQuery, Label, LabeledPoint, Power, SketchParams};
