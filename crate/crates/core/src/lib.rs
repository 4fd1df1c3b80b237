//! Greedy submodular-cost submodular cover with approximate value oracles.
//!
//! The crate provides:
//!
//! * [`graph`]: edge-list ingestion, weighted-cascade probabilities, sampled realizations.
//! * [`oracle`]: exact average reachability, bottom-k reachability sketches, noisy wrappers,
//!   truncation.
//! * [`cost`]: modular and concave cost models, curvature.
//! * [`greedy`]: the cost-effectiveness greedy and its early-exit and translated variants.
//! * [`guarantees`]: trace statistics and approximation-ratio certificates.
//! * [`bruteforce`]: exhaustive optima and property checks for small instances.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is on (the default); see
//! [`Exec`].

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bruteforce;
pub mod cost;
pub mod error;
pub mod exec;
pub mod graph;
pub mod greedy;
pub mod guarantees;
pub mod oracle;
pub mod rng;

pub use error::{Error, Result};
pub use exec::Exec;
