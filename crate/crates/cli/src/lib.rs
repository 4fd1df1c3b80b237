//! Experiment harness for the greedy cover solver: configuration, the `(ε, τ, ρ)` grid, sketch
//! caching, and the randomized verification suite behind the `scsc` binary.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiment;
pub mod sketch_cache;
pub mod verify;

pub use config::{CostSpec, Dataset, ExperimentConfig, TauSpec};
pub use experiment::{run_experiment, solve_once, write_csv, Row, Solved};
pub use sketch_cache::{cached_sketch, sketch_cache, SketchSource};
pub use verify::{run_suite, SuiteOptions, SuiteReport};
