//! Mixed discrete/continuous black-box maximization.
//!
//! A gradient bandit picks a complete assignment of the discrete variables
//! (an *arm*); a Bayesian optimizer cached per arm then refines the
//! continuous variables for a few steps, and the best value that arm has
//! ever produced becomes the bandit's reward. The crate also ships three
//! synthetic benchmarks, the comparison baselines, and an experiment
//! harness that writes JSONL trajectories, CSV summaries and SVG plots.

pub mod bandit;
pub mod baselines;
pub mod bo;
pub mod continuous;
pub mod error;
pub mod functions;
pub mod harness;
pub mod hybrid;
pub mod rng;
pub mod space;

pub use error::{Error, EvalError, Result};
