//! Gaussian-process Bayesian optimization with ask/tell semantics.

mod acquisition;
mod design;
mod gp;
mod state;

pub use acquisition::{expected_improvement, normal_cdf, normal_pdf};
pub use design::latin_hypercube;
pub use gp::{sq_exp, GpConfig, GpModel, DEFAULT_LENGTH_SCALES};
pub use state::{argmax_ei, BoConfig, BoState, Incumbent, BO_STATE_VERSION};
