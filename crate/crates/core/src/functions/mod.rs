//! Objective functions over mixed spaces.
//!
//! Objectives are maximized. The synthetic benchmarks carry their known
//! global optimum so trajectories can report a gap; external objectives
//! delegate each evaluation to a user command.

mod external;
mod synthetic;

pub use external::{ExternalObjective, ExternalRequest, ExternalResponse};
pub use synthetic::{
    ackley, composition, perm_u, perm_v, perm_w, rastrigin, shekel, sine_g, sine_permutation, sphere,
    Composition, Shekel, SinePermutation, PERM_DOMAIN, PERM_U, PERM_V, PERM_W, SHEKEL_A, SHEKEL_C,
    SINE_PERMUTATION_OPTIMUM,
};

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::space::MixedSpace;

/// Location and value of an objective's global maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownOptimum {
    pub value: f64,
    #[serde(default)]
    pub discrete: Vec<f64>,
    #[serde(default)]
    pub continuous: Vec<f64>,
}

/// A black-box function `f(a, x)` to maximize over a [`MixedSpace`].
pub trait Objective: Send + Sync {
    fn name(&self) -> &str;

    fn space(&self) -> &MixedSpace;

    /// Evaluate at discrete values `discrete` (one per discrete variable, in
    /// declaration order) and continuous point `continuous`.
    fn evaluate(&self, discrete: &[f64], continuous: &[f64]) -> Result<f64, EvalError>;

    fn known_optimum(&self) -> Option<&KnownOptimum> {
        None
    }

    /// Whether evaluations may run from several threads at once.
    fn concurrency_safe(&self) -> bool {
        true
    }
}

/// Objective backed by a closure.
pub struct FnObjective<F> {
    name: String,
    space: MixedSpace,
    optimum: Option<KnownOptimum>,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&[f64], &[f64]) -> Result<f64, EvalError> + Send + Sync,
{
    pub fn new(name: impl Into<String>, space: MixedSpace, f: F) -> Self {
        Self {
            name: name.into(),
            space,
            optimum: None,
            f,
        }
    }

    pub fn with_optimum(mut self, optimum: KnownOptimum) -> Self {
        self.optimum = Some(optimum);
        self
    }
}

impl<F> Objective for FnObjective<F>
where
    F: Fn(&[f64], &[f64]) -> Result<f64, EvalError> + Send + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn space(&self) -> &MixedSpace {
        &self.space
    }

    fn evaluate(&self, discrete: &[f64], continuous: &[f64]) -> Result<f64, EvalError> {
        (self.f)(discrete, continuous)
    }

    fn known_optimum(&self) -> Option<&KnownOptimum> {
        self.optimum.as_ref()
    }
}

/// Names accepted by [`synthetic`].
pub const SYNTHETIC_NAMES: [&str; 3] = ["shekel", "composition", "sine_permutation"];

/// Look up one of the built-in benchmark objectives by name.
pub fn synthetic(name: &str) -> Option<Box<dyn Objective>> {
    match name {
        "shekel" => Some(Box::new(Shekel::new())),
        "composition" => Some(Box::new(Composition::new())),
        "sine_permutation" => Some(Box::new(SinePermutation::new())),
        _ => None,
    }
}

pub(crate) fn check_arity(space: &MixedSpace, discrete: &[f64], continuous: &[f64]) -> Result<(), EvalError> {
    if discrete.len() != space.discrete().len() || continuous.len() != space.continuous().len() {
        return Err(EvalError::InvalidInput(format!(
            "expected {} discrete and {} continuous values, got {} and {}",
            space.discrete().len(),
            space.continuous().len(),
            discrete.len(),
            continuous.len()
        )));
    }
    Ok(())
}
