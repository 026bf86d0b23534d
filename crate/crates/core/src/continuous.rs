//! Pluggable continuous optimizers for a fixed arm.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::space::{to_unit_cube, ContinuousVar};

/// Stateful ask/tell optimizer over a continuous box.
pub trait ContinuousOptimizer {
    type Config: Clone;

    fn create(bounds: Vec<ContinuousVar>, config: &Self::Config, rng: StreamRng) -> Self;

    fn suggest(&mut self) -> Result<Vec<f64>>;

    fn observe(&mut self, x: Vec<f64>, y: f64) -> Result<()>;

    /// Best point observed so far and its value.
    fn best(&self) -> Option<(&[f64], f64)>;

    fn observation_count(&self) -> usize;
}

/// Uniform random sampling in the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomContinuous {
    bounds: Vec<ContinuousVar>,
    rng: StreamRng,
    best_x: Vec<f64>,
    best_y: Option<f64>,
    count: usize,
}

impl ContinuousOptimizer for RandomContinuous {
    type Config = ();

    fn create(bounds: Vec<ContinuousVar>, _: &(), rng: StreamRng) -> Self {
        Self {
            bounds,
            rng,
            best_x: Vec::new(),
            best_y: None,
            count: 0,
        }
    }

    fn suggest(&mut self) -> Result<Vec<f64>> {
        Ok(self
            .bounds
            .iter()
            .map(|b| b.lower() + self.rng.random::<f64>() * b.width())
            .collect())
    }

    fn observe(&mut self, x: Vec<f64>, y: f64) -> Result<()> {
        to_unit_cube(&x, &self.bounds)?;
        if !y.is_finite() {
            return Err(Error::InvalidArgument(format!("observed value must be finite, got {y}")));
        }
        if self.best_y.is_none_or(|b| y > b) {
            self.best_y = Some(y);
            self.best_x = x;
        }
        self.count += 1;
        Ok(())
    }

    fn best(&self) -> Option<(&[f64], f64)> {
        self.best_y.map(|y| (self.best_x.as_slice(), y))
    }

    fn observation_count(&self) -> usize {
        self.count
    }
}
