//! Gradient bandit with softmax action selection.
//!
//! Preferences `H(a)` map to probabilities `pi(a) = exp H(a) / sum_b exp H(b)`.
//! After playing `A` and receiving `R`, the baseline `R_bar` is first
//! updated to include `R`, then
//!
//! ```text
//! H(A) += alpha (R - R_bar) (1 - pi(A))
//! H(a) -= alpha (R - R_bar) pi(a)          for a != A
//! ```
//!
//! using `pi` from before the update. Because the baseline already contains
//! the current reward, the very first update leaves `H` unchanged.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Action-selection policy over a fixed, densely indexed set of arms.
pub trait ArmPolicy {
    fn arm_count(&self) -> usize;

    fn probabilities(&self) -> Vec<f64>;

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.probabilities(), rng.random::<f64>())
    }

    fn update(&mut self, action: usize, reward: f64) -> Result<()>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBandit {
    preferences: Vec<f64>,
    step: u64,
    mean_reward: f64,
    alpha: f64,
}

impl GradientBandit {
    pub fn new(arms: usize, alpha: f64) -> Result<Self> {
        if arms == 0 {
            return Err(Error::InvalidArgument("bandit needs at least one arm".into()));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {alpha}")));
        }
        Ok(Self {
            preferences: vec![0.0; arms],
            step: 0,
            mean_reward: 0.0,
            alpha,
        })
    }

    pub fn from_preferences(preferences: Vec<f64>, alpha: f64) -> Result<Self> {
        let mut b = Self::new(preferences.len(), alpha)?;
        if preferences.iter().any(|h| !h.is_finite()) {
            return Err(Error::InvalidArgument("preferences must be finite".into()));
        }
        b.preferences = preferences;
        Ok(b)
    }

    pub fn preferences(&self) -> &[f64] {
        &self.preferences
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn mean_reward(&self) -> f64 {
        self.mean_reward
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl ArmPolicy for GradientBandit {
    fn arm_count(&self) -> usize {
        self.preferences.len()
    }

    fn probabilities(&self) -> Vec<f64> {
        softmax(&self.preferences)
    }

    fn update(&mut self, action: usize, reward: f64) -> Result<()> {
        if !reward.is_finite() {
            return Err(Error::InvalidArgument(format!("reward must be finite, got {reward}")));
        }
        if action >= self.preferences.len() {
            return Err(Error::InvalidArgument(format!(
                "action {action} out of range for {} arms",
                self.preferences.len()
            )));
        }
        let pi = self.probabilities();
        self.step += 1;
        self.mean_reward += (reward - self.mean_reward) / self.step as f64;
        let advantage = self.alpha * (reward - self.mean_reward);
        for (a, (h, p)) in self.preferences.iter_mut().zip(&pi).enumerate() {
            if a == action {
                *h += advantage * (1.0 - p);
            } else {
                *h -= advantage * p;
            }
        }
        Ok(())
    }
}

/// Max-subtracted softmax.
pub fn softmax(h: &[f64]) -> Vec<f64> {
    let max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = h.iter().map(|&v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Inverse-CDF draw: the first index whose cumulative probability exceeds `u`.
pub fn sample_index(probabilities: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probabilities.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left the total just under u; fall back to the last arm with mass
    probabilities.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}
