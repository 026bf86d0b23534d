//! Mixed discrete/continuous search spaces.
//!
//! A [`MixedSpace`] is an ordered list of discrete variables (each with a
//! finite, strictly increasing numeric domain) and an ordered list of
//! continuous box-bounded variables. Every complete assignment of the
//! discrete variables is an [`Arm`]; arms are enumerated lexicographically
//! in declaration order so their indices are stable across runs.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the number of arms [`MixedSpace::enumerate_arms`]
/// will materialize.
pub const DEFAULT_ARM_CAP: u128 = 1_000_000;

const BOUNDS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDiscreteVar")]
pub struct DiscreteVar {
    name: String,
    domain: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDiscreteVar {
    name: String,
    domain: Vec<f64>,
}

impl TryFrom<RawDiscreteVar> for DiscreteVar {
    type Error = Error;
    fn try_from(raw: RawDiscreteVar) -> Result<Self> {
        DiscreteVar::new(raw.name, raw.domain)
    }
}

impl DiscreteVar {
    /// Domain must be non-empty, finite and strictly increasing.
    pub fn new(name: impl Into<String>, domain: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if domain.is_empty() {
            return Err(Error::InvalidSpace(format!("discrete variable `{name}` has an empty domain")));
        }
        if domain.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpace(format!("discrete variable `{name}` has a non-finite domain value")));
        }
        if domain.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpace(format!(
                "domain of `{name}` must be strictly increasing without duplicates"
            )));
        }
        Ok(Self { name, domain })
    }

    /// Integer domain `lo..=hi`.
    pub fn integers(name: impl Into<String>, lo: i64, hi: i64) -> Result<Self> {
        Self::new(name, (lo..=hi).map(|v| v as f64).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &[f64] {
        &self.domain
    }

    pub fn min(&self) -> f64 {
        self.domain[0]
    }

    pub fn max(&self) -> f64 {
        self.domain[self.domain.len() - 1]
    }

    pub fn position(&self, value: f64) -> Option<usize> {
        self.domain.iter().position(|&d| d == value)
    }

    pub fn contains(&self, value: f64) -> bool {
        self.position(value).is_some()
    }

    /// Nearest domain member to `value`; ties go to the smaller member.
    pub fn round(&self, value: f64) -> f64 {
        let mut best = self.domain[0];
        let mut best_dist = (best - value).abs();
        for &d in &self.domain[1..] {
            let dist = (d - value).abs();
            // strict comparison keeps the lower member on ties
            if dist < best_dist {
                best = d;
                best_dist = dist;
            }
        }
        best
    }
}

/// Free-function form of [`DiscreteVar::round`].
pub fn round_to_domain(value: f64, var: &DiscreteVar) -> f64 {
    var.round(value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawContinuousVar")]
pub struct ContinuousVar {
    name: String,
    lower: f64,
    upper: f64,
}

#[derive(Deserialize)]
struct RawContinuousVar {
    name: String,
    lower: f64,
    upper: f64,
}

impl TryFrom<RawContinuousVar> for ContinuousVar {
    type Error = Error;
    fn try_from(raw: RawContinuousVar) -> Result<Self> {
        ContinuousVar::new(raw.name, raw.lower, raw.upper)
    }
}

impl ContinuousVar {
    pub fn new(name: impl Into<String>, lower: f64, upper: f64) -> Result<Self> {
        let name = name.into();
        if !lower.is_finite() || !upper.is_finite() || lower >= upper {
            return Err(Error::InvalidSpace(format!(
                "continuous variable `{name}` needs finite bounds with lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Self { name, lower, upper })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// `k` equally spaced values covering the interval; `k == 1` gives the midpoint.
    pub fn discretize(&self, k: usize) -> Result<DiscreteVar> {
        discretize_continuous(self, k)
    }
}

pub fn discretize_continuous(var: &ContinuousVar, k: usize) -> Result<DiscreteVar> {
    let domain = match k {
        0 => return Err(Error::InvalidArgument("discretization needs at least one bin".into())),
        1 => vec![0.5 * (var.lower + var.upper)],
        _ => {
            let step = var.width() / (k - 1) as f64;
            let mut values: Vec<f64> = (0..k).map(|i| var.lower + step * i as f64).collect();
            values[k - 1] = var.upper;
            values
        }
    };
    DiscreteVar::new(var.name.clone(), domain)
}

/// One complete assignment of the discrete variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    pub index: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMixedSpace")]
pub struct MixedSpace {
    #[serde(default)]
    discrete: Vec<DiscreteVar>,
    #[serde(default)]
    continuous: Vec<ContinuousVar>,
}

#[derive(Deserialize)]
struct RawMixedSpace {
    #[serde(default)]
    discrete: Vec<DiscreteVar>,
    #[serde(default)]
    continuous: Vec<ContinuousVar>,
}

impl TryFrom<RawMixedSpace> for MixedSpace {
    type Error = Error;
    fn try_from(raw: RawMixedSpace) -> Result<Self> {
        MixedSpace::new(raw.discrete, raw.continuous)
    }
}

impl MixedSpace {
    pub fn new(discrete: Vec<DiscreteVar>, continuous: Vec<ContinuousVar>) -> Result<Self> {
        if discrete.is_empty() && continuous.is_empty() {
            return Err(Error::InvalidSpace("space has no variables".into()));
        }
        let mut seen = HashSet::new();
        for name in discrete.iter().map(|v| v.name()).chain(continuous.iter().map(|v| v.name())) {
            if !seen.insert(name) {
                return Err(Error::InvalidSpace(format!("duplicate variable name `{name}`")));
            }
        }
        Ok(Self { discrete, continuous })
    }

    pub fn discrete(&self) -> &[DiscreteVar] {
        &self.discrete
    }

    pub fn continuous(&self) -> &[ContinuousVar] {
        &self.continuous
    }

    pub fn continuous_dim(&self) -> usize {
        self.continuous.len()
    }

    /// Product of the discrete domain sizes (saturating).
    pub fn arm_count(&self) -> u128 {
        self.discrete
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(v.domain.len() as u128))
    }

    pub fn enumerate_arms(&self) -> Result<Vec<Arm>> {
        self.enumerate_arms_with_cap(DEFAULT_ARM_CAP)
    }

    /// Cartesian product of the discrete domains in lexicographic order of
    /// declaration (last variable varies fastest).
    pub fn enumerate_arms_with_cap(&self, cap: u128) -> Result<Vec<Arm>> {
        let product = self.arm_count();
        if product > cap {
            return Err(Error::ArmCapExceeded { product, cap });
        }
        let count = product as usize;
        let mut arms = Vec::with_capacity(count);
        let mut digits = vec![0usize; self.discrete.len()];
        for index in 0..count {
            let values = digits
                .iter()
                .zip(&self.discrete)
                .map(|(&d, var)| var.domain[d])
                .collect();
            arms.push(Arm { index, values });
            for pos in (0..digits.len()).rev() {
                digits[pos] += 1;
                if digits[pos] < self.discrete[pos].domain.len() {
                    break;
                }
                digits[pos] = 0;
            }
        }
        Ok(arms)
    }

    /// The arm holding exactly these discrete values, with its enumeration index.
    pub fn arm_for_values(&self, values: &[f64]) -> Option<Arm> {
        if values.len() != self.discrete.len() {
            return None;
        }
        let mut index = 0usize;
        for (var, &v) in self.discrete.iter().zip(values) {
            let pos = var.position(v)?;
            index = index.checked_mul(var.domain.len())?.checked_add(pos)?;
        }
        Some(Arm {
            index,
            values: values.to_vec(),
        })
    }

    /// Arm with enumeration index `index`, decoded without enumerating.
    pub fn arm_at(&self, index: usize) -> Option<Arm> {
        if index as u128 >= self.arm_count() {
            return None;
        }
        let mut rest = index;
        let mut values = vec![0.0; self.discrete.len()];
        for (slot, var) in values.iter_mut().zip(&self.discrete).rev() {
            let len = var.domain.len();
            *slot = var.domain[rest % len];
            rest /= len;
        }
        Some(Arm { index, values })
    }

    pub fn lower_bounds(&self) -> Vec<f64> {
        self.continuous.iter().map(|v| v.lower).collect()
    }

    pub fn upper_bounds(&self) -> Vec<f64> {
        self.continuous.iter().map(|v| v.upper).collect()
    }

    /// Whether the discrete values lie in their domains and the continuous
    /// point lies in the box.
    pub fn contains(&self, discrete: &[f64], continuous: &[f64]) -> bool {
        discrete.len() == self.discrete.len()
            && continuous.len() == self.continuous.len()
            && self.discrete.iter().zip(discrete).all(|(var, &v)| var.contains(v))
            && self
                .continuous
                .iter()
                .zip(continuous)
                .all(|(var, &x)| x >= var.lower && x <= var.upper)
    }

    pub fn to_unit_cube(&self, x: &[f64]) -> Result<Vec<f64>> {
        to_unit_cube(x, &self.continuous)
    }

    pub fn from_unit_cube(&self, u: &[f64]) -> Result<Vec<f64>> {
        from_unit_cube(u, &self.continuous)
    }
}

/// Affine map of a point in the box onto `[0, 1]^d`.
pub fn to_unit_cube(x: &[f64], vars: &[ContinuousVar]) -> Result<Vec<f64>> {
    if x.len() != vars.len() {
        return Err(Error::OutOfBounds(format!(
            "expected {} coordinates, got {}",
            vars.len(),
            x.len()
        )));
    }
    x.iter()
        .zip(vars)
        .map(|(&xi, var)| {
            if !xi.is_finite() || xi < var.lower - BOUNDS_TOL || xi > var.upper + BOUNDS_TOL {
                return Err(Error::OutOfBounds(format!(
                    "`{}` = {xi} outside [{}, {}]",
                    var.name, var.lower, var.upper
                )));
            }
            Ok(((xi - var.lower) / var.width()).clamp(0.0, 1.0))
        })
        .collect()
}

pub fn from_unit_cube(u: &[f64], vars: &[ContinuousVar]) -> Result<Vec<f64>> {
    if u.len() != vars.len() {
        return Err(Error::OutOfBounds(format!(
            "expected {} coordinates, got {}",
            vars.len(),
            u.len()
        )));
    }
    u.iter()
        .zip(vars)
        .map(|(&ui, var)| {
            if !ui.is_finite() || !(-BOUNDS_TOL..=1.0 + BOUNDS_TOL).contains(&ui) {
                return Err(Error::OutOfBounds(format!("unit coordinate {ui} outside [0, 1]")));
            }
            let ui = ui.clamp(0.0, 1.0);
            // exact endpoints avoid lower + 1.0 * width drifting past upper
            Ok(if ui == 1.0 { var.upper } else { var.lower + ui * var.width() })
        })
        .collect()
}
