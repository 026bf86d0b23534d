use std::collections::VecDeque;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::continuous::ContinuousOptimizer;
use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::space::{from_unit_cube, to_unit_cube, ContinuousVar};

use super::acquisition::expected_improvement;
use super::design::latin_hypercube;
use super::gp::{GpConfig, GpModel};

/// Version tag written into serialized [`BoState`] payloads.
pub const BO_STATE_VERSION: u32 = 1;
const BO_STATE_FORMAT: &str = "hybridopt.bo_state";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoConfig {
    pub gp: GpConfig,
    /// Uniform candidates scored per suggestion.
    pub candidates: usize,
    /// Gaussian perturbations of the incumbent scored per suggestion.
    pub local_candidates: usize,
    /// Standard deviation of those perturbations, per unit-cube axis.
    pub local_scale: f64,
    /// Upper bound on observations the surrogate is fitted to. Beyond it the
    /// best half and the most recent remainder are kept.
    pub max_model_points: usize,
    /// Size of the initial space-filling design; `None` means `dim + 1`.
    pub initial_design: Option<usize>,
}

impl Default for BoConfig {
    fn default() -> Self {
        Self {
            gp: GpConfig::default(),
            candidates: 1024,
            local_candidates: 64,
            local_scale: 0.05,
            max_model_points: 100,
            initial_design: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incumbent {
    pub x: Vec<f64>,
    pub y: f64,
}

/// Ask/tell Bayesian optimizer over a continuous box.
///
/// Observations are stored in raw coordinates; the surrogate is refitted on
/// the unit-cube image of (a bounded subset of) them at every suggestion, so
/// the serialized state carries everything needed to resume bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoState {
    bounds: Vec<ContinuousVar>,
    config: BoConfig,
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    incumbent: Option<Incumbent>,
    init_design: VecDeque<Vec<f64>>,
    rng: StreamRng,
    eval_count: usize,
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    version: u32,
    state: T,
}

impl BoState {
    pub fn new(bounds: Vec<ContinuousVar>, config: BoConfig, mut rng: StreamRng) -> Self {
        let dim = bounds.len();
        let size = config.initial_design.unwrap_or(dim + 1);
        let init_design = latin_hypercube(size, dim, &mut rng)
            .into_iter()
            .map(|u| from_unit_cube(&u, &bounds).expect("design lies in the unit cube"))
            .collect();
        Self {
            bounds,
            config,
            inputs: Vec::new(),
            targets: Vec::new(),
            incumbent: None,
            init_design,
            rng,
            eval_count: 0,
        }
    }

    pub fn bounds(&self) -> &[ContinuousVar] {
        &self.bounds
    }

    pub fn config(&self) -> &BoConfig {
        &self.config
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn incumbent(&self) -> Option<&Incumbent> {
        self.incumbent.as_ref()
    }

    pub fn eval_count(&self) -> usize {
        self.eval_count
    }

    pub fn pending_design(&self) -> usize {
        self.init_design.len()
    }

    /// Indices of the observations the surrogate is fitted to.
    fn model_subset(&self) -> Vec<usize> {
        let n = self.targets.len();
        let cap = self.config.max_model_points.max(1);
        if n <= cap {
            return (0..n).collect();
        }
        let mut by_value: Vec<usize> = (0..n).collect();
        by_value.sort_by(|&a, &b| self.targets[b].total_cmp(&self.targets[a]).then(a.cmp(&b)));
        let mut keep = vec![false; n];
        for &i in by_value.iter().take(cap / 2) {
            keep[i] = true;
        }
        let mut kept = cap / 2;
        for i in (0..n).rev() {
            if kept == cap {
                break;
            }
            if !keep[i] {
                keep[i] = true;
                kept += 1;
            }
        }
        (0..n).filter(|&i| keep[i]).collect()
    }

    /// Surrogate fitted to the current observations.
    pub fn fit_model(&self) -> Result<GpModel> {
        if self.targets.is_empty() {
            return Ok(GpModel::empty());
        }
        let subset = self.model_subset();
        let points = subset
            .iter()
            .map(|&i| to_unit_cube(&self.inputs[i], &self.bounds))
            .collect::<Result<Vec<_>>>()?;
        let values: Vec<f64> = subset.iter().map(|&i| self.targets[i]).collect();
        GpModel::fit(&points, &values, &self.config.gp)
    }

    /// Next point to evaluate, in raw coordinates.
    pub fn suggest(&mut self) -> Result<Vec<f64>> {
        if let Some(x) = self.init_design.pop_front() {
            return Ok(x);
        }
        let dim = self.bounds.len();
        if dim == 0 {
            return Ok(Vec::new());
        }
        let model = self.fit_model()?;
        let best = self.incumbent.as_ref().map_or(f64::NEG_INFINITY, |inc| inc.y);

        let mut candidates: Vec<Vec<f64>> = (0..self.config.candidates)
            .map(|_| (0..dim).map(|_| self.rng.random::<f64>()).collect())
            .collect();
        if let Some(inc) = &self.incumbent {
            let centre = to_unit_cube(&inc.x, &self.bounds)?;
            for _ in 0..self.config.local_candidates {
                let p = centre
                    .iter()
                    .map(|&c| {
                        let step: f64 = self.rng.sample(StandardNormal);
                        (c + self.config.local_scale * step).clamp(0.0, 1.0)
                    })
                    .collect();
                candidates.push(p);
            }
        }

        let chosen = argmax_ei(&model, &candidates, best).unwrap_or(0);
        match candidates.get(chosen) {
            Some(u) => from_unit_cube(u, &self.bounds),
            // no candidates configured: fall back to one uniform draw
            None => {
                let u: Vec<f64> = (0..dim).map(|_| self.rng.random::<f64>()).collect();
                from_unit_cube(&u, &self.bounds)
            }
        }
    }

    /// Record that `x` scored `y`.
    pub fn observe(&mut self, x: Vec<f64>, y: f64) -> Result<()> {
        to_unit_cube(&x, &self.bounds)?;
        if !y.is_finite() {
            return Err(Error::InvalidArgument(format!("observed value must be finite, got {y}")));
        }
        if self.incumbent.as_ref().is_none_or(|inc| y > inc.y) {
            self.incumbent = Some(Incumbent { x: x.clone(), y });
        }
        self.inputs.push(x);
        self.targets.push(y);
        self.eval_count += 1;
        Ok(())
    }

    /// Versioned JSON encoding.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&Envelope {
            format: BO_STATE_FORMAT.to_string(),
            version: BO_STATE_VERSION,
            state: self,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Envelope<serde_json::Value> = serde_json::from_str(text)?;
        if env.format != BO_STATE_FORMAT {
            return Err(Error::InvalidArgument(format!("not a BO state payload: `{}`", env.format)));
        }
        if env.version != BO_STATE_VERSION {
            return Err(Error::Version {
                found: env.version,
                expected: BO_STATE_VERSION,
            });
        }
        let state: BoState = serde_json::from_value(env.state)?;
        state.validate()?;
        Ok(state)
    }

    pub fn serialize(&self) -> Result<Vec<u8>> {
        self.to_json().map(String::into_bytes)
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::from_json(text)
    }

    fn validate(&self) -> Result<()> {
        if self.inputs.len() != self.targets.len() || self.eval_count != self.targets.len() {
            return Err(Error::InvalidArgument("inconsistent observation counts".into()));
        }
        for x in self.inputs.iter().chain(&self.init_design) {
            to_unit_cube(x, &self.bounds)?;
        }
        let max = self.targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match &self.incumbent {
            Some(inc) if inc.y == max => Ok(()),
            None if self.targets.is_empty() => Ok(()),
            _ => Err(Error::InvalidArgument("incumbent does not match the best target".into())),
        }
    }
}

/// Index of the candidate with the largest expected improvement (first on ties).
pub fn argmax_ei(model: &GpModel, candidates: &[Vec<f64>], best: f64) -> Option<usize> {
    let mut chosen = None;
    let mut chosen_ei = f64::NEG_INFINITY;
    for (i, c) in candidates.iter().enumerate() {
        let (mean, var) = model.predict(c);
        let ei = expected_improvement(mean, var, best);
        if ei > chosen_ei {
            chosen_ei = ei;
            chosen = Some(i);
        }
    }
    chosen
}

impl ContinuousOptimizer for BoState {
    type Config = BoConfig;

    fn create(bounds: Vec<ContinuousVar>, config: &BoConfig, rng: StreamRng) -> Self {
        BoState::new(bounds, config.clone(), rng)
    }

    fn suggest(&mut self) -> Result<Vec<f64>> {
        BoState::suggest(self)
    }

    fn observe(&mut self, x: Vec<f64>, y: f64) -> Result<()> {
        BoState::observe(self, x, y)
    }

    fn best(&self) -> Option<(&[f64], f64)> {
        self.incumbent.as_ref().map(|inc| (inc.x.as_slice(), inc.y))
    }

    fn observation_count(&self) -> usize {
        self.eval_count
    }
}
