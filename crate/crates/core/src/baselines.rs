//! Comparison methods: random search, Bayesian optimization over a relaxed
//! box with rounding, and a gradient bandit over a fully discretized space.
//!
//! All three perform exactly one objective evaluation per iteration and emit
//! the same [`IterationRecord`]s as the hybrid optimizer, with the raw
//! objective value as the reward.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::{sample_index, ArmPolicy, GradientBandit};
use crate::bo::{BoConfig, BoState};
use crate::error::{Error, Result};
use crate::functions::Objective;
use crate::hybrid::{evaluate, BestSoFar, Evaluation, IterationRecord};
use crate::rng::{substream, BANDIT_STREAM, BASELINE_STREAM};
use crate::space::{ContinuousVar, DiscreteVar, MixedSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    RandomSearch,
    RoundedBo,
    DiscretizedBandit,
}

impl BaselineMethod {
    pub fn name(self) -> &'static str {
        match self {
            BaselineMethod::RandomSearch => "random_search",
            BaselineMethod::RoundedBo => "rounded_bo",
            BaselineMethod::DiscretizedBandit => "discretized_bandit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub method: BaselineMethod,
    pub iters: usize,
    pub seed: u64,
    /// Bins per continuous variable (discretized bandit only).
    pub bins: usize,
    /// Bandit step size (discretized bandit only).
    pub alpha: f64,
    pub bo: BoConfig,
}

impl BaselineConfig {
    pub fn new(method: BaselineMethod, iters: usize, seed: u64) -> Self {
        Self {
            method,
            iters,
            seed,
            bins: 11,
            alpha: 0.1,
            bo: BoConfig::default(),
        }
    }

    fn validate(&self, space: &MixedSpace) -> Result<()> {
        if self.iters == 0 {
            return Err(Error::InvalidArgument("iters must be at least 1".into()));
        }
        if self.method == BaselineMethod::DiscretizedBandit && !space.continuous().is_empty() && self.bins < 2 {
            return Err(Error::InvalidArgument(format!("bins must be at least 2, got {}", self.bins)));
        }
        Ok(())
    }
}

type Sink<'s> = &'s mut dyn FnMut(&IterationRecord) -> Result<()>;

/// Tracks the running best and numbers iterations before handing each
/// record to the sink.
struct Recorder<'s> {
    space: MixedSpace,
    best: Option<BestSoFar>,
    t: usize,
    sink: Sink<'s>,
}

impl<'s> Recorder<'s> {
    fn new(space: &MixedSpace, sink: Sink<'s>) -> Self {
        Self {
            space: space.clone(),
            best: None,
            t: 0,
            sink,
        }
    }

    fn push(&mut self, discrete: Vec<f64>, x: Vec<f64>, value: f64, pi_selected: Option<f64>) -> Result<()> {
        let arm = self.space.arm_for_values(&discrete).ok_or_else(|| {
            Error::InvalidArgument(format!("discrete values {discrete:?} are not an arm of the space"))
        })?;
        BestSoFar::offer(&mut self.best, &discrete, &x, value);
        let best = self.best.as_ref().expect("just offered");
        let t = self.t;
        self.t += 1;
        let record = IterationRecord {
            t,
            arm,
            evals: vec![Evaluation { x, value }],
            reward: value,
            pi_selected,
            eval_index: t + 1,
            best_so_far: best.value,
            best_arm: best.arm.clone(),
            best_x: best.x.clone(),
        };
        (self.sink)(&record)
    }
}

pub fn run(objective: &dyn Objective, config: &BaselineConfig) -> Result<Vec<IterationRecord>> {
    let mut records = Vec::with_capacity(config.iters);
    run_with(objective, config, |r| {
        records.push(r.clone());
        Ok(())
    })?;
    Ok(records)
}

/// Like [`run`], but hands every record to `on_record` as soon as it exists.
pub fn run_with<F: FnMut(&IterationRecord) -> Result<()>>(
    objective: &dyn Objective,
    config: &BaselineConfig,
    mut on_record: F,
) -> Result<()> {
    let space = objective.space();
    config.validate(space)?;
    let mut rec = Recorder::new(space, &mut on_record);
    match config.method {
        BaselineMethod::RandomSearch => random_search_into(objective, config, &mut rec),
        BaselineMethod::RoundedBo => rounded_bo_into(objective, config, &mut rec),
        BaselineMethod::DiscretizedBandit => discretized_bandit_into(objective, config, &mut rec),
    }
}

fn with_method(config: &BaselineConfig, method: BaselineMethod) -> BaselineConfig {
    BaselineConfig { method, ..config.clone() }
}

/// Uniform arm, uniform continuous point, every iteration.
pub fn random_search(objective: &dyn Objective, config: &BaselineConfig) -> Result<Vec<IterationRecord>> {
    run(objective, &with_method(config, BaselineMethod::RandomSearch))
}

/// Bayesian optimization on the box where every discrete variable is relaxed
/// to `[min, max]` of its domain; discrete coordinates are rounded to the
/// nearest domain member before evaluation, while the surrogate sees the
/// unrounded suggestion.
pub fn rounded_bo(objective: &dyn Objective, config: &BaselineConfig) -> Result<Vec<IterationRecord>> {
    run(objective, &with_method(config, BaselineMethod::RoundedBo))
}

/// Gradient bandit over the fully discretized space, rewarded with the raw
/// objective value of each pull.
pub fn discretized_bandit(objective: &dyn Objective, config: &BaselineConfig) -> Result<Vec<IterationRecord>> {
    run(objective, &with_method(config, BaselineMethod::DiscretizedBandit))
}

fn random_search_into(objective: &dyn Objective, config: &BaselineConfig, rec: &mut Recorder) -> Result<()> {
    let space = objective.space();
    let arm_count = usize::try_from(space.arm_count())
        .map_err(|_| Error::ArmCapExceeded { product: space.arm_count(), cap: usize::MAX as u128 })?;
    let mut rng = substream(config.seed, BASELINE_STREAM);
    for t in 0..config.iters {
        let arm = space.arm_at(rng.random_range(0..arm_count)).expect("index below arm count");
        let x: Vec<f64> = space
            .continuous()
            .iter()
            .map(|v| v.lower() + rng.random::<f64>() * v.width())
            .collect();
        let value = evaluate(objective, &arm.values, &x, t)?;
        rec.push(arm.values, x, value, None)?;
    }
    Ok(())
}

fn rounded_bo_into(objective: &dyn Objective, config: &BaselineConfig, rec: &mut Recorder) -> Result<()> {
    let space = objective.space();
    // single-valued domains cannot form an interval; they stay fixed
    let relaxed: Vec<&DiscreteVar> = space.discrete().iter().filter(|v| v.domain().len() > 1).collect();
    let mut bounds: Vec<ContinuousVar> = relaxed
        .iter()
        .map(|v| ContinuousVar::new(v.name(), v.min(), v.max()))
        .collect::<Result<_>>()?;
    bounds.extend(space.continuous().iter().cloned());

    let mut bo = BoState::new(bounds, config.bo.clone(), substream(config.seed, BASELINE_STREAM));
    for t in 0..config.iters {
        let suggestion = bo.suggest()?;
        let discrete = round_relaxed(space, &suggestion[..relaxed.len()]);
        let x = suggestion[relaxed.len()..].to_vec();
        let value = evaluate(objective, &discrete, &x, t)?;
        bo.observe(suggestion, value)?;
        rec.push(discrete, x, value, None)?;
    }
    Ok(())
}

/// Map relaxed coordinates (one per multi-valued discrete variable) back to
/// a full discrete assignment.
pub fn round_relaxed(space: &MixedSpace, relaxed: &[f64]) -> Vec<f64> {
    let mut coords = relaxed.iter();
    space
        .discrete()
        .iter()
        .map(|var| {
            if var.domain().len() > 1 {
                var.round(*coords.next().expect("one coordinate per relaxed variable"))
            } else {
                var.min()
            }
        })
        .collect()
}

/// Space in which every continuous variable is replaced by `bins` equally
/// spaced values, appended after the original discrete variables.
pub fn discretized_space(space: &MixedSpace, bins: usize) -> Result<MixedSpace> {
    let mut discrete = space.discrete().to_vec();
    for var in space.continuous() {
        discrete.push(var.discretize(bins)?);
    }
    MixedSpace::new(discrete, Vec::new())
}

fn discretized_bandit_into(objective: &dyn Objective, config: &BaselineConfig, rec: &mut Recorder) -> Result<()> {
    let space = objective.space();
    let full = discretized_space(space, config.bins)?;
    let arms = full.enumerate_arms()?;
    let mut bandit = GradientBandit::new(arms.len(), config.alpha)?;
    let mut rng = substream(config.seed, BANDIT_STREAM);
    let split = space.discrete().len();
    for t in 0..config.iters {
        let pi = bandit.probabilities();
        let action = sample_index(&pi, rng.random::<f64>());
        let values = &arms[action].values;
        let (discrete, x) = values.split_at(split);
        let value = evaluate(objective, discrete, x, t)?;
        bandit.update(action, value)?;
        rec.push(discrete.to_vec(), x.to_vec(), value, Some(pi[action]))?;
    }
    Ok(())
}
