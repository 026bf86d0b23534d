//! The hybrid optimizer loop.
//!
//! Each iteration:
//!
//! 1. compute softmax probabilities over arms and sample an arm;
//! 2. fetch that arm's cached continuous optimizer, or create one;
//! 3. run `n` suggest / evaluate / observe cycles on it;
//! 4. reward = best value the arm has produced over all its visits;
//! 5. update the bandit with that reward;
//! 6. stop once the same (arm, reward) pair shows up `m` times within the
//!    last `T` iterations, or after `max_iters`.

use std::collections::{BTreeMap, VecDeque};
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::{sample_index, ArmPolicy, GradientBandit};
use crate::bo::{BoConfig, BoState};
use crate::continuous::ContinuousOptimizer;
use crate::error::{Error, EvalError, Result};
use crate::functions::Objective;
use crate::rng::{arm_stream, substream, StreamRng, BANDIT_STREAM};
use crate::space::Arm;

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    /// Required repetitions of one (arm, reward) pair.
    pub m: usize,
    /// Number of most recent iterations inspected.
    pub window: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { m: 10, window: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HybridConfig {
    /// Continuous-optimizer steps per bandit iteration.
    pub n: usize,
    pub alpha: f64,
    /// `None` runs to `max_iters`.
    pub stop: Option<StopRule>,
    pub max_iters: usize,
    pub seed: u64,
    /// Rewards closer than this count as equal for the stop rule.
    pub reward_tolerance: f64,
    pub bo: BoConfig,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            n: 3,
            alpha: 0.1,
            stop: Some(StopRule::default()),
            max_iters: 1000,
            seed: 0,
            reward_tolerance: 0.0,
            bo: BoConfig::default(),
        }
    }
}

impl HybridConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.reward_tolerance >= 0.0) {
            return bad(format!("reward_tolerance must be non-negative, got {}", self.reward_tolerance));
        }
        if let Some(rule) = &self.stop {
            if rule.m == 0 || rule.window == 0 || rule.m > rule.window {
                return bad(format!("stop rule needs 1 <= m <= T, got m={} T={}", rule.m, rule.window));
            }
        }
        Ok(())
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Everything that happened in one iteration of an optimizer loop.
///
/// Shared by the hybrid optimizer and the baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    pub arm: Arm,
    pub evals: Vec<Evaluation>,
    pub reward: f64,
    /// Probability of the chosen arm before the update (bandit methods only).
    pub pi_selected: Option<f64>,
    /// Objective evaluations performed so far, including this iteration's.
    pub eval_index: usize,
    pub best_so_far: f64,
    pub best_arm: Vec<f64>,
    pub best_x: Vec<f64>,
}

impl IterationRecord {
    /// This iteration's best evaluation.
    pub fn best_eval(&self) -> &Evaluation {
        self.evals
            .iter()
            .reduce(|a, b| if b.value > a.value { b } else { a })
            .expect("every iteration evaluates at least once")
    }
}

/// Running best over a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct BestSoFar {
    pub value: f64,
    pub arm: Vec<f64>,
    pub x: Vec<f64>,
}

impl BestSoFar {
    pub(crate) fn offer(best: &mut Option<BestSoFar>, arm: &[f64], x: &[f64], value: f64) {
        if best.as_ref().is_none_or(|b| value > b.value) {
            *best = Some(BestSoFar {
                value,
                arm: arm.to_vec(),
                x: x.to_vec(),
            });
        }
    }
}

pub(crate) fn evaluate(objective: &dyn Objective, arm: &[f64], x: &[f64], iteration: usize) -> Result<f64> {
    let value = objective
        .evaluate(arm, x)
        .and_then(|v| if v.is_finite() { Ok(v) } else { Err(EvalError::NonFinite(v)) })
        .map_err(|source| Error::Evaluation { iteration, source })?;
    Ok(value)
}

/// Per-arm continuous optimizer states.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmCache<C> {
    entries: BTreeMap<usize, C>,
}

impl<C> Default for ArmCache<C> {
    fn default() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }
}

impl<C> ArmCache<C> {
    pub fn get(&self, arm: usize) -> Option<&C> {
        self.entries.get(&arm)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &C)> {
        self.entries.iter().map(|(&k, v)| (k, v))
    }
}

/// Best value an arm's optimizer has observed across all its visits.
pub fn reward_of<C: ContinuousOptimizer>(entry: &C) -> Result<f64> {
    entry
        .best()
        .map(|(_, y)| y)
        .ok_or_else(|| Error::InvalidArgument("arm has no observations yet".into()))
}

/// True iff some (arm, reward) pair occurs at least `rule.m` times among the
/// last `rule.window` entries of `history`.
pub fn should_stop(history: &[(usize, f64)], rule: &StopRule, tolerance: f64) -> bool {
    let recent = &history[history.len().saturating_sub(rule.window)..];
    recent.iter().any(|&(arm, reward)| {
        recent
            .iter()
            .filter(|&&(a, r)| a == arm && (r - reward).abs() <= tolerance)
            .count()
            >= rule.m
    })
}

/// Runs the hybrid loop for one objective.
pub struct HybridOptimizer<'a, C: ContinuousOptimizer = BoState> {
    objective: &'a dyn Objective,
    arms: Vec<Arm>,
    config: HybridConfig,
    optimizer_config: C::Config,
    bandit: GradientBandit,
    sampler: StreamRng,
    cache: ArmCache<C>,
    t: usize,
    evaluations: usize,
    best: Option<BestSoFar>,
    recent: VecDeque<(usize, f64)>,
}

impl<'a> HybridOptimizer<'a, BoState> {
    pub fn new(objective: &'a dyn Objective, config: HybridConfig) -> Result<Self> {
        let bo = config.bo.clone();
        Self::with_optimizer(objective, config, bo)
    }
}

impl<'a, C: ContinuousOptimizer> HybridOptimizer<'a, C> {
    pub fn with_optimizer(objective: &'a dyn Objective, config: HybridConfig, optimizer_config: C::Config) -> Result<Self> {
        config.validate()?;
        let arms = objective.space().enumerate_arms()?;
        let bandit = GradientBandit::new(arms.len(), config.alpha)?;
        let sampler = substream(config.seed, BANDIT_STREAM);
        Ok(Self {
            objective,
            arms,
            config,
            optimizer_config,
            bandit,
            sampler,
            cache: ArmCache::default(),
            t: 0,
            evaluations: 0,
            best: None,
            recent: VecDeque::new(),
        })
    }

    pub fn arms(&self) -> &[Arm] {
        &self.arms
    }

    pub fn bandit(&self) -> &GradientBandit {
        &self.bandit
    }

    pub fn cache(&self) -> &ArmCache<C> {
        &self.cache
    }

    pub fn config(&self) -> &HybridConfig {
        &self.config
    }

    /// Completed iterations.
    pub fn iterations(&self) -> usize {
        self.t
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Best (value, discrete values, continuous point) seen so far.
    pub fn best(&self) -> Option<(f64, &[f64], &[f64])> {
        self.best.as_ref().map(|b| (b.value, b.arm.as_slice(), b.x.as_slice()))
    }

    pub fn step(&mut self) -> Result<IterationRecord> {
        let t = self.t;
        let pi = self.bandit.probabilities();
        let action = sample_index(&pi, self.sampler.random::<f64>());
        let arm = self.arms[action].clone();

        let bounds = self.objective.space().continuous().to_vec();
        let seed = self.config.seed;
        let entry = self
            .cache
            .entries
            .entry(action)
            .or_insert_with(|| C::create(bounds, &self.optimizer_config, arm_stream(seed, action)));

        let mut evals = Vec::with_capacity(self.config.n);
        for _ in 0..self.config.n {
            let x = entry.suggest()?;
            let value = evaluate(self.objective, &arm.values, &x, t)?;
            entry.observe(x.clone(), value)?;
            self.evaluations += 1;
            BestSoFar::offer(&mut self.best, &arm.values, &x, value);
            evals.push(Evaluation { x, value });
        }
        let reward = reward_of(entry)?;
        self.bandit.update(action, reward)?;

        if let Some(rule) = &self.config.stop {
            self.recent.push_back((action, reward));
            while self.recent.len() > rule.window {
                self.recent.pop_front();
            }
        }
        self.t += 1;

        let best = self.best.as_ref().expect("at least one evaluation happened");
        Ok(IterationRecord {
            t,
            arm,
            evals,
            reward,
            pi_selected: Some(pi[action]),
            eval_index: self.evaluations,
            best_so_far: best.value,
            best_arm: best.arm.clone(),
            best_x: best.x.clone(),
        })
    }

    /// Whether the stop rule fires on the iterations run so far.
    pub fn stop_triggered(&self) -> bool {
        match &self.config.stop {
            Some(rule) => {
                let history: Vec<(usize, f64)> = self.recent.iter().copied().collect();
                should_stop(&history, rule, self.config.reward_tolerance)
            }
            None => false,
        }
    }

    /// Iterate until the stop rule fires or `max_iters` iterations are done
    /// in total, calling `on_record` after every iteration.
    pub fn run_with<F: FnMut(&IterationRecord) -> Result<()>>(&mut self, mut on_record: F) -> Result<()> {
        while self.t < self.config.max_iters {
            let record = self.step()?;
            on_record(&record)?;
            if self.stop_triggered() {
                break;
            }
        }
        Ok(())
    }

    pub fn run(&mut self) -> Result<Vec<IterationRecord>> {
        let mut records = Vec::new();
        self.run_with(|r| {
            records.push(r.clone());
            Ok(())
        })?;
        Ok(records)
    }
}

/// Run a fresh hybrid optimization with Bayesian optimization per arm.
pub fn run(objective: &dyn Objective, config: HybridConfig) -> Result<Vec<IterationRecord>> {
    HybridOptimizer::new(objective, config)?.run()
}

#[derive(Serialize, Deserialize)]
struct LoopState {
    format: String,
    version: u32,
    config: HybridConfig,
    arm_count: usize,
    bandit: GradientBandit,
    sampler: StreamRng,
    t: usize,
    evaluations: usize,
    best: Option<BestSoFar>,
    recent: Vec<(usize, f64)>,
}

impl<'a> HybridOptimizer<'a, BoState> {
    /// Write the loop state to `dir/state.json` and every arm's optimizer to
    /// `dir/cache/arm_<index>.json`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let cache_dir = dir.join("cache");
        fs::create_dir_all(&cache_dir).map_err(|e| Error::io(&cache_dir, e))?;
        for (index, state) in self.cache.iter() {
            let path = cache_dir.join(format!("arm_{index}.json"));
            fs::write(&path, state.to_json()?).map_err(|e| Error::io(&path, e))?;
        }
        let state = LoopState {
            format: "hybridopt.hybrid_state".into(),
            version: CHECKPOINT_VERSION,
            config: self.config.clone(),
            arm_count: self.arms.len(),
            bandit: self.bandit.clone(),
            sampler: self.sampler.clone(),
            t: self.t,
            evaluations: self.evaluations,
            best: self.best.clone(),
            recent: self.recent.iter().copied().collect(),
        };
        let path = dir.join("state.json");
        fs::write(&path, serde_json::to_string(&state)?).map_err(|e| Error::io(&path, e))
    }

    /// Rebuild an optimizer saved by [`HybridOptimizer::save`].
    pub fn load(objective: &'a dyn Objective, dir: &Path) -> Result<Self> {
        let path = dir.join("state.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let state: LoopState = serde_json::from_str(&text)?;
        if state.version != CHECKPOINT_VERSION {
            return Err(Error::Version {
                found: state.version,
                expected: CHECKPOINT_VERSION,
            });
        }
        let mut opt = Self::new(objective, state.config)?;
        if opt.arms.len() != state.arm_count || state.bandit.arm_count() != state.arm_count {
            return Err(Error::InvalidArgument(format!(
                "checkpoint has {} arms but the objective has {}",
                state.arm_count,
                opt.arms.len()
            )));
        }
        opt.bandit = state.bandit;
        opt.sampler = state.sampler;
        opt.t = state.t;
        opt.evaluations = state.evaluations;
        opt.best = state.best;
        opt.recent = state.recent.into();

        let cache_dir = dir.join("cache");
        if cache_dir.is_dir() {
            let entries = fs::read_dir(&cache_dir).map_err(|e| Error::io(&cache_dir, e))?;
            for entry in entries {
                let path = entry.map_err(|e| Error::io(&cache_dir, e))?.path();
                let Some(index) = path
                    .file_name()
                    .and_then(|n| n.to_str())
                    .and_then(|n| n.strip_prefix("arm_"))
                    .and_then(|n| n.strip_suffix(".json"))
                    .and_then(|n| n.parse::<usize>().ok())
                else {
                    continue;
                };
                if index >= opt.arms.len() {
                    return Err(Error::InvalidArgument(format!("cache entry for unknown arm {index}")));
                }
                let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                opt.cache.entries.insert(index, BoState::from_json(&text)?);
            }
        }
        Ok(opt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuous::RandomContinuous;
    use crate::functions::{Composition, FnObjective};
    use crate::space::{ContinuousVar, DiscreteVar, MixedSpace};

    fn two_arm_objective() -> impl Objective {
        let space = MixedSpace::new(
            vec![DiscreteVar::integers("k", 0, 1).unwrap()],
            vec![ContinuousVar::new("x", 0.0, 1.0).unwrap()],
        )
        .unwrap();
        FnObjective::new("two_arm", space, |d, c| Ok(d[0] * 5.0 + c[0]))
    }

    fn fixed(max_iters: usize, n: usize, seed: u64) -> HybridConfig {
        HybridConfig {
            n,
            max_iters,
            seed,
            stop: None,
            ..HybridConfig::default()
        }
    }

    #[test]
    fn stop_rule_cases() {
        let rule = StopRule { m: 3, window: 5 };
        assert!(should_stop(&[(0, 5.0); 3], &rule, 0.0));
        assert!(!should_stop(&[(0, 5.0); 3], &StopRule { m: 4, window: 5 }, 0.0));
        let spread = [(0, 5.0), (0, 5.0), (0, 5.0), (1, 1.0), (1, 2.0), (2, 1.0), (2, 3.0), (1, 4.0)];
        assert!(!should_stop(&spread, &rule, 0.0));
        assert!(!should_stop(&[(0, 5.0), (0, 5.0 + 1e-9), (0, 5.0)], &rule, 0.0));
        assert!(should_stop(&[(0, 5.0), (0, 5.0 + 1e-9), (0, 5.0)], &rule, 1e-6));
        assert!(!should_stop(&[], &rule, 0.0));
    }

    #[test]
    fn reward_is_max_over_history() {
        let bounds = vec![ContinuousVar::new("x", 0.0, 1.0).unwrap()];
        let mut s = BoState::new(bounds, BoConfig::default(), substream(0, 0));
        assert!(reward_of(&s).is_err());
        s.observe(vec![0.1], 1.2).unwrap();
        assert_eq!(reward_of(&s).unwrap(), 1.2);
        s.observe(vec![0.2], 3.4).unwrap();
        s.observe(vec![0.3], 2.0).unwrap();
        assert_eq!(reward_of(&s).unwrap(), 3.4);
    }

    #[test]
    fn single_iteration_counts() {
        let f = Composition::new();
        let records = run(&f, fixed(1, 3, 1)).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].evals.len(), 3);
        assert_eq!(records[0].eval_index, 3);
    }

    #[test]
    fn revisits_resume_the_cache() {
        let f = two_arm_objective();
        let mut opt = HybridOptimizer::new(&f, fixed(200, 2, 5)).unwrap();
        let mut visits = [0usize; 2];
        for _ in 0..30 {
            let rec = opt.step().unwrap();
            visits[rec.arm.index] += 1;
            let entry = opt.cache().get(rec.arm.index).unwrap();
            assert_eq!(entry.eval_count(), 2 * visits[rec.arm.index]);
        }
    }

    #[test]
    fn same_seed_same_trajectory() {
        let f = Composition::new();
        let a = run(&f, fixed(20, 3, 9)).unwrap();
        let b = run(&f, fixed(20, 3, 9)).unwrap();
        assert_eq!(a, b);
        let c = run(&f, fixed(20, 3, 10)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn stop_rule_ends_run_early() {
        let f = two_arm_objective();
        let cfg = HybridConfig {
            n: 1,
            max_iters: 5000,
            seed: 2,
            stop: Some(StopRule { m: 3, window: 10 }),
            reward_tolerance: 1e-3,
            ..HybridConfig::default()
        };
        let records = run(&f, cfg).unwrap();
        assert!(records.len() < 5000);
        let pairs: Vec<(usize, f64)> = records.iter().map(|r| (r.arm.index, r.reward)).collect();
        assert!(should_stop(&pairs, &StopRule { m: 3, window: 10 }, 1e-3));
    }

    #[test]
    fn random_continuous_plugs_in() {
        let f = two_arm_objective();
        let mut opt = HybridOptimizer::<RandomContinuous>::with_optimizer(&f, fixed(50, 2, 3), ()).unwrap();
        let records = opt.run().unwrap();
        assert_eq!(records.len(), 50);
        assert_eq!(opt.evaluations(), 100);
    }

    #[test]
    fn evaluation_errors_carry_iteration() {
        let space = MixedSpace::new(vec![], vec![ContinuousVar::new("x", 0.0, 1.0).unwrap()]).unwrap();
        let f = FnObjective::new("bad", space, |_, _| Err(EvalError::InvalidInput("nope".into())));
        let err = run(&f, fixed(3, 1, 0)).unwrap_err();
        assert!(matches!(err, Error::Evaluation { iteration: 0, .. }));
        assert!(HybridOptimizer::new(&f, fixed(0, 1, 0)).is_err());
        assert!(HybridOptimizer::new(&f, HybridConfig { stop: Some(StopRule { m: 5, window: 2 }), ..fixed(3, 1, 0) }).is_err());
    }
}
