use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineConfig, BaselineMethod};
use crate::bo::BoConfig;
use crate::error::{Error, Result};
use crate::functions::{synthetic, ExternalObjective, KnownOptimum, Objective, SYNTHETIC_NAMES};
use crate::hybrid::{HybridConfig, StopRule};
use crate::space::MixedSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Hybrid,
    RandomSearch,
    RoundedBo,
    DiscretizedBandit,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Hybrid,
        Method::RandomSearch,
        Method::RoundedBo,
        Method::DiscretizedBandit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Hybrid => "hybrid",
            Method::RandomSearch => "random_search",
            Method::RoundedBo => "rounded_bo",
            Method::DiscretizedBandit => "discretized_bandit",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name).ok_or_else(|| {
            let known: Vec<_> = Self::ALL.iter().map(|m| m.name()).collect();
            Error::Config(format!("unknown method `{name}`; expected one of {}", known.join(", ")))
        })
    }

    fn baseline(self) -> Option<BaselineMethod> {
        match self {
            Method::Hybrid => None,
            Method::RandomSearch => Some(BaselineMethod::RandomSearch),
            Method::RoundedBo => Some(BaselineMethod::RoundedBo),
            Method::DiscretizedBandit => Some(BaselineMethod::DiscretizedBandit),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn default_timeout_ms() -> u64 {
    10_000
}

fn default_external_name() -> String {
    "external".into()
}

/// A black-box objective run as a shell command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalSpec {
    #[serde(default = "default_external_name")]
    pub name: String,
    pub command: String,
    pub space: MixedSpace,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default)]
    pub known_optimum: Option<KnownOptimum>,
    /// Allow several runs of this command at once.
    #[serde(default)]
    pub concurrency_safe: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Named(String),
    External { external: ExternalSpec },
}

impl FunctionSpec {
    pub fn name(&self) -> &str {
        match self {
            FunctionSpec::Named(name) => name,
            FunctionSpec::External { external } => &external.name,
        }
    }

    pub fn resolve(&self) -> Result<Box<dyn Objective>> {
        match self {
            FunctionSpec::Named(name) => synthetic(name).ok_or_else(|| {
                Error::Config(format!(
                    "unknown function `{name}`; available: {}",
                    SYNTHETIC_NAMES.join(", ")
                ))
            }),
            FunctionSpec::External { external } => {
                if external.timeout_ms == 0 {
                    return Err(Error::Config("external timeout_ms must be positive".into()));
                }
                Ok(Box::new(
                    ExternalObjective::new(
                        external.name.clone(),
                        external.command.clone(),
                        external.space.clone(),
                        Duration::from_millis(external.timeout_ms),
                    )
                    .with_optimum(external.known_optimum.clone())
                    .with_concurrency_safe(external.concurrency_safe),
                ))
            }
        }
    }
}

impl From<&str> for FunctionSpec {
    fn from(name: &str) -> Self {
        FunctionSpec::Named(name.into())
    }
}

fn default_n() -> usize {
    3
}
fn default_alpha() -> f64 {
    0.1
}
fn default_bins() -> usize {
    11
}
fn default_window() -> usize {
    50
}
fn default_true() -> bool {
    true
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

/// JSON experiment description. `function`/`functions` and
/// `method`/`methods` may be given singly or as lists; both forms combine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub methods: Vec<Method>,
    /// Continuous steps per visited arm (hybrid).
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Enable the hybrid early stop rule; off for fixed-length benchmarks.
    #[serde(default)]
    pub stop: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_m: Option<usize>,
    #[serde(default, rename = "stop_T", skip_serializing_if = "Option::is_none")]
    pub stop_t: Option<usize>,
    /// Hybrid iterations; each performs `n` evaluations.
    pub iters: usize,
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_window")]
    pub rolling_window: usize,
    /// Run (function, method, seed) jobs on several threads.
    #[serde(default)]
    pub parallel: bool,
    /// Give baselines `iters * n` iterations so every method spends the same
    /// number of evaluations.
    #[serde(default = "default_true")]
    pub match_evaluations: bool,
    /// Record wall-clock milliseconds; off keeps trajectory files byte-identical
    /// across reruns.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub bo: BoConfig,
}

impl ExperimentConfig {
    pub fn new(function: impl Into<FunctionSpec>, method: Method, iters: usize, seeds: Vec<u64>) -> Self {
        Self {
            function: Some(function.into()),
            functions: Vec::new(),
            method: Some(method),
            methods: Vec::new(),
            n: default_n(),
            alpha: default_alpha(),
            bins: default_bins(),
            stop: false,
            stop_m: None,
            stop_t: None,
            iters,
            seeds,
            output_dir: default_output_dir(),
            rolling_window: default_window(),
            parallel: false,
            match_evaluations: true,
            timing: false,
            bo: BoConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid experiment config: {e}")))
    }

    pub fn all_functions(&self) -> Vec<&FunctionSpec> {
        self.function.iter().chain(&self.functions).collect()
    }

    pub fn all_methods(&self) -> Vec<Method> {
        let mut out: Vec<Method> = Vec::new();
        for m in self.method.iter().chain(&self.methods) {
            if !out.contains(m) {
                out.push(*m);
            }
        }
        out
    }

    /// Check everything that can be checked without evaluating anything.
    pub fn validate(&self) -> Result<()> {
        if self.all_functions().is_empty() {
            return Err(Error::Config("config names no function".into()));
        }
        if self.all_methods().is_empty() {
            return Err(Error::Config("config names no method".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must be non-empty".into()));
        }
        if self.iters == 0 {
            return Err(Error::Config("iters must be at least 1".into()));
        }
        if self.rolling_window == 0 {
            return Err(Error::Config("rolling_window must be at least 1".into()));
        }
        let mut names = Vec::new();
        for f in self.all_functions() {
            if names.contains(&f.name()) {
                return Err(Error::Config(format!("function `{}` listed twice", f.name())));
            }
            names.push(f.name());
            f.resolve()?;
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        if self.stop_m.is_some() != self.stop_t.is_some() {
            return Err(Error::Config("stop_m and stop_T must be given together".into()));
        }
        self.hybrid_config(0).validate()?;
        if self.all_methods().contains(&Method::DiscretizedBandit) && self.bins < 2 {
            return Err(Error::Config(format!("bins must be at least 2, got {}", self.bins)));
        }
        Ok(())
    }

    pub fn hybrid_config(&self, seed: u64) -> HybridConfig {
        let stop = self.stop.then(|| match (self.stop_m, self.stop_t) {
            (Some(m), Some(window)) => StopRule { m, window },
            _ => StopRule::default(),
        });
        HybridConfig {
            n: self.n,
            alpha: self.alpha,
            stop,
            max_iters: self.iters,
            seed,
            reward_tolerance: 0.0,
            bo: self.bo.clone(),
        }
    }

    /// `None` for the hybrid method.
    pub fn baseline_config(&self, method: Method, seed: u64) -> Option<BaselineConfig> {
        let iters = if self.match_evaluations { self.iters * self.n } else { self.iters };
        method.baseline().map(|b| BaselineConfig {
            method: b,
            iters,
            seed,
            bins: self.bins,
            alpha: self.alpha,
            bo: self.bo.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_and_full_configs() {
        let c = ExperimentConfig::from_json(r#"{"function":"composition","method":"hybrid","iters":10,"seeds":[1,2]}"#)
            .unwrap();
        assert_eq!(c.n, 3);
        assert_eq!(c.rolling_window, 50);
        assert!(!c.stop);
        c.validate().unwrap();

        let c = ExperimentConfig::from_json(
            r#"{"functions":["shekel",{"external":{"command":"echo '{\"value\":1}'",
                "space":{"continuous":[{"name":"x","lower":0,"upper":1}]}}}],
                "methods":["hybrid","random_search"],"iters":5,"seeds":[3],
                "stop":true,"stop_m":4,"stop_T":20}"#,
        )
        .unwrap();
        c.validate().unwrap();
        assert_eq!(c.all_functions()[1].name(), "external");
        assert_eq!(c.hybrid_config(3).stop, Some(StopRule { m: 4, window: 20 }));
        assert_eq!(c.baseline_config(Method::RandomSearch, 3).unwrap().iters, 15);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            r#"{"function":"nope","method":"hybrid","iters":10,"seeds":[1]}"#,
            r#"{"function":"shekel","method":"hybrid","iters":0,"seeds":[1]}"#,
            r#"{"function":"shekel","method":"hybrid","iters":5,"seeds":[]}"#,
            r#"{"function":"shekel","iters":5,"seeds":[1]}"#,
            r#"{"function":"shekel","method":"hybrid","iters":5,"seeds":[1],"stop_m":3}"#,
        ];
        for text in bad {
            assert!(ExperimentConfig::from_json(text).and_then(|c| c.validate()).is_err(), "{text}");
        }
        let err = ExperimentConfig::from_json(r#"{"function":"nope","method":"hybrid","iters":1,"seeds":[1]}"#)
            .unwrap()
            .validate()
            .unwrap_err()
            .to_string();
        assert!(err.contains("shekel") && err.contains("sine_permutation"), "{err}");
        assert!(ExperimentConfig::from_json(r#"{"function":"shekel","method":"bogus","iters":1,"seeds":[1]}"#).is_err());
    }
}
