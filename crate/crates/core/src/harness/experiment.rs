use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines;
use crate::error::{Error, Result};
use crate::functions::{KnownOptimum, Objective};
use crate::hybrid::{HybridOptimizer, IterationRecord};
use crate::space::MixedSpace;

use super::config::{ExperimentConfig, FunctionSpec, Method};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_FORMAT: &str = "hybridopt.manifest";
pub const MANIFEST_VERSION: u32 = 1;

/// One JSONL row: a single iteration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub run_id: String,
    pub seed: u64,
    /// Zero-based iteration index.
    pub t: usize,
    /// Objective evaluations performed up to and including this iteration.
    pub eval_index: usize,
    pub arm: Vec<f64>,
    /// Continuous point of the best evaluation in this iteration.
    pub x: Vec<f64>,
    pub f_value: f64,
    pub reward: f64,
    pub best_so_far: f64,
    pub gap: Option<f64>,
    pub wall_ms: u64,
}

impl TrajectoryRecord {
    pub fn from_iteration(run_id: &str, seed: u64, record: &IterationRecord, optimum: Option<f64>, wall_ms: u64) -> Self {
        let best = record.best_eval();
        Self {
            run_id: run_id.to_string(),
            seed,
            t: record.t,
            eval_index: record.eval_index,
            arm: record.arm.values.clone(),
            x: best.x.clone(),
            f_value: best.value,
            reward: record.reward,
            best_so_far: record.best_so_far,
            gap: optimum.map(|opt| gap(opt, record.best_so_far)),
            wall_ms,
        }
    }
}

pub fn gap(optimum: f64, best: f64) -> f64 {
    (optimum - best).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionInfo {
    pub name: String,
    pub space: MixedSpace,
    pub known_optimum: Option<KnownOptimum>,
}

impl FunctionInfo {
    fn of(objective: &dyn Objective) -> Self {
        Self {
            name: objective.name().to_string(),
            space: objective.space().clone(),
            known_optimum: objective.known_optimum().cloned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub run_id: String,
    pub function: String,
    pub method: Method,
    pub seed: u64,
    /// Trajectory file, relative to the manifest.
    pub file: String,
    pub iterations: usize,
    pub evaluations: usize,
    pub final_best: f64,
    pub final_gap: Option<f64>,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub crate_version: String,
    pub config: ExperimentConfig,
    pub functions: Vec<FunctionInfo>,
    pub runs: Vec<RunEntry>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest = serde_json::from_str(&text)?;
        if manifest.format != MANIFEST_FORMAT {
            return Err(Error::Config(format!("{} is not a run manifest", path.display())));
        }
        if manifest.version != MANIFEST_VERSION {
            return Err(Error::Version {
                found: manifest.version,
                expected: MANIFEST_VERSION,
            });
        }
        Ok(manifest)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionInfo> {
        self.functions.iter().find(|f| f.name == name)
    }
}

pub fn run_id(function: &str, method: Method, seed: u64) -> String {
    format!("{function}:{method}:{seed}")
}

/// File name for a run; characters outside `[A-Za-z0-9_-]` in the function
/// name become `_`.
pub fn trajectory_file_name(function: &str, method: Method, seed: u64) -> String {
    format!("{}__{method}__seed{seed}.jsonl", file_stem(function))
}

pub(crate) fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn read_trajectory(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

struct Job<'a> {
    spec: &'a FunctionSpec,
    method: Method,
    seed: u64,
}

/// Run every (function, method, seed) combination of `config`, writing one
/// JSONL trajectory per run and a manifest into `config.output_dir`.
///
/// Every function is resolved and the output directory created before the
/// first evaluation, so configuration mistakes fail fast.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Manifest> {
    config.validate()?;
    let functions: Vec<Box<dyn Objective>> =
        config.all_functions().iter().map(|f| f.resolve()).collect::<Result<_>>()?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".write_probe");
    File::create(&probe).map_err(|e| Error::io(&probe, e))?;
    let _ = fs::remove_file(&probe);

    let specs = config.all_functions();
    let mut jobs = Vec::new();
    for spec in &specs {
        for method in config.all_methods() {
            for &seed in &config.seeds {
                jobs.push(Job { spec, method, seed });
            }
        }
    }

    let all_safe = functions.iter().all(|f| f.concurrency_safe());
    let runs: Vec<RunEntry> = if config.parallel && all_safe {
        jobs.par_iter().map(|job| run_job(config, job, dir)).collect::<Result<_>>()?
    } else {
        jobs.iter().map(|job| run_job(config, job, dir)).collect::<Result<_>>()?
    };

    let manifest = Manifest {
        format: MANIFEST_FORMAT.into(),
        version: MANIFEST_VERSION,
        crate_version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        functions: functions.iter().map(|f| FunctionInfo::of(f.as_ref())).collect(),
        runs,
    };
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn run_job(config: &ExperimentConfig, job: &Job, dir: &Path) -> Result<RunEntry> {
    let objective = job.spec.resolve()?;
    let name = job.spec.name();
    let optimum = objective.known_optimum().map(|o| o.value);
    let id = run_id(name, job.method, job.seed);
    let file = trajectory_file_name(name, job.method, job.seed);
    let path: PathBuf = dir.join(&file);
    let mut out = BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);

    let start = Instant::now();
    let elapsed = || if config.timing { start.elapsed().as_millis() as u64 } else { 0 };
    let mut last: Option<TrajectoryRecord> = None;
    let mut write = |record: &IterationRecord| -> Result<()> {
        let row = TrajectoryRecord::from_iteration(&id, job.seed, record, optimum, elapsed());
        let mut line = serde_json::to_string(&row)?;
        line.push('\n');
        out.write_all(line.as_bytes()).map_err(|e| Error::io(&path, e))?;
        last = Some(row);
        Ok(())
    };
    match config.baseline_config(job.method, job.seed) {
        None => HybridOptimizer::new(objective.as_ref(), config.hybrid_config(job.seed))?.run_with(&mut write)?,
        Some(baseline) => baselines::run_with(objective.as_ref(), &baseline, &mut write)?,
    }
    out.flush().map_err(|e| Error::io(&path, e))?;
    let last = last.expect("at least one iteration runs");
    Ok(RunEntry {
        run_id: id,
        function: name.to_string(),
        method: job.method,
        seed: job.seed,
        file,
        iterations: last.t + 1,
        evaluations: last.eval_index,
        final_best: last.best_so_far,
        final_gap: last.gap,
        wall_ms: elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(dir: &Path, method: Method) -> ExperimentConfig {
        let mut c = ExperimentConfig::new("composition", method, 6, vec![1, 2, 3]);
        c.output_dir = dir.to_path_buf();
        c
    }

    #[test]
    fn writes_one_file_per_seed_plus_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let m = run_experiment(&config(dir.path(), Method::Hybrid)).unwrap();
        assert_eq!(m.runs.len(), 3);
        let mut names: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert_eq!(
            names,
            [
                "composition__hybrid__seed1.jsonl",
                "composition__hybrid__seed2.jsonl",
                "composition__hybrid__seed3.jsonl",
                "manifest.json"
            ]
        );
        let rows = read_trajectory(&dir.path().join(&m.runs[0].file)).unwrap();
        assert_eq!(rows.len(), 6);
        for row in &rows {
            assert_eq!(row.eval_index, 3 * (row.t + 1));
            assert_eq!(row.gap, Some((20.0 - row.best_so_far).abs()));
            assert_eq!(row.run_id, "composition:hybrid:1");
        }
        assert_eq!(Manifest::read(dir.path()).unwrap(), m);
    }

    #[test]
    fn rerun_is_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        for method in [Method::Hybrid, Method::RoundedBo] {
            run_experiment(&config(a.path(), method)).unwrap();
            run_experiment(&config(b.path(), method)).unwrap();
            let file = trajectory_file_name("composition", method, 2);
            assert_eq!(fs::read(a.path().join(&file)).unwrap(), fs::read(b.path().join(&file)).unwrap());
        }
    }

    #[test]
    fn baselines_get_matched_budget() {
        let dir = tempfile::tempdir().unwrap();
        let m = run_experiment(&config(dir.path(), Method::RandomSearch)).unwrap();
        assert!(m.runs.iter().all(|r| r.evaluations == 18 && r.iterations == 18));
    }

    #[test]
    fn unknown_function_fails_before_writing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let mut c = ExperimentConfig::new("nope", Method::Hybrid, 5, vec![1]);
        c.output_dir = out.clone();
        let err = run_experiment(&c).unwrap_err().to_string();
        assert!(err.contains("composition"), "{err}");
        assert!(!out.exists());
    }

    #[test]
    fn file_names_are_sanitized() {
        assert_eq!(trajectory_file_name("my fn/v2", Method::RoundedBo, 7), "my_fn_v2__rounded_bo__seed7.jsonl");
    }
}
