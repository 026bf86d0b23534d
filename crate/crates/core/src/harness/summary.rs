use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::config::Method;
use super::experiment::{read_trajectory, FunctionInfo, Manifest, TrajectoryRecord, MANIFEST_FILE};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const SUMMARY_HEADER: &str =
    "function,method,seeds,mean_best,std_best,mean_final_gap,min_final_gap,total_evals,std_defined";

/// Cross-seed statistics for one (function, method) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub function: String,
    pub method: Method,
    pub seeds: Vec<u64>,
    /// Final best value per seed, in `seeds` order.
    pub bests: Vec<f64>,
    pub mean_best: f64,
    /// Sample standard deviation (n - 1 denominator); zero for a single seed.
    pub std_best: f64,
    /// False when there is only one seed and `std_best` is a placeholder.
    pub std_defined: bool,
    pub mean_final_gap: Option<f64>,
    pub min_final_gap: Option<f64>,
    pub total_evals: usize,
    pub total_wall_ms: u64,
}

/// One run's trajectory together with where it came from.
#[derive(Debug, Clone)]
pub struct LoadedRun {
    pub function: String,
    pub method: Method,
    pub seed: u64,
    pub optimum: Option<f64>,
    pub rows: Vec<TrajectoryRecord>,
}

fn manifest_dirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs = Vec::new();
    if dir.join(MANIFEST_FILE).is_file() {
        dirs.push(dir.to_path_buf());
    }
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut subdirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.join(MANIFEST_FILE).is_file())
        .collect();
    subdirs.sort();
    dirs.extend(subdirs);
    if dirs.is_empty() {
        return Err(Error::Config(format!("no {MANIFEST_FILE} in {} or its subdirectories", dir.display())));
    }
    Ok(dirs)
}

/// Read every run listed by the manifests in `dir` and its immediate
/// subdirectories. Manifests that disagree about a function's space or
/// optimum, or list the same run twice, are rejected.
pub fn load_runs(dir: &Path) -> Result<Vec<LoadedRun>> {
    let mut functions: BTreeMap<String, FunctionInfo> = BTreeMap::new();
    let mut runs: BTreeMap<(String, Method, u64), LoadedRun> = BTreeMap::new();
    for mdir in manifest_dirs(dir)? {
        let manifest = Manifest::read(&mdir)?;
        for info in &manifest.functions {
            match functions.get(&info.name) {
                Some(prev) if prev != info => {
                    return Err(Error::Config(format!(
                        "incompatible manifests: function `{}` differs in {}",
                        info.name,
                        mdir.display()
                    )))
                }
                Some(_) => {}
                None => {
                    functions.insert(info.name.clone(), info.clone());
                }
            }
        }
        for entry in &manifest.runs {
            let Some(info) = manifest.function(&entry.function) else {
                return Err(Error::Config(format!(
                    "manifest in {} lists run `{}` for an undeclared function",
                    mdir.display(),
                    entry.run_id
                )));
            };
            let key = (entry.function.clone(), entry.method, entry.seed);
            if runs.contains_key(&key) {
                return Err(Error::Config(format!("incompatible manifests: run `{}` appears twice", entry.run_id)));
            }
            let rows = read_trajectory(&mdir.join(&entry.file))?;
            if rows.is_empty() {
                return Err(Error::Config(format!("trajectory {} is empty", entry.file)));
            }
            runs.insert(
                key,
                LoadedRun {
                    function: entry.function.clone(),
                    method: entry.method,
                    seed: entry.seed,
                    optimum: info.known_optimum.as_ref().map(|o| o.value),
                    rows,
                },
            );
        }
    }
    Ok(runs.into_values().collect())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Group runs by (function, method) and compute cross-seed statistics from
/// each trajectory's final row.
pub fn summarize(runs: &[LoadedRun]) -> Vec<SummaryStats> {
    let mut groups: BTreeMap<(String, Method), Vec<&LoadedRun>> = BTreeMap::new();
    for run in runs {
        groups.entry((run.function.clone(), run.method)).or_default().push(run);
    }
    groups
        .into_iter()
        .map(|((function, method), mut group)| {
            group.sort_by_key(|r| r.seed);
            let finals: Vec<&TrajectoryRecord> = group.iter().map(|r| r.rows.last().expect("non-empty")).collect();
            let bests: Vec<f64> = finals.iter().map(|r| r.best_so_far).collect();
            let gaps: Option<Vec<f64>> = finals.iter().map(|r| r.gap).collect();
            SummaryStats {
                function,
                method,
                seeds: group.iter().map(|r| r.seed).collect(),
                mean_best: mean(&bests),
                std_best: sample_std(&bests),
                std_defined: bests.len() > 1,
                mean_final_gap: gaps.as_deref().map(mean),
                min_final_gap: gaps.as_deref().map(|g| g.iter().copied().fold(f64::INFINITY, f64::min)),
                total_evals: finals.iter().map(|r| r.eval_index).sum(),
                total_wall_ms: finals.iter().map(|r| r.wall_ms).sum(),
                bests,
            }
        })
        .collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn to_csv(stats: &[SummaryStats]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in stats {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            csv_field(&s.function),
            s.method,
            s.seeds.len(),
            s.mean_best,
            s.std_best,
            opt(s.mean_final_gap),
            opt(s.min_final_gap),
            s.total_evals,
            s.std_defined
        ));
    }
    out
}

/// Summarize `dir` and write `dir/summary.csv`, returning the statistics.
pub fn write_summary(dir: &Path) -> Result<Vec<SummaryStats>> {
    let stats = summarize(&load_runs(dir)?);
    let path = dir.join(SUMMARY_FILE);
    fs::write(&path, to_csv(&stats)).map_err(|e| Error::io(&path, e))?;
    Ok(stats)
}
