use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hybridopt::functions::{synthetic, SYNTHETIC_NAMES};
use hybridopt::harness::{self, ExperimentConfig, FunctionSpec, Method};
use hybridopt::{Error, Result};

#[derive(Parser)]
#[command(name = "hybridopt", version, about = "Bandit + Bayesian optimization for mixed discrete/continuous problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Show the built-in objectives, their spaces and known optima.
    ListFunctions,
    /// Run one function with one method over the configured seeds.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run every configured function x method x seed, then summarize.
    Bench {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Write summary.csv for the runs under a results directory.
    Summarize { dir: PathBuf },
    /// Render one SVG per (function, method) under a results directory.
    Plot {
        dir: PathBuf,
        /// Output directory [default: <dir>/plots]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Rolling-average window [default: the run's rolling_window]
        #[arg(long)]
        window: Option<usize>,
    },
}

#[derive(Args)]
struct Overrides {
    /// Run only this seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iters: Option<usize>,
    /// Replace the configured methods.
    #[arg(long)]
    method: Option<String>,
    /// Replace the configured functions with this built-in one.
    #[arg(long)]
    function: Option<String>,
    /// Replace the output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn load_config(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = overrides.seed {
        config.seeds = vec![seed];
    }
    if let Some(iters) = overrides.iters {
        config.iters = iters;
    }
    if let Some(method) = &overrides.method {
        config.method = Some(Method::parse(method)?);
        config.methods.clear();
    }
    if let Some(function) = &overrides.function {
        config.function = Some(FunctionSpec::Named(function.clone()));
        config.functions.clear();
    }
    if let Some(dir) = &overrides.output_dir {
        config.output_dir = dir.clone();
    }
    config.validate()?;
    Ok(config)
}

fn list_functions() -> Result<()> {
    for name in SYNTHETIC_NAMES {
        let f = synthetic(name).expect("listed name resolves");
        println!("{name}");
        for v in f.space().discrete() {
            let domain: Vec<String> = v.domain().iter().map(|d| d.to_string()).collect();
            println!("  discrete   {:<4} {{{}}}", v.name(), domain.join(", "));
        }
        for v in f.space().continuous() {
            println!("  continuous {:<4} [{}, {}]", v.name(), v.lower(), v.upper());
        }
        println!("  arms       {}", f.space().arm_count());
        if let Some(opt) = f.known_optimum() {
            println!("  optimum    {} at {:?} {:?}", opt.value, opt.discrete, opt.continuous);
        }
    }
    Ok(())
}

fn report(manifest: &harness::Manifest) {
    for run in &manifest.runs {
        let gap = run.final_gap.map(|g| format!(" gap {g:.6}")).unwrap_or_default();
        println!(
            "{:<40} best {:.6}{gap} evals {} -> {}",
            run.run_id,
            run.final_best,
            run.evaluations,
            manifest.config.output_dir.join(&run.file).display()
        );
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::ListFunctions => list_functions(),
        Command::Run { config, overrides } => {
            let config = load_config(&config, &overrides)?;
            if config.all_functions().len() != 1 || config.all_methods().len() != 1 {
                return Err(Error::Config(
                    "`run` takes exactly one function and one method; use `bench` for several".into(),
                ));
            }
            report(&harness::run_experiment(&config)?);
            Ok(())
        }
        Command::Bench { config, overrides } => {
            let config = load_config(&config, &overrides)?;
            let manifest = harness::run_experiment(&config)?;
            report(&manifest);
            let stats = harness::write_summary(&config.output_dir)?;
            print!("{}", harness::to_csv(&stats));
            Ok(())
        }
        Command::Summarize { dir } => {
            let stats = harness::write_summary(&dir)?;
            print!("{}", harness::to_csv(&stats));
            Ok(())
        }
        Command::Plot { dir, out, window } => {
            let window = match window {
                Some(w) => w,
                None => harness::Manifest::read(&dir).map(|m| m.config.rolling_window).unwrap_or(50),
            };
            if window == 0 {
                return Err(Error::Config("window must be at least 1".into()));
            }
            let out = out.unwrap_or_else(|| dir.join("plots"));
            for path in harness::plot(&dir, &out, window)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("hybridopt: error: {msg}");
            ExitCode::FAILURE
        }
    }
}
