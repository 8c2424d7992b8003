//! Command-line front end for the `onebit` binary.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::verify::{self, VerifySettings};
use crate::experiments::{
    emit_csv, emit_plot, emit_trials_csv, figure_config, run_sweep_with_workers, Instance, SweepConfig, Variant,
    FIGURE_NAMES,
};
use crate::recovery::RecoveryConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "onebit", version, about = "One-bit compressive sensing with partial support information")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recover a single seeded instance described by a JSON file and print its metrics.
    Recover {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a sweep described by a JSON file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Also write per-trial metrics to this CSV.
        #[arg(long)]
        raw: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run bundled figure configurations and write `<name>.csv` and `<name>.svg`.
    Figures {
        /// One figure; all of them when omitted.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(FIGURE_NAMES))]
        name: Option<String>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the acceptance criteria and report pass/fail for each.
    Verify {
        /// Fewer Monte-Carlo trials for the figure-level criteria.
        #[arg(long)]
        quick: bool,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
}

/// Single-instance config for `recover`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceConfig {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub variant: Variant,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub recovery: Option<RecoveryConfig>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| Error::Config { path: path.to_path_buf(), source })
}

fn apply(cfg: &mut SweepConfig, run: &RunArgs) {
    if let Some(seed) = run.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = run.trials {
        cfg.trials = trials;
    }
}

fn recover(path: &Path, seed: Option<u64>) -> Result<()> {
    let mut ic: InstanceConfig = read_json(path)?;
    if let Some(seed) = seed {
        ic.seed = seed;
    }
    let rc = ic.recovery.unwrap_or_default();
    rc.validate()?;
    ic.variant.validate(ic.n, ic.k)?;
    let instance = Instance::generate(ic.seed, ic.n, ic.k, ic.m, 0)?;
    let result = instance.recover(&ic.variant, &rc, ic.seed, 0)?;
    let metrics = instance.evaluate(&result)?;
    println!(
        "{}: mse={:.6} consistency={:.4} support_recall={:.4} iterations={} converged={} degenerate={}",
        ic.variant, metrics.mse, metrics.consistency, metrics.support_recall, metrics.iterations, result.converged,
        metrics.degenerate
    );
    Ok(())
}

fn sweep(config: &Path, out: &Path, plot: Option<&Path>, raw: Option<&Path>, run: &RunArgs) -> Result<()> {
    let mut cfg: SweepConfig = read_json(config)?;
    apply(&mut cfg, run);
    let result = run_sweep_with_workers(&cfg, run.workers)?;
    emit_csv(&result, out)?;
    if let Some(plot) = plot {
        emit_plot(&result, plot)?;
    }
    if let Some(raw) = raw {
        emit_trials_csv(&result, raw)?;
    }
    eprintln!("wrote {} rows to {}", result.rows.len(), out.display());
    Ok(())
}

fn figures(name: Option<&str>, out: &Path, run: &RunArgs) -> Result<()> {
    fs::create_dir_all(out).map_err(|source| Error::Io { path: out.to_path_buf(), source })?;
    let names: Vec<&str> = name.map_or_else(|| FIGURE_NAMES.to_vec(), |n| vec![n]);
    for name in names {
        let mut cfg = figure_config(name, 100, 0)?;
        apply(&mut cfg, run);
        let result = run_sweep_with_workers(&cfg, run.workers)?;
        let (csv, svg) = (out.join(format!("{name}.csv")), out.join(format!("{name}.svg")));
        emit_csv(&result, &csv)?;
        emit_plot(&result, &svg)?;
        eprintln!("{name}: wrote {} and {}", csv.display(), svg.display());
    }
    Ok(())
}

fn verify_all(quick: bool, run: &RunArgs) -> Result<bool> {
    let seed = run.seed.unwrap_or(0);
    let mut settings = if quick { VerifySettings::quick(seed) } else { VerifySettings::full(seed) };
    if let Some(trials) = run.trials {
        settings.trials = trials;
    }
    settings.workers = run.workers;
    let outcomes = verify::run_all(&settings, |o| println!("{o}"))?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    Ok(failed == 0)
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Recover { config, seed } => recover(config, *seed).map(|_| true),
        Command::Sweep { config, out, plot, raw, run } => {
            sweep(config, out, plot.as_deref(), raw.as_deref(), run).map(|_| true)
        }
        Command::Figures { name, out, run } => figures(name.as_deref(), out, run).map(|_| true),
        Command::Verify { quick, run } => verify_all(*quick, run),
    };
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}
