//! The `betlab` command line.
//!
//! Exit codes: 0 success, 2 bad arguments or configuration, 3 I/O failure.

pub mod output;
pub mod parse;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::simlab::confseq::{run_confseq, ConfSeqConfig};
use crate::simlab::ensemble::{run_ensemble, EnsembleSummary, ExperimentConfig};
use crate::simlab::leverage::run_leverage;
use crate::simlab::stats::{median, mean};
use crate::simlab::subg::{run_subg, SubgConfig, SubgRule};
use crate::simlab::DistSpec;
use crate::strategies::Strategy;
use output::*;
use parse::{parse_dist, parse_strategy};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "betlab", version, about = "Betting tests of a bounded mean: Monte Carlo studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an ensemble from a JSON experiment config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "BETLAB_WORKERS", default_value_t = 0)]
        workers: usize,
    },
    /// Null wealth quantiles and bankruptcy fractions over checkpoints.
    Bankruptcy(Common),
    /// Per-path `2 L_n*` and its KS distance to `χ²(1)`.
    Klinf(Common),
    /// Confidence sequences by test inversion.
    Confseq {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0.005)]
        grid_step: f64,
        /// Also report the per-round (not intersected) intervals.
        #[arg(long)]
        instantaneous: bool,
    },
    /// A strategy against its opportunistically leveraged version.
    Leverage {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
    },
    /// Sub-Gaussian test processes.
    Subg {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = SubgKind::Mixture)]
        rule: SubgKind,
        #[arg(long, default_value_t = 0.3)]
        atom: f64,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SubgKind {
    /// `λ_k = m + 1/√k`
    PluginSqrt,
    /// `λ_k = m + 1/k`
    PluginHarmonic,
    /// Atom at `m` plus a Gaussian prior.
    Mixture,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub paths: Option<u64>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub strategy: Option<String>,
    /// Null mean.
    #[arg(long, default_value_t = 0.5)]
    pub m: f64,
    #[arg(long)]
    pub dist: Option<String>,
    /// Comma-separated; defaults to the powers of ten up to the horizon plus the horizon.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<u64>>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, env = "BETLAB_WORKERS", default_value_t = 0)]
    pub workers: usize,
}

struct Defaults {
    paths: u64,
    horizon: u64,
    strategy: &'static str,
}

impl Common {
    fn paths(&self, d: &Defaults) -> u64 {
        self.paths.unwrap_or(d.paths)
    }

    fn horizon(&self, d: &Defaults) -> u64 {
        self.horizon.unwrap_or(d.horizon)
    }

    fn strategy(&self, d: &Defaults) -> CliResult<Strategy> {
        parse_strategy(self.strategy.as_deref().unwrap_or(d.strategy)).map_err(CliError::Config)
    }

    fn dist(&self, default: DistSpec) -> CliResult<DistSpec> {
        match &self.dist {
            Some(s) => parse_dist(s).map_err(CliError::Config),
            None => Ok(default),
        }
    }

    fn checkpoints(&self, horizon: u64) -> Vec<u64> {
        self.checkpoints.clone().unwrap_or_else(|| default_checkpoints(horizon))
    }

    fn experiment(&self, d: &Defaults, track_klinf: bool) -> CliResult<ExperimentConfig> {
        let horizon = self.horizon(d);
        Ok(ExperimentConfig {
            dist: self.dist(DistSpec::Bernoulli { p: self.m })?,
            null_m: self.m,
            strategy: self.strategy(d)?,
            horizon,
            paths: self.paths(d),
            checkpoints: self.checkpoints(horizon),
            master_seed: self.seed,
            track_klinf,
        })
    }
}

/// `10, 100, …` below `horizon`, then `horizon`.
pub fn default_checkpoints(horizon: u64) -> Vec<u64> {
    let mut v: Vec<u64> = std::iter::successors(Some(10u64), |c| c.checked_mul(10))
        .take_while(|&c| c < horizon)
        .collect();
    if horizon > 0 {
        v.push(horizon);
    }
    v
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn prepare_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write(dir: &Path, name: &str, text: &str) -> CliResult<()> {
    write_text(dir, name, text).map_err(|e| io_err(&dir.join(name), e))
}

fn write_value<T: Serialize>(dir: &Path, name: &str, v: &T) -> CliResult<()> {
    write_json(dir, name, v).map_err(|e| io_err(&dir.join(name), e))
}

fn manifest<C: Serialize>(dir: &Path, command: &str, config: &C, started: Instant, tables: Value) -> CliResult<()> {
    let m = json!({
        "tool": "betlab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "wall_time_s": started.elapsed().as_secs_f64(),
        "tables": tables,
    });
    write_value(dir, "manifest.json", &m)
}

fn ensemble_outputs(dir: &Path, command: &str, config: &ExperimentConfig, summary: &EnsembleSummary, started: Instant) -> CliResult<()> {
    let csv = checkpoints_csv(summary);
    write(dir, "checkpoints.csv", &csv)?;
    write_value(dir, "summary.json", summary)?;
    manifest(dir, command, config, started, json!({ "checkpoints": summary.checkpoints }))
}

fn cmd_simulate(config: &Path, out: &Path, workers: usize) -> CliResult<()> {
    let started = Instant::now();
    let text = std::fs::read_to_string(config)
        .map_err(|e| CliError::Config(format!("{}: {e}", config.display())))?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", config.display())))?;
    config.validate()?;
    prepare_dir(out)?;
    let summary = run_ensemble(&config, workers)?;
    ensemble_outputs(out, "simulate", &config, &summary, started)
}

fn cmd_bankruptcy(c: &Common) -> CliResult<()> {
    let started = Instant::now();
    let d = Defaults {
        paths: 1000,
        horizon: 100_000,
        strategy: "kt-pc",
    };
    let config = c.experiment(&d, false)?;
    config.validate()?;
    prepare_dir(&c.out)?;
    let summary = run_ensemble(&config, c.workers)?;
    write(&c.out, "paths.csv", &paths_csv(&summary))?;
    ensemble_outputs(&c.out, "bankruptcy", &config, &summary, started)
}

fn cmd_klinf(c: &Common) -> CliResult<()> {
    let started = Instant::now();
    let d = Defaults {
        paths: 2000,
        horizon: 10_000,
        strategy: "fixed:0",
    };
    let mut config = c.experiment(&d, true)?;
    config.checkpoints = c.checkpoints.clone().unwrap_or(vec![config.horizon]);
    config.validate()?;
    prepare_dir(&c.out)?;
    let summary = run_ensemble(&config, c.workers)?;
    write(&c.out, "klinf.csv", &klinf_csv(&summary))?;
    let last = summary.checkpoints.last();
    let tables = json!({
        "n": config.checkpoints.last(),
        "paths": config.paths,
        "ks_chi2": crate::simlab::real::Real(last.map_or(f64::NAN, |s| s.ks_chi2)),
        "chi_sq_mean": crate::simlab::real::Real(last.map_or(f64::NAN, |s| s.chi_sq_mean)),
    });
    write_value(&c.out, "summary.json", &tables)?;
    manifest(&c.out, "klinf", &config, started, tables)
}

fn cmd_confseq(c: &Common, alpha: f64, grid_step: f64, instantaneous: bool) -> CliResult<()> {
    let started = Instant::now();
    let d = Defaults {
        paths: 500,
        horizon: 10_000,
        strategy: "hedged",
    };
    let horizon = c.horizon(&d);
    let config = ConfSeqConfig {
        dist: c.dist(DistSpec::Bernoulli { p: 0.5 })?,
        family: c.strategy(&d)?,
        alpha,
        grid_step,
        horizon,
        paths: c.paths(&d),
        checkpoints: c.checkpoints(horizon),
        master_seed: c.seed,
        instantaneous,
    };
    prepare_dir(&c.out)?;
    let rows = run_confseq(&config, c.workers)?;
    write(&c.out, "confseq.csv", &confseq_csv(&rows))?;
    let mu = config.dist.mean();
    let per_ck: Vec<Value> = config
        .checkpoints
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let covered = rows.iter().filter(|p| p[k].running_covers(mu)).count();
            let widths: Vec<f64> = rows.iter().map(|p| p[k].run_hi - p[k].run_lo).filter(|w| !w.is_nan()).collect();
            json!({
                "n": n,
                "running_coverage": if rows.is_empty() { Value::Null } else { json!(covered as f64 / rows.len() as f64) },
                "median_running_width": crate::simlab::real::Real(median(&widths)),
            })
        })
        .collect();
    let tables = json!({ "mean": mu, "checkpoints": per_ck });
    write_value(&c.out, "summary.json", &tables)?;
    manifest(&c.out, "confseq", &config, started, tables)
}

fn cmd_leverage(c: &Common, rho: f64) -> CliResult<()> {
    let started = Instant::now();
    let d = Defaults {
        paths: 100,
        horizon: 1000,
        strategy: "beta-up:0.5",
    };
    let config = c.experiment(&d, false)?;
    prepare_dir(&c.out)?;
    let traces = run_leverage(&config, rho, c.workers)?;
    write(&c.out, "leverage.csv", &leverage_csv(&traces))?;
    let on_event: Vec<_> = traces.iter().filter(|t| t.pnb).collect();
    let tables = json!({
        "rho": rho,
        "pnb_paths": on_event.len(),
        "max_rel_dev": crate::simlab::real::Real(on_event.iter().map(|t| t.max_rel_dev).fold(0.0, f64::max)),
        "alt_violations": traces.iter().map(|t| t.alt_violations).sum::<u64>(),
        "null_violations": traces.iter().map(|t| t.null_violations).sum::<u64>(),
    });
    write_value(&c.out, "summary.json", &tables)?;
    manifest(&c.out, "leverage", &json!({ "experiment": config, "rho": rho }), started, tables)
}

fn cmd_subg(c: &Common, kind: SubgKind, atom: f64, tau: f64) -> CliResult<()> {
    let started = Instant::now();
    let d = Defaults {
        paths: 500,
        horizon: 100_000,
        strategy: "",
    };
    if c.strategy.is_some() {
        return Err(CliError::Config("subg takes --rule, not --strategy".into()));
    }
    let horizon = c.horizon(&d);
    let config = SubgConfig {
        dist: c.dist(DistSpec::Normal { mu: c.m, sigma: 1.0 })?,
        m: c.m,
        rule: match kind {
            SubgKind::PluginSqrt => SubgRule::Plugin { power: 0.5 },
            SubgKind::PluginHarmonic => SubgRule::Plugin { power: 1.0 },
            SubgKind::Mixture => SubgRule::Mixture { atom, tau },
        },
        horizon,
        paths: c.paths(&d),
        checkpoints: c.checkpoints(horizon),
        master_seed: c.seed,
    };
    prepare_dir(&c.out)?;
    let paths = run_subg(&config, c.workers)?;
    write(&c.out, "subg.csv", &subg_csv(&config.checkpoints, &paths))?;
    let per_ck: Vec<Value> = config
        .checkpoints
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let logs: Vec<f64> = paths.iter().map(|p| p.log_m[k]).collect();
            json!({
                "n": n,
                "median_log_m": crate::simlab::real::Real(median(&logs)),
                "mean_m": crate::simlab::real::Real(mean(&logs.iter().map(|v| v.exp()).collect::<Vec<_>>())),
            })
        })
        .collect();
    let tables = json!({ "checkpoints": per_ck });
    write_value(&c.out, "summary.json", &tables)?;
    manifest(&c.out, "subg", &config, started, tables)
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Simulate { config, out, workers } => cmd_simulate(config, out, *workers),
        Command::Bankruptcy(c) => cmd_bankruptcy(c),
        Command::Klinf(c) => cmd_klinf(c),
        Command::Confseq {
            common,
            alpha,
            grid_step,
            instantaneous,
        } => cmd_confseq(common, *alpha, *grid_step, *instantaneous),
        Command::Leverage { common, rho } => cmd_leverage(common, *rho),
        Command::Subg { common, rule, atom, tau } => cmd_subg(common, *rule, *atom, *tau),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("betlab: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_defaults() {
        assert_eq!(default_checkpoints(100_000), vec![10, 100, 1000, 10_000, 100_000]);
        assert_eq!(default_checkpoints(250), vec![10, 100, 250]);
        assert_eq!(default_checkpoints(5), vec![5]);
        assert!(default_checkpoints(0).is_empty());
    }

    #[test]
    fn argument_errors_exit_2() {
        assert_eq!(run(["betlab", "bankruptcy"]), 2);
        assert_eq!(run(["betlab", "frobnicate"]), 2);
    }
}
