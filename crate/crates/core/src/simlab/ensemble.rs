//! The deterministic ensemble runner for betting strategies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dist::{DistSpec, Sampler};
use super::seed::{hash64, path_rng};
use super::stats::{chi2_cdf, ks_distance, mean, quantiles, sorted, variance, QUANTILE_LEVELS};
use super::real;
use crate::diagnostics::{klinf, SosClass, SosLedger, TnTracker};
use crate::error::{Error, Result};
use crate::strategies::grapa::DEFAULT_TOL;
use crate::strategies::Strategy;
use crate::wealth::{History, NullSpec};

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dist: DistSpec,
    pub null_m: f64,
    pub strategy: Strategy,
    pub horizon: u64,
    pub paths: u64,
    pub checkpoints: Vec<u64>,
    pub master_seed: u64,
    /// Compute `2 L_n*` at checkpoints.
    #[serde(default = "yes")]
    pub track_klinf: bool,
}

impl ExperimentConfig {
    pub fn null(&self) -> Result<NullSpec> {
        NullSpec::new(self.null_m)
    }

    pub fn validate(&self) -> Result<()> {
        let null = self.null()?;
        self.dist.validate()?;
        if !self.dist.is_bounded() {
            return Err(Error::Config("betting needs observations in [0, 1]".into()));
        }
        check_checkpoints(&self.checkpoints, self.horizon)?;
        self.strategy.bettor(null)?;
        Ok(())
    }
}

pub(crate) fn check_checkpoints(checkpoints: &[u64], horizon: u64) -> Result<()> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("checkpoints must be strictly increasing".into()));
    }
    if checkpoints.last().is_some_and(|&c| c > horizon) {
        return Err(Error::Config("checkpoints must not exceed the horizon".into()));
    }
    Ok(())
}

/// Runs `f(0..paths)` on `workers` threads (0 = rayon default), keeping index order.
pub fn run_paths<T, F>(paths: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| (0..paths).into_par_iter().map(&f).collect())
}

/// One path's diagnostics at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    #[serde(with = "real")]
    pub log_wealth: f64,
    /// `√n · λ_{n+1}`.
    #[serde(with = "real")]
    pub sqrtn_lambda: f64,
    /// `2 L_n*`; NaN when not tracked.
    #[serde(with = "real")]
    pub chi_sq: f64,
    /// `Σ_{k≤n} S_k²/k²`.
    #[serde(with = "real")]
    pub tn: f64,
    /// `Σ_{k≤n} λ_k²`.
    #[serde(with = "real")]
    pub sos: f64,
    /// `max_{k≤n} log W_k`.
    #[serde(with = "real")]
    pub sup_log_wealth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub index: u64,
    pub seed: u64,
    pub samples: Vec<PathSample>,
    /// Horizon heuristic, diagnostic only.
    pub sos_class: SosClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub n: u64,
    /// Wealth at [`QUANTILE_LEVELS`].
    #[serde(with = "real::vec")]
    pub wealth_quantiles: Vec<f64>,
    pub bankrupt_frac_1e2: f64,
    pub bankrupt_frac_1e6: f64,
    #[serde(with = "real")]
    pub mean_sqrtn_lambda: f64,
    #[serde(with = "real")]
    pub var_sqrtn_lambda: f64,
    #[serde(with = "real")]
    pub tn_mean: f64,
    #[serde(with = "real::vec")]
    pub sos_quantiles: Vec<f64>,
    #[serde(with = "real")]
    pub chi_sq_mean: f64,
    /// KS distance of the `2 L_n*` samples to `χ²(1)`.
    #[serde(with = "real")]
    pub ks_chi2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub checkpoints: Vec<CheckpointSummary>,
    pub paths: Vec<PathRecord>,
}

impl EnsembleSummary {
    pub fn checkpoint_index(&self, n: u64) -> Option<usize> {
        self.checkpoints.iter().position(|c| c.n == n)
    }

    /// One value per path at checkpoint index `ck`.
    pub fn column(&self, ck: usize, f: impl Fn(&PathSample) -> f64) -> Vec<f64> {
        self.paths.iter().map(|p| f(&p.samples[ck])).collect()
    }

    /// `column` by checkpoint round; panics if `n` is not a checkpoint.
    pub fn at(&self, n: u64, f: impl Fn(&PathSample) -> f64) -> Vec<f64> {
        let ck = self.checkpoint_index(n).expect("not a checkpoint");
        self.column(ck, f)
    }
}

fn simulate_path(
    config: &ExperimentConfig,
    null: NullSpec,
    sampler: &Sampler,
    index: u64,
) -> Result<PathRecord> {
    let seed = hash64(config.master_seed, index);
    let mut rng = path_rng(seed);
    let m = null.m();
    let mut bettor = config.strategy.bettor(null)?;
    let mut sos = SosLedger::new();
    let mut tn = TnTracker::new();
    let mut history = config.track_klinf.then(History::new);
    let mut sum_dev = 0.0;
    let mut sup = 0.0f64;
    let mut samples = Vec::with_capacity(config.checkpoints.len());
    let mut next_ck = config.checkpoints.iter().peekable();

    for n in 1..=config.horizon {
        let x = sampler.draw(&mut rng);
        let lambda = bettor.fraction();
        sos.record(lambda, 1.0 + lambda * (x - m));
        bettor.observe(x);
        sum_dev += x - m;
        tn.record(sum_dev, n);
        if let Some(h) = &mut history {
            h.push(x);
        }
        let log_w = bettor.log_wealth();
        sup = sup.max(log_w);
        if next_ck.peek() == Some(&&n) {
            next_ck.next();
            let chi_sq = match &history {
                Some(h) => klinf(h, null, DEFAULT_TOL)?.chi_sq,
                None => f64::NAN,
            };
            samples.push(PathSample {
                log_wealth: log_w,
                sqrtn_lambda: (n as f64).sqrt() * bettor.fraction(),
                chi_sq,
                tn: tn.t_n,
                sos: sos.sum_lambda_sq,
                sup_log_wealth: sup,
            });
        }
    }
    Ok(PathRecord {
        index,
        seed,
        samples,
        sos_class: sos.classification(),
    })
}

fn summarize(n: u64, ck: usize, paths: &[PathRecord]) -> Result<CheckpointSummary> {
    let col = |f: fn(&PathSample) -> f64| -> Vec<f64> { paths.iter().map(|p| f(&p.samples[ck])).collect() };
    let wealth: Vec<f64> = col(|s| s.log_wealth.exp());
    let count = wealth.len() as f64;
    let frac_below = |t: f64| wealth.iter().filter(|&&w| w < t).count() as f64 / count;
    let lam = col(|s| s.sqrtn_lambda);
    let chi = col(|s| s.chi_sq);
    let tracked = chi.iter().all(|c| !c.is_nan());
    Ok(CheckpointSummary {
        n,
        wealth_quantiles: quantiles(&wealth, &QUANTILE_LEVELS),
        bankrupt_frac_1e2: frac_below(1e-2),
        bankrupt_frac_1e6: frac_below(1e-6),
        mean_sqrtn_lambda: mean(&lam),
        var_sqrtn_lambda: variance(&lam),
        tn_mean: mean(&col(|s| s.tn)),
        sos_quantiles: quantiles(&col(|s| s.sos), &QUANTILE_LEVELS),
        chi_sq_mean: if tracked { mean(&chi) } else { f64::NAN },
        ks_chi2: if tracked { ks_distance(&sorted(&chi), chi2_cdf)? } else { f64::NAN },
    })
}

/// Simulates every path and aggregates per checkpoint. The result does not
/// depend on `workers`.
pub fn run_ensemble(config: &ExperimentConfig, workers: usize) -> Result<EnsembleSummary> {
    config.validate()?;
    let null = config.null()?;
    let sampler = config.dist.sampler()?;
    let paths = run_paths(config.paths, workers, |i| simulate_path(config, null, &sampler, i))?;
    if paths.is_empty() {
        return Ok(EnsembleSummary {
            checkpoints: Vec::new(),
            paths,
        });
    }
    let checkpoints = config
        .checkpoints
        .iter()
        .enumerate()
        .map(|(ck, &n)| summarize(n, ck, &paths))
        .collect::<Result<_>>()?;
    Ok(EnsembleSummary { checkpoints, paths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::fixed_fraction;

    fn config(strategy: Strategy, dist: DistSpec, paths: u64) -> ExperimentConfig {
        ExperimentConfig {
            dist,
            null_m: 0.5,
            strategy,
            horizon: 200,
            paths,
            checkpoints: vec![10, 100, 200],
            master_seed: 11,
            track_klinf: true,
        }
    }

    #[test]
    fn zero_paths_is_empty() {
        let s = run_ensemble(&config(Strategy::kt(0.25), DistSpec::Bernoulli { p: 0.5 }, 0), 1).unwrap();
        assert!(s.checkpoints.is_empty() && s.paths.is_empty());
    }

    #[test]
    fn zero_fraction_keeps_unit_wealth() {
        let s = run_ensemble(&config(fixed_fraction(0.0), DistSpec::Bernoulli { p: 0.5 }, 20), 1).unwrap();
        for c in &s.checkpoints {
            assert!(c.wealth_quantiles.iter().all(|&q| q == 1.0));
        }
    }

    #[test]
    fn point_mass_at_null_is_flat_for_every_strategy() {
        for strat in [
            Strategy::kt(0.25),
            Strategy::kt_pseudo_count(0.25),
            Strategy::grapa(1.0),
            Strategy::agrapa(0.5),
            Strategy::hedged(0.05, 0.5),
            Strategy::beta_mixture(0.0, 0.5, 0.5),
        ] {
            let s = run_ensemble(&config(strat.clone(), DistSpec::PointMass { m: 0.5 }, 3), 1).unwrap();
            for p in &s.paths {
                for smp in &p.samples {
                    assert!(smp.log_wealth.abs() < 1e-12, "{strat:?}: {}", smp.log_wealth);
                }
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let c = config(Strategy::agrapa(0.5), DistSpec::ScaledBeta { a: 2.0, b: 2.0 }, 16);
        let a = serde_json::to_string(&run_ensemble(&c, 1).unwrap()).unwrap();
        let b = serde_json::to_string(&run_ensemble(&c, 3).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn earlier_paths_survive_more_paths() {
        let small = run_ensemble(&config(Strategy::kt(1.0), DistSpec::Bernoulli { p: 0.5 }, 4), 1).unwrap();
        let big = run_ensemble(&config(Strategy::kt(1.0), DistSpec::Bernoulli { p: 0.5 }, 9), 1).unwrap();
        assert_eq!(small.paths[..], big.paths[..4]);
    }

    #[test]
    fn config_errors() {
        let mut c = config(Strategy::kt(0.25), DistSpec::Bernoulli { p: 0.5 }, 1);
        c.checkpoints = vec![100, 10];
        assert!(run_ensemble(&c, 1).is_err());
        c.checkpoints = vec![500];
        assert!(run_ensemble(&c, 1).is_err());
        let mut c = config(Strategy::kt(0.25), DistSpec::Normal { mu: 0.5, sigma: 1.0 }, 1);
        assert!(run_ensemble(&c, 1).is_err());
        c.dist = DistSpec::Bernoulli { p: 0.5 };
        c.null_m = 1.0;
        assert!(run_ensemble(&c, 1).is_err());
    }

    #[test]
    fn quantiles_are_monotone() {
        let s = run_ensemble(&config(Strategy::grapa(1.0), DistSpec::Bernoulli { p: 0.5 }, 50), 1).unwrap();
        for c in &s.checkpoints {
            assert!(c.wealth_quantiles.windows(2).all(|w| w[0] <= w[1]));
            assert!(c.sos_quantiles.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
