//! Confidence sequences for the mean by inverting betting tests.

use serde::{Deserialize, Serialize};

use super::dist::DistSpec;
use super::ensemble::{check_checkpoints, run_paths};
use super::real;
use super::seed::{hash64, path_rng};
use crate::error::{param, Error, Result};
use crate::strategies::Strategy;
use crate::wealth::NullSpec;

/// Interval endpoints at one checkpoint; NaN endpoints mean an empty set
/// (or, for the instantaneous set, not computed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfSeqRow {
    pub n: u64,
    /// Hull of `{m : W_n(m) ≤ 1/α}`.
    #[serde(with = "real")]
    pub lo: f64,
    #[serde(with = "real")]
    pub hi: f64,
    /// Hull of the running intersection `∩_{k≤n} CI_k`.
    #[serde(with = "real")]
    pub run_lo: f64,
    #[serde(with = "real")]
    pub run_hi: f64,
}

impl ConfSeqRow {
    pub fn running_covers(&self, mu: f64) -> bool {
        self.run_lo <= mu && mu <= self.run_hi
    }
}

/// Grid `step, 2·step, …` strictly inside `(0, 1)`.
pub fn confseq_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step < 0.5) {
        return Err(param(format!("grid step must lie in (0, 0.5), got {step}")));
    }
    Ok((1..)
        .map(|i| i as f64 * step)
        .take_while(|&m| m < 1.0 - 0.5 * step)
        .collect())
}

fn hull(grid: &[f64], keep: impl Fn(usize) -> bool) -> (f64, f64) {
    let mut it = (0..grid.len()).filter(|&i| keep(i));
    match it.next() {
        None => (f64::NAN, f64::NAN),
        Some(first) => {
            let last = it.last().unwrap_or(first);
            (grid[first], grid[last])
        }
    }
}

/// Re-runs `family` at every grid mean on `path`. With `instantaneous = false`
/// a mean is dropped at its first rejection and `lo`/`hi` are NaN.
pub fn invert_confidence_set(
    path: &[f64],
    alpha: f64,
    grid_step: f64,
    family: &Strategy,
    checkpoints: &[u64],
    instantaneous: bool,
) -> Result<Vec<ConfSeqRow>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(param(format!("α must lie in (0, 1), got {alpha}")));
    }
    check_checkpoints(checkpoints, path.len() as u64)?;
    let grid = confseq_grid(grid_step)?;
    let threshold = (1.0 / alpha).ln();
    // first rejection round per grid point (u64::MAX = never)
    let mut rejected_at = vec![u64::MAX; grid.len()];
    let mut inside = vec![vec![true; grid.len()]; if instantaneous { checkpoints.len() } else { 0 }];
    for (g, &m) in grid.iter().enumerate() {
        let mut bettor = family.bettor(NullSpec::new(m)?)?;
        let mut ck = 0;
        while ck < checkpoints.len() && checkpoints[ck] == 0 {
            ck += 1;
        }
        for (i, &x) in path.iter().enumerate() {
            let n = i as u64 + 1;
            bettor.observe(x);
            let reject = bettor.log_wealth() > threshold;
            if reject && rejected_at[g] == u64::MAX {
                rejected_at[g] = n;
                if !instantaneous {
                    break;
                }
            }
            if ck < checkpoints.len() && checkpoints[ck] == n {
                if instantaneous {
                    inside[ck][g] = !reject;
                }
                ck += 1;
                if ck == checkpoints.len() {
                    break;
                }
            }
        }
    }
    Ok(checkpoints
        .iter()
        .enumerate()
        .map(|(ck, &n)| {
            let (run_lo, run_hi) = hull(&grid, |g| rejected_at[g] > n);
            let (lo, hi) = if instantaneous {
                hull(&grid, |g| inside[ck][g])
            } else {
                (f64::NAN, f64::NAN)
            };
            ConfSeqRow {
                n,
                lo,
                hi,
                run_lo,
                run_hi,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfSeqConfig {
    pub dist: DistSpec,
    pub family: Strategy,
    pub alpha: f64,
    pub grid_step: f64,
    pub horizon: u64,
    pub paths: u64,
    pub checkpoints: Vec<u64>,
    pub master_seed: u64,
    #[serde(default)]
    pub instantaneous: bool,
}

pub fn run_confseq(config: &ConfSeqConfig, workers: usize) -> Result<Vec<Vec<ConfSeqRow>>> {
    config.dist.validate()?;
    if !config.dist.is_bounded() {
        return Err(Error::Config("betting needs observations in [0, 1]".into()));
    }
    check_checkpoints(&config.checkpoints, config.horizon)?;
    let sampler = config.dist.sampler()?;
    run_paths(config.paths, workers, |i| {
        let mut rng = path_rng(hash64(config.master_seed, i));
        let path: Vec<f64> = (0..config.horizon).map(|_| sampler.draw(&mut rng)).collect();
        invert_confidence_set(
            &path,
            config.alpha,
            config.grid_step,
            &config.family,
            &config.checkpoints,
            config.instantaneous,
        )
    })
}
