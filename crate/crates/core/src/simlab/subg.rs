//! Ensembles of sub-Gaussian test processes.

use serde::{Deserialize, Serialize};

use super::dist::DistSpec;
use super::ensemble::{check_checkpoints, run_paths};
use super::real;
use super::seed::{hash64, path_rng};
use crate::error::{Error, Result};
use crate::subgaussian::{subg_atom_mixture, SubgState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubgRule {
    /// Plug-in `λ_k = m + k^{−power}`.
    Plugin { power: f64 },
    /// `atom · δ_m + (1 − atom) · Normal(m, τ²)`.
    Mixture { atom: f64, tau: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubgConfig {
    pub dist: DistSpec,
    pub m: f64,
    pub rule: SubgRule,
    pub horizon: u64,
    pub paths: u64,
    pub checkpoints: Vec<u64>,
    pub master_seed: u64,
}

impl SubgConfig {
    pub fn validate(&self) -> Result<()> {
        self.dist.validate()?;
        if !self.m.is_finite() {
            return Err(Error::Config("null mean must be finite".into()));
        }
        match self.rule {
            SubgRule::Plugin { power } if !power.is_finite() => {
                return Err(Error::Config("plug-in power must be finite".into()))
            }
            SubgRule::Mixture { atom, tau } if !((0.0..=1.0).contains(&atom) && tau > 0.0) => {
                return Err(Error::Config("mixture needs atom in [0, 1] and τ > 0".into()))
            }
            _ => {}
        }
        check_checkpoints(&self.checkpoints, self.horizon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgPath {
    /// `log M_n` at each checkpoint.
    #[serde(with = "real::vec")]
    pub log_m: Vec<f64>,
    #[serde(with = "real")]
    pub sum_lambda_dev_sq: f64,
}

fn simulate(config: &SubgConfig, index: u64) -> Result<SubgPath> {
    let sampler = config.dist.sampler()?;
    let mut rng = path_rng(hash64(config.master_seed, index));
    let m = config.m;
    let mut state = SubgState::new();
    let mut log_m = Vec::with_capacity(config.checkpoints.len());
    let mut next_ck = config.checkpoints.iter().peekable();
    for n in 1..=config.horizon {
        let x = sampler.draw(&mut rng);
        let lambda = match config.rule {
            SubgRule::Plugin { power } => m + (n as f64).powf(-power),
            SubgRule::Mixture { .. } => m,
        };
        state.observe(lambda, x, m);
        if next_ck.peek() == Some(&&n) {
            next_ck.next();
            log_m.push(match config.rule {
                SubgRule::Plugin { .. } => state.log_m,
                SubgRule::Mixture { atom, tau } => subg_atom_mixture(&state, atom, tau, m).ln(),
            });
        }
    }
    Ok(SubgPath {
        log_m,
        sum_lambda_dev_sq: state.sum_lambda_dev_sq,
    })
}

pub fn run_subg(config: &SubgConfig, workers: usize) -> Result<Vec<SubgPath>> {
    config.validate()?;
    run_paths(config.paths, workers, |i| simulate(config, i))
}
