//! Pathwise comparison of a strategy with its opportunistically leveraged version.

use serde::{Deserialize, Serialize};

use super::ensemble::{run_paths, ExperimentConfig};
use super::real;
use super::seed::{hash64, path_rng};
use crate::error::Result;
use crate::strategies::{opportunistic_leverage, Strategy};
use crate::wealth::{min_multiplier, NullSpec};

/// `W_n` is "at 1" inside this band for the order relations.
pub const UNIT_BAND: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeverageTrace {
    /// `Ŵ_k > ρ` held at every round.
    pub pnb: bool,
    /// Rounds before the first `Ŵ_k ≤ ρ`.
    pub rounds_on_event: u64,
    /// `max |W♯ − (W − ρ)/(1 − ρ)| / |(W − ρ)/(1 − ρ)|` while the event held.
    #[serde(with = "real")]
    pub max_rel_dev: f64,
    /// Rounds on the event with `W > 1` but `W♯ ≤ W`.
    pub alt_violations: u64,
    /// Rounds on the event with `W < 1` but `W♯ ≥ W`.
    pub null_violations: u64,
    #[serde(with = "real::vec")]
    pub wealth: Vec<f64>,
    #[serde(with = "real::vec")]
    pub leveraged_wealth: Vec<f64>,
}

/// Runs `strategy` and its `ρ`-leveraged version side by side on `xs`.
pub fn leverage_trace(
    strategy: &Strategy,
    null: NullSpec,
    rho: f64,
    xs: impl IntoIterator<Item = f64>,
    checkpoints: &[u64],
) -> Result<LeverageTrace> {
    let mut shadow = strategy.bettor(null)?;
    let mut lev = opportunistic_leverage(strategy.clone(), rho).bettor(null)?;
    let mut t = LeverageTrace {
        pnb: true,
        rounds_on_event: 0,
        max_rel_dev: 0.0,
        alt_violations: 0,
        null_violations: 0,
        wealth: Vec::with_capacity(checkpoints.len()),
        leveraged_wealth: Vec::with_capacity(checkpoints.len()),
    };
    let mut next_ck = checkpoints.iter().peekable();
    for (i, x) in xs.into_iter().enumerate() {
        let n = i as u64 + 1;
        let w_prev = shadow.log_wealth().exp();
        let lambda = shadow.fraction();
        if t.pnb && w_prev * min_multiplier(lambda, null.m()) <= rho {
            t.pnb = false;
        }
        shadow.observe(x);
        lev.observe(x);
        let w = shadow.log_wealth().exp();
        let w_sharp = lev.log_wealth().exp();
        if t.pnb {
            t.rounds_on_event = n;
            let target = (w - rho) / (1.0 - rho);
            t.max_rel_dev = t.max_rel_dev.max((w_sharp - target).abs() / target.abs());
            if w > 1.0 + UNIT_BAND && w_sharp <= w {
                t.alt_violations += 1;
            }
            if w < 1.0 - UNIT_BAND && w_sharp >= w {
                t.null_violations += 1;
            }
        }
        if next_ck.peek() == Some(&&n) {
            next_ck.next();
            t.wealth.push(w);
            t.leveraged_wealth.push(w_sharp);
        }
    }
    Ok(t)
}

/// [`leverage_trace`] over an ensemble; the config's strategy is the shadow.
pub fn run_leverage(config: &ExperimentConfig, rho: f64, workers: usize) -> Result<Vec<LeverageTrace>> {
    config.validate()?;
    let null = config.null()?;
    opportunistic_leverage(config.strategy.clone(), rho).bettor(null)?;
    let sampler = config.dist.sampler()?;
    run_paths(config.paths, workers, |i| {
        let mut rng = path_rng(hash64(config.master_seed, i));
        let xs = (0..config.horizon).map(|_| sampler.draw(&mut rng));
        leverage_trace(&config.strategy, null, rho, xs, &config.checkpoints)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::fixed_fraction;

    #[test]
    fn identity_on_a_short_path() {
        let null = NullSpec::new(0.5).unwrap();
        let t = leverage_trace(&fixed_fraction(0.3), null, 0.5, [1.0, 1.0, 0.0, 1.0], &[4]).unwrap();
        assert!(t.pnb);
        assert!(t.max_rel_dev < 1e-12);
        assert_eq!((t.alt_violations, t.null_violations), (0, 0));
        let w = 1.15f64.powi(3) * 0.85;
        assert!((t.wealth[0] - w).abs() < 1e-12);
        assert!((t.leveraged_wealth[0] - (w - 0.5) / 0.5).abs() < 1e-12);
    }

    #[test]
    fn event_fails_when_the_shadow_can_drop_below_rho() {
        let null = NullSpec::new(0.5).unwrap();
        let t = leverage_trace(&fixed_fraction(1.5), null, 0.4, [1.0, 0.0], &[]).unwrap();
        assert!(!t.pnb);
        assert_eq!(t.rounds_on_event, 0);
    }
}
