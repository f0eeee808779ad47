//! Wealth accounting for a single betting path.
//!
//! A path bets a fraction `λ_n` of its current wealth on the outcome
//! `X_n − m`, so wealth evolves as `W_n = W_{n−1} · (1 + λ_n (X_n − m))`.
//! Wealth is held in the log domain; `−∞` is exact bankruptcy and is
//! absorbing.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A multiplier at or below this value is treated as an exact all-in loss.
pub const TOL_ZERO: f64 = 1e-300;

/// Observations this far outside `[0, 1]` are clamped; further out they are rejected.
pub const OBS_TOL: f64 = 1e-12;

/// The hypothesized mean `m` of the null `H0: μ(P) = m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullSpec {
    m: f64,
}

impl NullSpec {
    pub fn new(m: f64) -> Result<Self> {
        if m.is_finite() && m > 0.0 && m < 1.0 {
            Ok(Self { m })
        } else {
            Err(Error::NullMean(m))
        }
    }

    #[inline]
    pub fn m(&self) -> f64 {
        self.m
    }

    #[inline]
    pub fn bounds(&self) -> FractionInterval {
        FractionInterval {
            lo: -1.0 / (1.0 - self.m),
            hi: 1.0 / self.m,
        }
    }
}

/// The legal bet fractions `[−1/(1−m), 1/m]` for a null mean `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionInterval {
    pub lo: f64,
    pub hi: f64,
}

impl FractionInterval {
    #[inline]
    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.lo && lambda <= self.hi
    }

    #[inline]
    pub fn clip(&self, lambda: f64) -> f64 {
        lambda.clamp(self.lo, self.hi)
    }

    /// Both endpoints multiplied by `scale`.
    pub fn scaled(&self, scale: f64) -> FractionInterval {
        FractionInterval {
            lo: self.lo * scale,
            hi: self.hi * scale,
        }
    }
}

pub fn fraction_bounds(null: NullSpec) -> FractionInterval {
    null.bounds()
}

/// Validates an observation, clamping values within [`OBS_TOL`] of the unit interval.
pub fn check_observation(x: f64) -> Result<f64> {
    if x.is_nan() || !(-OBS_TOL..=1.0 + OBS_TOL).contains(&x) {
        return Err(Error::Observation(x));
    }
    Ok(x.clamp(0.0, 1.0))
}

pub(crate) fn check_fraction(lambda: f64, null: NullSpec) -> Result<f64> {
    let b = null.bounds();
    if !lambda.is_finite() || !b.contains(lambda) {
        return Err(Error::FractionOutOfRange {
            lambda,
            lo: b.lo,
            hi: b.hi,
        });
    }
    Ok(lambda)
}

/// The observation multiset seen so far, stored as distinct values with counts.
///
/// Discrete data (the Bernoulli case in particular) therefore costs O(1)
/// memory no matter how long the path runs.
#[derive(Debug, Clone, Default)]
pub struct History {
    values: Vec<f64>,
    counts: Vec<u64>,
    index: Option<HashMap<u64, usize>>,
    len: u64,
}

const LINEAR_SCAN: usize = 16;

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_observations(xs: &[f64]) -> Self {
        let mut h = Self::new();
        for &x in xs {
            h.push(x);
        }
        h
    }

    pub fn push(&mut self, x: f64) {
        self.push_n(x, 1);
    }

    pub fn push_n(&mut self, x: f64, count: u64) {
        if count == 0 {
            return;
        }
        self.len += count;
        let key = x.to_bits();
        let slot = match &self.index {
            Some(map) => map.get(&key).copied(),
            None => self.values.iter().position(|v| v.to_bits() == key),
        };
        match slot {
            Some(i) => self.counts[i] += count,
            None => {
                self.values.push(x);
                self.counts.push(count);
                let i = self.values.len() - 1;
                if let Some(map) = &mut self.index {
                    map.insert(key, i);
                } else if self.values.len() > LINEAR_SCAN {
                    let map = self
                        .values
                        .iter()
                        .enumerate()
                        .map(|(i, v)| (v.to_bits(), i))
                        .collect();
                    self.index = Some(map);
                }
            }
        }
    }

    /// Total number of observations.
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn distinct(&self) -> usize {
        self.values.len()
    }

    /// Distinct values with their multiplicities, in first-seen order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        self.values.iter().copied().zip(self.counts.iter().copied())
    }
}

impl PartialEq for History {
    fn eq(&self, other: &Self) -> bool {
        self.values.len() == other.values.len()
            && self.iter().all(|(v, c)| {
                other
                    .iter()
                    .any(|(w, d)| w.to_bits() == v.to_bits() && d == c)
            })
    }
}

/// Running sufficient statistics of one betting path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    pub n: u64,
    /// `log W_n`; `−∞` once bankrupt.
    pub log_wealth: f64,
    pub bankrupt: bool,
    /// `Σ (X_k − m)`.
    pub sum_dev: f64,
    /// `Σ (X_k − m)²`.
    pub sum_sq_dev: f64,
    pub sum_x: f64,
    pub sum_x_sq: f64,
    /// `Σ λ_k²` over the fractions actually bet.
    pub sum_lambda_sq: f64,
    pub history: Option<History>,
}

impl Default for PathState {
    fn default() -> Self {
        Self::new(false)
    }
}

impl PathState {
    pub fn new(keep_history: bool) -> Self {
        Self {
            n: 0,
            log_wealth: 0.0,
            bankrupt: false,
            sum_dev: 0.0,
            sum_sq_dev: 0.0,
            sum_x: 0.0,
            sum_x_sq: 0.0,
            sum_lambda_sq: 0.0,
            history: keep_history.then(History::new),
        }
    }

    #[inline]
    pub fn wealth(&self) -> f64 {
        self.log_wealth.exp()
    }

    /// Checked in-place update; see [`wealth_update`].
    pub fn update(&mut self, lambda: f64, x: f64, null: NullSpec) -> Result<()> {
        let lambda = check_fraction(lambda, null)?;
        let x = check_observation(x)?;
        self.advance(lambda, x, null.m());
        Ok(())
    }

    /// Unchecked update for callers that already guarantee a legal fraction
    /// and a unit-interval observation.
    #[inline]
    pub fn advance(&mut self, lambda: f64, x: f64, m: f64) {
        let dev = x - m;
        let g = 1.0 + lambda * dev;
        if !self.bankrupt {
            if g <= TOL_ZERO {
                self.bankrupt = true;
                self.log_wealth = f64::NEG_INFINITY;
            } else {
                self.log_wealth += g.ln();
            }
        }
        self.n += 1;
        self.sum_dev += dev;
        self.sum_sq_dev += dev * dev;
        self.sum_x += x;
        self.sum_x_sq += x * x;
        self.sum_lambda_sq += lambda * lambda;
        if let Some(h) = &mut self.history {
            h.push(x);
        }
    }
}

/// One round of betting `lambda` on observation `x`.
///
/// A multiplier `1 + λ(x − m)` at or below [`TOL_ZERO`] makes the state
/// bankrupt. Bankrupt states keep accumulating the data statistics but their
/// wealth stays at zero.
pub fn wealth_update(state: &PathState, lambda: f64, x: f64, null: NullSpec) -> Result<PathState> {
    let mut next = state.clone();
    next.update(lambda, x, null)?;
    Ok(next)
}

/// `min(1 − λm, 1 + λ(1 − m))`: the worst one-round multiplier over `x ∈ [0, 1]`.
#[inline]
pub fn min_multiplier(lambda: f64, m: f64) -> f64 {
    (1.0 - lambda * m).min(1.0 + lambda * (1.0 - m))
}

/// `Ŵ_n = W_{n−1} · min_x (1 + λ_n (x − m))`, the smallest wealth the next
/// round can produce.
pub fn predictable_min_wealth(state: &PathState, lambda_next: f64, null: NullSpec) -> Result<f64> {
    let lambda = check_fraction(lambda_next, null)?;
    if state.bankrupt {
        return Ok(0.0);
    }
    Ok(state.wealth() * min_multiplier(lambda, null.m()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn null(m: f64) -> NullSpec {
        NullSpec::new(m).unwrap()
    }

    fn state_with_wealth(w: f64) -> PathState {
        let mut s = PathState::new(false);
        s.log_wealth = w.ln();
        s
    }

    #[test]
    fn bounds_examples() {
        let b = fraction_bounds(null(0.5));
        assert_eq!((b.lo, b.hi), (-2.0, 2.0));
        let b = fraction_bounds(null(0.25));
        assert!((b.lo + 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(b.hi, 4.0);
        let b = fraction_bounds(null(0.9));
        assert!((b.lo + 10.0).abs() < 1e-12);
        assert!((b.hi - 10.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn null_mean_domain() {
        for m in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(NullSpec::new(m), Err(Error::NullMean(_))));
        }
    }

    #[test]
    fn all_in_loss_is_bankruptcy() {
        let s = wealth_update(&PathState::new(false), 2.0, 0.0, null(0.5)).unwrap();
        assert!(s.bankrupt);
        assert_eq!(s.log_wealth, f64::NEG_INFINITY);
        assert_eq!(s.n, 1);
    }

    #[test]
    fn no_bet_keeps_wealth() {
        for x in [0.0, 0.3, 1.0] {
            let s = wealth_update(&PathState::new(false), 0.0, x, null(0.5)).unwrap();
            assert_eq!(s.wealth(), 1.0);
        }
    }

    #[test]
    fn simple_win() {
        let s = wealth_update(&PathState::new(false), 1.0, 0.75, null(0.5)).unwrap();
        assert!((s.wealth() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        let s = PathState::new(false);
        assert!(matches!(
            wealth_update(&s, 2.5, 0.5, null(0.5)),
            Err(Error::FractionOutOfRange { .. })
        ));
        assert!(matches!(
            wealth_update(&s, 0.1, 1.1, null(0.5)),
            Err(Error::Observation(_))
        ));
        assert!(wealth_update(&s, 0.1, 1.0 + 1e-13, null(0.5)).is_ok());
        assert!(wealth_update(&s, 0.1, -1e-13, null(0.5)).is_ok());
    }

    #[test]
    fn bankruptcy_is_absorbing() {
        let mut s = PathState::new(false);
        s.update(2.0, 0.0, null(0.5)).unwrap();
        for x in [1.0, 1.0, 1.0] {
            s.update(2.0, x, null(0.5)).unwrap();
            assert!(s.bankrupt);
            assert_eq!(s.log_wealth, f64::NEG_INFINITY);
        }
        assert_eq!(s.n, 4);
        assert_eq!(s.sum_lambda_sq, 16.0);
    }

    #[test]
    fn min_wealth_examples() {
        let n = null(0.5);
        let w = predictable_min_wealth(&state_with_wealth(1.0), 0.3, n).unwrap();
        assert!((w - 0.85).abs() < 1e-15);
        assert_eq!(predictable_min_wealth(&state_with_wealth(1.0), 0.0, n).unwrap(), 1.0);
        let w = predictable_min_wealth(&state_with_wealth(2.0), -1.0, n).unwrap();
        assert!((w - 1.0).abs() < 1e-15);
    }

    #[test]
    fn history_counts() {
        let h = History::from_observations(&[1.0, 0.0, 1.0, 1.0]);
        assert_eq!(h.len(), 4);
        assert_eq!(h.distinct(), 2);
        let ones = h.iter().find(|(v, _)| *v == 1.0).unwrap().1;
        assert_eq!(ones, 3);
        let many: Vec<f64> = (0..100).map(|i| (i % 40) as f64 / 40.0).collect();
        let h = History::from_observations(&many);
        assert_eq!(h.distinct(), 40);
        assert!(h.iter().all(|(_, c)| c >= 2));
    }
}
