//! Predictable hedging: the average of a `+λ_n` and a `−λ_n` betting path,
//! with `λ_n` decaying like `(n log n)^{−1/2}`.

use crate::wealth::{NullSpec, PathState};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_CLIP: f64 = 0.5;

/// Running shrunken variance estimate
/// `σ̂²_t = (1/4 + Σ_{i≤t} (X_i − μ̂_i)²) / (t + 1)` with
/// `μ̂_i = (1/2 + Σ_{j≤i} X_j) / (i + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrunkVariance {
    t: u64,
    sum_x: f64,
    sum_sq_resid: f64,
}

impl Default for ShrunkVariance {
    fn default() -> Self {
        Self {
            t: 0,
            sum_x: 0.0,
            sum_sq_resid: 0.0,
        }
    }
}

impl ShrunkVariance {
    pub fn observe(&mut self, x: f64) {
        self.t += 1;
        self.sum_x += x;
        let mu = (0.5 + self.sum_x) / (self.t as f64 + 1.0);
        self.sum_sq_resid += (x - mu) * (x - mu);
    }

    pub fn variance(&self) -> f64 {
        (0.25 + self.sum_sq_resid) / (self.t as f64 + 1.0)
    }

    pub fn count(&self) -> u64 {
        self.t
    }
}

/// `(−C/(1−m)) ∨ sqrt(2 log(2/α) / (σ̂²_{n−1} n log(n+1))) ∧ (C/m)` for the
/// upcoming round `n = var.count() + 1`. Never negative.
pub fn prh_fraction(var: &ShrunkVariance, alpha: f64, c: f64, null: NullSpec) -> f64 {
    let n = (var.count() + 1) as f64;
    let raw = (2.0 * (2.0 / alpha).ln() / (var.variance() * n * (n + 1.0).ln())).sqrt();
    let m = null.m();
    raw.clamp(-c / (1.0 - m), c / m)
}

/// Both legs of a hedged wealth process and the variance estimator driving them.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgedState {
    pub plus: PathState,
    pub minus: PathState,
    pub var: ShrunkVariance,
    alpha: f64,
    c: f64,
}

impl HedgedState {
    pub fn new(alpha: f64, c: f64) -> Self {
        Self {
            plus: PathState::new(false),
            minus: PathState::new(false),
            var: ShrunkVariance::default(),
            alpha,
            c,
        }
    }

    /// The nonnegative `λ_n` both legs bet (with opposite signs) next round.
    /// Capped at `C/(1−m)` so that `−λ_n` respects the lower clip.
    pub fn next_lambda(&self, null: NullSpec) -> f64 {
        prh_fraction(&self.var, self.alpha, self.c, null).min(self.c / (1.0 - null.m()))
    }

    /// `log((W⁺ + W⁻)/2)`.
    pub fn log_wealth(&self) -> f64 {
        log_mean_exp2(self.plus.log_wealth, self.minus.log_wealth)
    }

    /// The single fraction that reproduces the hedged wealth as a plug-in bet:
    /// `λ (W⁺ − W⁻)/(W⁺ + W⁻)`.
    pub fn implied_fraction(&self, lambda: f64) -> f64 {
        let (a, b) = (self.plus.log_wealth, self.minus.log_wealth);
        if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
            return 0.0;
        }
        // (e^a − e^b)/(e^a + e^b) = tanh((a − b)/2)
        let t = if a == f64::NEG_INFINITY {
            -1.0
        } else if b == f64::NEG_INFINITY {
            1.0
        } else {
            ((a - b) / 2.0).tanh()
        };
        lambda * t
    }

    pub fn rounds(&self) -> u64 {
        self.plus.n
    }

    /// Advances both legs by one observation with an explicit `λ`.
    pub fn advance_with(&mut self, lambda: f64, x: f64, m: f64) {
        self.plus.advance(lambda, x, m);
        self.minus.advance(-lambda, x, m);
        self.var.observe(x);
    }
}

pub(crate) fn log_mean_exp2(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    let lo = a.min(b);
    hi + (0.5 * (1.0 + (lo - hi).exp())).ln()
}

/// One hedged round at the strategy's own `λ_n`.
pub fn hedged_update(state: &HedgedState, x: f64, null: NullSpec) -> crate::Result<HedgedState> {
    let x = crate::wealth::check_observation(x)?;
    let mut next = state.clone();
    let lambda = next.next_lambda(null);
    next.advance_with(lambda, x, null.m());
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_round_fraction_is_clipped() {
        let null = NullSpec::new(0.5).unwrap();
        let v = ShrunkVariance::default();
        assert_eq!(v.variance(), 0.25);
        let raw = (2.0 * 40f64.ln() / (0.25 * 2f64.ln())).sqrt();
        assert!((raw - 6.525).abs() < 1e-3);
        assert_eq!(prh_fraction(&v, 0.05, 0.5, null), 1.0);
    }

    #[test]
    fn fraction_positive_as_alpha_approaches_one() {
        let null = NullSpec::new(0.5).unwrap();
        let mut v = ShrunkVariance::default();
        for i in 0..1000 {
            v.observe((i % 2) as f64);
        }
        assert!(prh_fraction(&v, 0.999_999, 0.5, null) > 0.0);
    }

    #[test]
    fn fraction_decays_like_inverse_sqrt_n_log_n() {
        let null = NullSpec::new(0.5).unwrap();
        let mut v = ShrunkVariance::default();
        let mut ratios = Vec::new();
        for i in 1..=100_000u64 {
            v.observe((i % 2) as f64);
            if i % 20_000 == 0 {
                let n = (i + 1) as f64;
                ratios.push(prh_fraction(&v, 0.05, 0.5, null) * (n * (n + 1.0).ln()).sqrt());
            }
        }
        let first = ratios[0];
        for r in &ratios {
            assert!((r / first - 1.0).abs() < 0.01, "{ratios:?}");
        }
    }

    #[test]
    fn single_step_hedge_is_fair() {
        let null = NullSpec::new(0.5).unwrap();
        let mut h = HedgedState::new(0.05, 0.5);
        h.advance_with(1.0, 1.0, 0.5);
        assert!((h.log_wealth().exp() - 1.0).abs() < 1e-15);
        let h = hedged_update(&HedgedState::new(0.05, 0.5), 0.3, null).unwrap();
        assert_eq!(h.rounds(), 1);
    }

    #[test]
    fn two_step_hand_product() {
        let mut h = HedgedState::new(0.05, 0.5);
        h.advance_with(1.0, 1.0, 0.5);
        h.advance_with(1.0, 0.0, 0.5);
        assert!((h.log_wealth().exp() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn zero_fraction_is_flat() {
        let mut h = HedgedState::new(0.05, 0.5);
        for x in [0.0, 1.0, 0.2, 0.9] {
            h.advance_with(0.0, x, 0.5);
            assert_eq!(h.log_wealth(), 0.0);
        }
    }
}
