//! Krichevsky–Trofimov-type plug-in bettor.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::wealth::{FractionInterval, NullSpec, PathState};

/// Constant added to `Σ (X_k − m)` in the KT numerator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KtNumerator {
    /// `1/2 + Σ (X_k − m)`.
    #[default]
    Half,
    /// `1/2 − m + Σ (X_k − m)`: the half pseudo-count estimate of the mean,
    /// `(1/2 + Σ X_k) / n`, minus `m`. On binary data its wealth is the
    /// closed-form KT mixture wealth.
    PseudoCount,
}

impl KtNumerator {
    #[inline]
    pub fn offset(self, m: f64) -> f64 {
        match self {
            KtNumerator::Half => 0.5,
            KtNumerator::PseudoCount => 0.5 - m,
        }
    }
}

/// `clip((1/2 + Σ_{k<n} (X_k − m)) / (C n))` for the upcoming round `n = state.n + 1`.
pub fn kt_fraction(state: &PathState, c: f64, null: NullSpec) -> f64 {
    kt_fraction_with(state, c, KtNumerator::Half, null.bounds(), null)
}

pub fn kt_fraction_with(
    state: &PathState,
    c: f64,
    numerator: KtNumerator,
    bounds: FractionInterval,
    null: NullSpec,
) -> f64 {
    let n = (state.n + 1) as f64;
    bounds.clip((numerator.offset(null.m()) + state.sum_dev) / (c * n))
}

/// Closed-form log-wealth of the pseudo-count KT bettor with `C = m(1 − m)`
/// after `heads` ones and `tails` zeros:
/// `log[Γ(h + 1/2) Γ(t + 1/2) / (π n! m^h (1 − m)^t)]`.
pub fn kt_binary_log_wealth(heads: u64, tails: u64, m: f64) -> f64 {
    let (h, t) = (heads as f64, tails as f64);
    ln_gamma(h + 0.5) + ln_gamma(t + 0.5) - std::f64::consts::PI.ln() - ln_gamma(h + t + 1.0)
        - h * m.ln()
        - t * (1.0 - m).ln()
}
