//! Opportunistic leverage of a plug-in strategy.
//!
//! When the shadow strategy's next-round minimum wealth `Ŵ_n` exceeds `ρ`,
//! the leveraged strategy bets `γ_n = W_{n−1} λ_n / (W_{n−1} − ρ)`, which is
//! the fraction of borrowing `ρ/(1−ρ)` and investing everything in the shadow
//! strategy. Otherwise it bets `λ_n` unchanged. As long as every round took
//! the leveraged branch, `W♯_n = (W_n − ρ)/(1 − ρ)`.

use crate::wealth::min_multiplier;

pub const DEFAULT_RHO: f64 = 0.1;

/// The leveraged fraction and whether the event `Ŵ_n > ρ` held.
///
/// `w_prev` is the shadow wealth `W_{n−1}`, `lambda` the shadow fraction `λ_n`.
pub fn leveraged_fraction(w_prev: f64, lambda: f64, rho: f64, m: f64) -> (f64, bool) {
    let min_wealth = w_prev * min_multiplier(lambda, m);
    if min_wealth > rho {
        (w_prev * lambda / (w_prev - rho), true)
    } else {
        (lambda, false)
    }
}
