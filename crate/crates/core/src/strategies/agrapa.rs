//! Approximate GRAPA: a clipped moment-based fraction.

use crate::wealth::{NullSpec, PathState};

pub const DEFAULT_CLIP: f64 = 0.5;

/// `(−C/(1−m)) ∨ (μ̂ − m)/(σ̂² + (μ̂ − m)²) ∧ (C/m)` from the `state.n` observations so far.
///
/// With the population variance `σ̂²`, the denominator equals the mean of
/// `(X_k − m)²`, so the raw fraction is `Σ(X_k − m) / Σ(X_k − m)²`.
pub fn agrapa_fraction(state: &PathState, c: f64, null: NullSpec) -> f64 {
    if state.n == 0 || state.sum_sq_dev <= 0.0 {
        return 0.0;
    }
    let raw = state.sum_dev / state.sum_sq_dev;
    let m = null.m();
    raw.clamp(-c / (1.0 - m), c / m)
}
