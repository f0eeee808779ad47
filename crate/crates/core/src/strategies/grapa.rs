//! Follow-the-leader (GRAPA) fraction: the hindsight-optimal fixed fraction.
//!
//! The objective `λ ↦ Σ_k log(1 + λ(X_k − m))` is concave on the fraction
//! interval, so its derivative is decreasing and the maximizer is located
//! by a bracketed Newton iteration on the derivative. The objective is `−∞`
//! at `1/m` if some `X_k = 0` and at `−1/(1−m)` if some `X_k = 1`; those
//! endpoints are never returned.

use crate::wealth::{FractionInterval, History, NullSpec};

pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_ITER: usize = 200;

/// `Σ_k log(1 + λ(X_k − m))` over the history (`−∞` where some term is ≤ 0).
pub fn log_wealth_at(history: &History, lambda: f64, m: f64) -> f64 {
    let mut total = 0.0;
    for (x, c) in history.iter() {
        let g = 1.0 + lambda * (x - m);
        if g <= 0.0 {
            return f64::NEG_INFINITY;
        }
        total += c as f64 * g.ln();
    }
    total
}

/// First and second derivative of the objective; `None` when some term's
/// argument is not positive.
fn derivatives(history: &History, lambda: f64, m: f64) -> Option<(f64, f64)> {
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for (x, c) in history.iter() {
        let d = x - m;
        let g = 1.0 + lambda * d;
        if g <= 0.0 {
            return None;
        }
        let r = d / g;
        d1 += c as f64 * r;
        d2 -= c as f64 * r * r;
    }
    Some((d1, d2))
}

/// Maximizer over the closed fraction interval, to absolute accuracy `tol`.
pub fn grapa_fraction(history: &History, null: NullSpec, tol: f64) -> f64 {
    grapa_fraction_in(history, null, null.bounds(), tol)
}

/// Maximizer over a sub-interval `bounds` of the fraction interval.
pub fn grapa_fraction_in(history: &History, null: NullSpec, bounds: FractionInterval, tol: f64) -> f64 {
    let m = null.m();
    if history.is_empty() {
        return 0.0;
    }
    let slope0: f64 = history.iter().map(|(x, c)| c as f64 * (x - m)).sum();
    if slope0 == 0.0 {
        return 0.0;
    }
    // The root lies on the side of 0 that the slope at 0 points to.
    let (inner, outer): (f64, f64) = if slope0 > 0.0 {
        (0.0, bounds.hi)
    } else {
        (0.0, bounds.lo)
    };
    if let Some((d1, _)) = derivatives(history, outer, m) {
        if d1 * slope0 >= 0.0 {
            return outer;
        }
    }

    // Bracket [a, b] with f'(a) having the sign of slope0 and f'(b) the opposite
    // (or the objective undefined at b).
    let (mut a, mut b) = (inner, outer);
    let sum_sq: f64 = history.iter().map(|(x, c)| c as f64 * (x - m) * (x - m)).sum();
    let mut lam = (slope0 / sum_sq).clamp(a.min(b), a.max(b));
    if lam == b {
        lam = 0.5 * (a + b);
    }
    for _ in 0..MAX_ITER {
        let step = match derivatives(history, lam, m) {
            Some((d1, d2)) => {
                if d1 == 0.0 {
                    return lam;
                }
                if (d1 > 0.0) == (slope0 > 0.0) {
                    a = lam;
                } else {
                    b = lam;
                }
                let newton = lam - d1 / d2;
                let inside = if a < b {
                    newton > a && newton < b
                } else {
                    newton < a && newton > b
                };
                if inside && d2 < 0.0 {
                    newton - lam
                } else {
                    0.5 * (a + b) - lam
                }
            }
            None => {
                b = lam;
                0.5 * (a + b) - lam
            }
        };
        lam += step;
        if step.abs() <= tol * 0.5 || (b - a).abs() <= tol {
            break;
        }
    }
    bounds.clip(lam)
}
