//! Cross-path statistics.

use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};

/// Probability levels of the reported quantiles.
pub const QUANTILE_LEVELS: [f64; 7] = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99];

/// Linear-interpolation quantile of already sorted data. NaN for empty input.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    let (a, b) = (sorted[lo], sorted[hi]);
    if lo == hi || a == b {
        return a;
    }
    if a.is_infinite() {
        return a;
    }
    if b.is_infinite() {
        return b;
    }
    a +(h - lo as f64) * (b - a)
}

pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn quantile(values: &[f64], p: f64) -> f64 {
    quantile_sorted(&sorted(values), p)
}

pub fn quantiles(values: &[f64], levels: &[f64]) -> Vec<f64> {
    let s = sorted(values);
    levels.iter().map(|&p| quantile_sorted(&s, p)).collect()
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance.
pub fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mu = mean(values);
    values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n - 1.0)
}

/// `χ²(1)` CDF, `P(a/2, x/2)` with the regularized lower incomplete gamma.
pub fn chi2_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x == f64::INFINITY {
        1.0
    } else {
        gamma_lr(0.5, 0.5 * x)
    }
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let s = sorted(samples);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// Fraction of paths whose running supremum reached `x`.
pub fn ville_violation_rate(sup_wealths: &[f64], x: f64) -> f64 {
    if sup_wealths.is_empty() {
        return 0.0;
    }
    sup_wealths.iter().filter(|&&w| w >= x).count() as f64 / sup_wealths.len() as f64
}

/// `H_n = Σ_{k≤n} 1/k`.
pub fn harmonic(n: u64) -> f64 {
    (1..=n).rev().map(|k| 1.0 / k as f64).sum()
}

/// `KL(Bern(p) ‖ Bern(q))` in nats.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    term(p, q) + term(1.0 - p, 1.0 - q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_basics() {
        let v = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(median(&v), 2.5);
        let q = quantiles(&[0.0, f64::NEG_INFINITY, 1.0], &QUANTILE_LEVELS);
        assert!(q.windows(2).all(|w| w[0] <= w[1]));
        assert!(quantile(&[], 0.5).is_nan());
        assert_eq!(quantile(&[f64::NEG_INFINITY, f64::NEG_INFINITY], 0.5), f64::NEG_INFINITY);
    }

    #[test]
    fn chi2_median() {
        assert!((chi2_cdf(0.4549) - 0.5).abs() < 1e-3);
        assert!((chi2_cdf(3.841458820694124) - 0.95).abs() < 1e-10);
        assert_eq!(chi2_cdf(0.0), 0.0);
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_distance(&[0.0; 10], chi2_cdf).unwrap(), 1.0);
        assert!(ks_distance(&[], chi2_cdf).is_err());
        // uniform grid of quantiles
        let n = 999;
        let xs: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
        let d = ks_distance(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= 1.0 / (n + 1) as f64 + 1e-12);
    }

    #[test]
    fn ville_examples() {
        assert_eq!(ville_violation_rate(&[1.0; 8], 2.0), 0.0);
        assert_eq!(ville_violation_rate(&[1.5, 3.0, 0.0, 2.0], 2.0), 0.5);
    }

    #[test]
    fn closed_forms() {
        assert!((bernoulli_kl(0.6, 0.5) - 0.020135513550688863).abs() < 1e-12);
        assert!((harmonic(10_000) * 0.25 - 2.4472).abs() < 1e-3);
    }
}
