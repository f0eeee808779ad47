//! Observation distributions and seeded samplers.

use rand::Rng;
use rand_distr::{Beta, Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::seed::path_rng;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistSpec {
    Bernoulli { p: f64 },
    /// `Beta(a, b)` on `[0, 1]`.
    ScaledBeta { a: f64, b: f64 },
    DiscreteOn01 { points: Vec<f64>, probs: Vec<f64> },
    PointMass { m: f64 },
    Normal { mu: f64, sigma: f64 },
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Distribution(msg.into())
}

impl DistSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DistSpec::Bernoulli { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(bad(format!("Bernoulli p = {p} outside [0, 1]")));
                }
            }
            DistSpec::ScaledBeta { a, b } => {
                if !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) {
                    return Err(bad(format!("Beta shapes must be positive, got ({a}, {b})")));
                }
            }
            DistSpec::DiscreteOn01 { points, probs } => {
                if points.is_empty() || points.len() != probs.len() {
                    return Err(bad("points and probs must be nonempty and of equal length"));
                }
                if points.iter().any(|x| !(0.0..=1.0).contains(x)) {
                    return Err(bad("support points must lie in [0, 1]"));
                }
                if probs.iter().any(|p| !(*p >= 0.0)) {
                    return Err(bad("probabilities must be nonnegative"));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(bad(format!("probabilities sum to {total}, not 1")));
                }
            }
            DistSpec::PointMass { m } => {
                if !m.is_finite() {
                    return Err(bad("point mass location must be finite"));
                }
            }
            DistSpec::Normal { mu, sigma } => {
                if !mu.is_finite() || !(*sigma >= 0.0) || !sigma.is_finite() {
                    return Err(bad(format!("Normal({mu}, {sigma}) is invalid")));
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match self {
            DistSpec::Bernoulli { p } => *p,
            DistSpec::ScaledBeta { a, b } => a / (a + b),
            DistSpec::DiscreteOn01 { points, probs } => {
                points.iter().zip(probs).map(|(x, p)| x * p).sum()
            }
            DistSpec::PointMass { m } => *m,
            DistSpec::Normal { mu, .. } => *mu,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            DistSpec::Bernoulli { p } => p * (1.0 - p),
            DistSpec::ScaledBeta { a, b } => a * b / ((a + b) * (a + b) * (a + b + 1.0)),
            DistSpec::DiscreteOn01 { points, probs } => {
                let mu = self.mean();
                points.iter().zip(probs).map(|(x, p)| p * (x - mu) * (x - mu)).sum()
            }
            DistSpec::PointMass { .. } => 0.0,
            DistSpec::Normal { sigma, .. } => sigma * sigma,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.variance() == 0.0
    }

    /// Support inside `[0, 1]`.
    pub fn is_bounded(&self) -> bool {
        match self {
            DistSpec::Normal { .. } => false,
            DistSpec::PointMass { m } => (0.0..=1.0).contains(m),
            _ => true,
        }
    }

    pub fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        Ok(match self {
            DistSpec::Bernoulli { p } => Sampler::Bernoulli(*p),
            DistSpec::ScaledBeta { a, b } => {
                Sampler::Beta(Beta::new(*a, *b).map_err(|e| bad(e.to_string()))?)
            }
            DistSpec::DiscreteOn01 { points, probs } => {
                let mut acc = 0.0;
                let cdf = probs
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
                Sampler::Discrete {
                    points: points.clone(),
                    cdf,
                }
            }
            DistSpec::PointMass { m } => Sampler::Point(*m),
            DistSpec::Normal { mu, sigma } => {
                Sampler::Normal(Normal::new(*mu, *sigma).map_err(|e| bad(e.to_string()))?)
            }
        })
    }
}

/// A validated, ready-to-draw distribution.
#[derive(Debug, Clone)]
pub enum Sampler {
    Bernoulli(f64),
    Beta(Beta<f64>),
    Discrete { points: Vec<f64>, cdf: Vec<f64> },
    Point(f64),
    Normal(Normal<f64>),
}

impl Sampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Bernoulli(p) => {
                if rng.random::<f64>() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            Sampler::Beta(d) => d.sample(rng),
            Sampler::Discrete { points, cdf } => {
                let u: f64 = rng.random();
                let i = cdf.partition_point(|&c| c <= u).min(points.len() - 1);
                points[i]
            }
            Sampler::Point(m) => *m,
            Sampler::Normal(d) => d.sample(rng),
        }
    }
}

/// `n` observations from `dist`, a pure function of `(dist, n, path_seed)`.
pub fn sample_path(dist: &DistSpec, n: usize, path_seed: u64) -> Result<Vec<f64>> {
    let s = dist.sampler()?;
    let mut rng = path_rng(path_seed);
    Ok((0..n).map(|_| s.draw(&mut rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_paths() {
        assert_eq!(sample_path(&DistSpec::PointMass { m: 0.5 }, 3, 1).unwrap(), vec![0.5; 3]);
        assert_eq!(sample_path(&DistSpec::Bernoulli { p: 1.0 }, 3, 1).unwrap(), vec![1.0; 3]);
        assert_eq!(sample_path(&DistSpec::Bernoulli { p: 0.0 }, 3, 1).unwrap(), vec![0.0; 3]);
        let d = DistSpec::ScaledBeta { a: 2.0, b: 2.0 };
        let a = sample_path(&d, 100, 99).unwrap();
        let b = sample_path(&d, 100, 99).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert!(a.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn validation() {
        assert!(DistSpec::Bernoulli { p: 1.5 }.sampler().is_err());
        assert!(DistSpec::ScaledBeta { a: 0.0, b: 1.0 }.sampler().is_err());
        let bad_sum = DistSpec::DiscreteOn01 {
            points: vec![0.0, 1.0],
            probs: vec![0.5, 0.6],
        };
        assert!(bad_sum.sampler().is_err());
        let bad_support = DistSpec::DiscreteOn01 {
            points: vec![0.0, 1.5],
            probs: vec![0.5, 0.5],
        };
        assert!(bad_support.sampler().is_err());
        assert!(DistSpec::Normal { mu: 0.0, sigma: -1.0 }.sampler().is_err());
    }

    #[test]
    fn moments_and_flags() {
        let d = DistSpec::DiscreteOn01 {
            points: vec![0.0, 0.5, 1.0],
            probs: vec![0.25, 0.5, 0.25],
        };
        assert_eq!(d.mean(), 0.5);
        assert_eq!(d.variance(), 0.125);
        assert!(DistSpec::PointMass { m: 0.3 }.is_degenerate());
        assert!(DistSpec::Bernoulli { p: 1.0 }.is_degenerate());
        assert!(!DistSpec::Normal { mu: 0.0, sigma: 1.0 }.is_bounded());
        assert!((DistSpec::ScaledBeta { a: 2.0, b: 2.0 }.variance() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn sample_means_within_four_standard_errors() {
        let n = 1_000_000;
        for d in [
            DistSpec::Bernoulli { p: 0.3 },
            DistSpec::ScaledBeta { a: 2.0, b: 5.0 },
            DistSpec::DiscreteOn01 {
                points: vec![0.1, 0.7],
                probs: vec![0.4, 0.6],
            },
        ] {
            let xs = sample_path(&d, n, 2024).unwrap();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let se = (d.variance() / n as f64).sqrt();
            assert!((mean - d.mean()).abs() < 4.0 * se, "{d:?}: {mean}");
        }
    }
}
