//! Sub-Gaussian test processes for unbounded observations.
//!
//! For a mean-parametrized bet `λ`, one round multiplies `M` by
//! `exp(((x − m)² − (x − λ)²)/2)`. For a fixed `λ` the process after `n`
//! rounds depends on the data only through `S_n = Σ(X_k − m)`:
//! `log M_n^λ = (λ − m) S_n − n(λ − m)²/2`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SubgState {
    pub n: u64,
    /// `log M_n`.
    pub log_m: f64,
    /// `S_n = Σ (X_k − m)`.
    pub sum_dev: f64,
    /// `Σ (λ_k − m)²`.
    pub sum_lambda_dev_sq: f64,
}

impl SubgState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, lambda: f64, x: f64, m: f64) {
        let (dx, dl) = (x - m, lambda - m);
        // ((x−m)² − (x−λ)²)/2 without the cancellation
        self.log_m += dl * dx - 0.5 * dl * dl;
        self.sum_dev += dx;
        self.sum_lambda_dev_sq += dl * dl;
        self.n += 1;
    }
}

pub fn subg_plugin_update(state: &SubgState, lambda: f64, x: f64, m: f64) -> SubgState {
    let mut next = *state;
    next.observe(lambda, x, m);
    next
}

/// `log M_n^λ` of the fixed-`λ` process from the state's sufficient statistics.
pub fn subg_fixed_log_value(state: &SubgState, lambda: f64, m: f64) -> f64 {
    let d = lambda - m;
    d * state.sum_dev - 0.5 * state.n as f64 * d * d
}

/// Log of the mixture over `λ ~ Normal(m, τ²)`.
pub fn subg_gaussian_mixture_log(state: &SubgState, tau: f64) -> f64 {
    let t2 = tau * tau;
    let v = 1.0 + state.n as f64 * t2;
    -0.5 * v.ln() + t2 * state.sum_dev * state.sum_dev / (2.0 * v)
}

/// `M_n = (1 + nτ²)^{−1/2} exp(τ² S_n² / (2(1 + nτ²)))`.
pub fn subg_gaussian_mixture(state: &SubgState, tau: f64, _m: f64) -> f64 {
    subg_gaussian_mixture_log(state, tau).exp()
}

/// `atom · 1 + (1 − atom) · M_n^{Normal(m, τ²)}`.
pub fn subg_atom_mixture(state: &SubgState, atom_at_m: f64, tau: f64, m: f64) -> f64 {
    atom_at_m + (1.0 - atom_at_m) * subg_gaussian_mixture(state, tau, m)
}

/// Mixture over an arbitrary discrete prior `(λ_i, w_i)`, in log space.
pub fn subg_quadrature_mixture_log(state: &SubgState, nodes: &[(f64, f64)], m: f64) -> f64 {
    let logs: Vec<f64> = nodes
        .iter()
        .filter(|(_, w)| *w > 0.0)
        .map(|&(l, w)| w.ln() + subg_fixed_log_value(state, l, m))
        .collect();
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + logs.iter().map(|v| (v - hi).exp()).sum::<f64>().ln()
}

/// Midpoint nodes for `Normal(m, τ²)` over `[m − 10τ, m + 10τ]`.
pub fn gaussian_prior_nodes(m: f64, tau: f64, count: usize) -> Vec<(f64, f64)> {
    let (lo, hi) = (m - 10.0 * tau, m + 10.0 * tau);
    let h = (hi - lo) / count as f64;
    let norm = 1.0 / (tau * (2.0 * std::f64::consts::PI).sqrt());
    (0..count)
        .map(|i| {
            let l = lo + (i as f64 + 0.5) * h;
            let z = (l - m) / tau;
            (l, h * norm * (-0.5 * z * z).exp())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plugin_examples() {
        let mut s = SubgState::new();
        for x in [0.3, -2.0, 5.0] {
            s.observe(1.0, x, 1.0);
        }
        assert_eq!(s.log_m, 0.0);
        let s = subg_plugin_update(&SubgState::new(), 1.0, 2.0, 0.0);
        assert!((s.log_m - 1.5).abs() < 1e-15);
        assert_eq!(s.sum_lambda_dev_sq, 1.0);
    }

    #[test]
    fn plugin_matches_literal_form() {
        let mut s = SubgState::new();
        let mut lit = 0.0;
        for (k, x) in [0.7, -1.3, 2.2, 0.05].into_iter().enumerate() {
            let lam = 0.4 + 1.0 / (k + 1) as f64;
            lit += ((x - 0.4f64).powi(2) - (x - lam).powi(2)) / 2.0;
            s.observe(lam, x, 0.4);
        }
        assert!((s.log_m - lit).abs() < 1e-13);
    }

    #[test]
    fn fixed_value_matches_plugin() {
        let mut s = SubgState::new();
        for x in [0.7, -1.3, 2.2, 0.05] {
            s.observe(0.9, x, 0.1);
        }
        assert!((subg_fixed_log_value(&s, 0.9, 0.1) - s.log_m).abs() < 1e-13);
    }

    #[test]
    fn gaussian_mixture_examples() {
        assert_eq!(subg_gaussian_mixture(&SubgState::new(), 1.0, 0.0), 1.0);
        let s = subg_plugin_update(&SubgState::new(), 0.0, 0.0, 0.0);
        assert!((subg_gaussian_mixture(&s, 1.0, 0.0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(subg_atom_mixture(&s, 1.0, 1.0, 0.0), 1.0);
        assert_eq!(subg_atom_mixture(&s, 0.0, 1.0, 0.0), subg_gaussian_mixture(&s, 1.0, 0.0));
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let nodes = gaussian_prior_nodes(0.2, 0.7, 100_000);
        let mut s = SubgState::new();
        let mut x = 0.31f64;
        for n in 1..=100 {
            x = (x * 997.0 + 0.123).fract() * 4.0 - 1.8;
            s.observe(0.0, x, 0.2);
            if n % 10 == 0 || n == 1 {
                let q = subg_quadrature_mixture_log(&s, &nodes, 0.2);
                let c = subg_gaussian_mixture_log(&s, 0.7);
                assert!(((q - c).exp() - 1.0).abs() < 1e-6, "n={n}: {q} vs {c}");
            }
        }
    }
}
