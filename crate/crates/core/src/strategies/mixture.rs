//! Mixtures of fixed-fraction wealth processes.
//!
//! A prior `π` over fractions is represented by an atom at zero (cash) plus
//! finitely many weighted nodes. Each node keeps its own exact log-wealth;
//! the mixture wealth `π({0}) + Σ w_i W_n^{λ_i}` is read through a scaled
//! linear view of those accumulators that is rebuilt from the logs every
//! [`REFRESH_EVERY`] rounds.
//!
//! Observations are not folded into the nodes until the wealth is read.
//! Repeated values (binary data) are counted and applied in bulk, so a run
//! that only reads wealth at a few checkpoints costs O(1) per round.

use serde::{Deserialize, Serialize};

use super::quadrature::gauss_legendre_on;
use crate::error::{param, Result};
use crate::wealth::{NullSpec, TOL_ZERO};

/// Default number of quadrature nodes for continuous priors.
pub const DEFAULT_NODES: usize = 256;
/// `C` in the Robbins iterated-logarithm density.
pub const ROBBINS_C: f64 = 6.6 * std::f64::consts::E;
/// Smallest `|λ|` carried by the Robbins node set.
pub const ROBBINS_LAMBDA_MIN: f64 = 1e-10;
/// Nodes closer than this to zero are merged into the cash atom.
pub const ZERO_NODE_TOL: f64 = 1e-12;

const REFRESH_EVERY: u32 = 32;
const VALUE_CACHE: usize = 8;

/// Prior families over the bet component of a mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Prior {
    /// `Beta(a, b)` rescaled to `[−1, 1]`.
    Beta { a: f64, b: f64 },
    /// The Robbins iterated-logarithm density on `[−1, 1]`.
    Robbins,
    /// Explicit `(λ, weight)` atoms; weights are renormalized.
    Atoms { atoms: Vec<(f64, f64)> },
}

#[derive(Debug, Clone)]
struct CachedValue {
    x_bits: u64,
    log_mult: Vec<f64>,
    mult: Vec<f64>,
    pending: u64,
}

/// Mixture wealth state: the cash atom, the weighted nodes and their
/// per-node log-wealth accumulators.
#[derive(Debug, Clone)]
pub struct MixtureSpec {
    atom0: f64,
    lambdas: Vec<f64>,
    weights: Vec<f64>,
    log_w: Vec<f64>,
    m: f64,
    n: u64,
    cache: Vec<CachedValue>,
    caching: bool,
    pending_total: u64,
    lin: Vec<f64>,
    scale: f64,
    /// `(Σ w_i lin_i, Σ w_i λ_i lin_i)` for the current linear view.
    sums: Option<(f64, f64)>,
    since_refresh: u32,
}

impl MixtureSpec {
    /// Builds a mixture from a cash atom and `(λ, weight)` nodes.
    ///
    /// Node weights are rescaled to sum to `1 − atom0`; nodes within
    /// [`ZERO_NODE_TOL`] of zero are moved into the atom.
    pub fn new(atom0: f64, nodes: &[(f64, f64)], null: NullSpec) -> Result<Self> {
        if !(0.0..=1.0).contains(&atom0) {
            return Err(param(format!("atom at zero must lie in [0, 1], got {atom0}")));
        }
        let bounds = null.bounds();
        let total: f64 = nodes.iter().map(|(_, w)| w).sum();
        if nodes.iter().any(|&(_, w)| !(w > 0.0) || !w.is_finite()) {
            return Err(param("mixture weights must be positive"));
        }
        if nodes.is_empty() && atom0 < 1.0 {
            return Err(param("mixture without nodes must be pure cash"));
        }
        let mut atom = atom0;
        let mut lambdas = Vec::with_capacity(nodes.len());
        let mut weights = Vec::with_capacity(nodes.len());
        for &(lam, w) in nodes {
            if !bounds.contains(lam) {
                return Err(param(format!(
                    "mixture node {lam} outside [{}, {}]",
                    bounds.lo, bounds.hi
                )));
            }
            let w = (1.0 - atom0) * w / total;
            if lam.abs() <= ZERO_NODE_TOL {
                atom += w;
            } else {
                lambdas.push(lam);
                weights.push(w);
            }
        }
        let k = lambdas.len();
        Ok(Self {
            atom0: atom,
            lambdas,
            weights,
            log_w: vec![0.0; k],
            m: null.m(),
            n: 0,
            cache: Vec::new(),
            caching: true,
            pending_total: 0,
            lin: vec![1.0; k],
            scale: 0.0,
            sums: None,
            since_refresh: 0,
        })
    }

    pub fn atom0(&self) -> f64 {
        self.atom0
    }

    pub fn rounds(&self) -> u64 {
        self.n
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.lambdas.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn total_weight(&self) -> f64 {
        self.atom0 + self.weights.iter().sum::<f64>()
    }

    /// Per-node `log W_n^{λ_i}`.
    pub fn node_log_wealth(&mut self) -> &[f64] {
        self.materialize();
        &self.log_w
    }

    /// Absorbs one observation (already validated to lie in `[0, 1]`).
    pub fn observe(&mut self, x: f64) {
        self.n += 1;
        if self.caching {
            let bits = x.to_bits();
            if let Some(slot) = self.cache.iter_mut().find(|c| c.x_bits == bits) {
                slot.pending += 1;
                self.pending_total += 1;
                return;
            }
            if self.cache.len() < VALUE_CACHE {
                let (log_mult, mult) = self.multipliers(x);
                self.cache.push(CachedValue {
                    x_bits: bits,
                    log_mult,
                    mult,
                    pending: 1,
                });
                self.pending_total += 1;
                return;
            }
            // Continuous data: stop caching and update eagerly from here on.
            self.materialize();
            self.caching = false;
            self.cache.clear();
        }
        self.apply_eager(x);
    }

    fn multipliers(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        let d = x - self.m;
        self.lambdas
            .iter()
            .map(|lam| {
                let g = 1.0 + lam * d;
                if g <= TOL_ZERO {
                    (f64::NEG_INFINITY, 0.0)
                } else {
                    (g.ln(), g)
                }
            })
            .unzip()
    }

    fn apply_eager(&mut self, x: f64) {
        let d = x - self.m;
        let (mut s, mut num) = (0.0, 0.0);
        for i in 0..self.lambdas.len() {
            let g = 1.0 + self.lambdas[i] * d;
            if g <= TOL_ZERO {
                self.log_w[i] = f64::NEG_INFINITY;
                self.lin[i] = 0.0;
            } else {
                self.log_w[i] += g.ln();
                self.lin[i] *= g;
            }
            let wl = self.weights[i] * self.lin[i];
            s += wl;
            num += wl * self.lambdas[i];
        }
        self.sums = Some((s, num));
        self.since_refresh += 1;
        if self.since_refresh >= REFRESH_EVERY {
            self.refresh();
        }
    }

    /// Folds pending observations into the node accumulators and the linear view.
    fn materialize(&mut self) {
        if self.pending_total == 0 {
            return;
        }
        if self.pending_total == 1 && self.since_refresh < REFRESH_EVERY {
            let slot = self.cache.iter_mut().find(|c| c.pending > 0).expect("pending value");
            let (mut s, mut num) = (0.0, 0.0);
            let nodes = self
                .log_w
                .iter_mut()
                .zip(self.lin.iter_mut())
                .zip(slot.log_mult.iter().zip(&slot.mult))
                .zip(self.weights.iter().zip(&self.lambdas));
            for (((lw, l), (lm, g)), (w, lam)) in nodes {
                *lw += lm;
                *l *= g;
                let wl = w * *l;
                s += wl;
                num += wl * lam;
            }
            self.sums = Some((s, num));
            slot.pending = 0;
            self.pending_total = 0;
            self.since_refresh += 1;
            return;
        }
        for slot in &mut self.cache {
            if slot.pending == 0 {
                continue;
            }
            let c = slot.pending as f64;
            for (lw, l) in self.log_w.iter_mut().zip(&slot.log_mult) {
                *lw += c * l;
            }
            slot.pending = 0;
        }
        self.pending_total = 0;
        self.refresh();
    }

    fn refresh(&mut self) {
        let top = self
            .log_w
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        self.scale = if top.is_finite() { top } else { 0.0 };
        for (l, lw) in self.lin.iter_mut().zip(&self.log_w) {
            *l = (lw - self.scale).exp();
        }
        self.since_refresh = 0;
        self.sums = None;
    }

    fn compute_sums(&self) -> (f64, f64) {
        let (mut s, mut num) = (0.0, 0.0);
        for i in 0..self.lin.len() {
            let wl = self.weights[i] * self.lin[i];
            s += wl;
            num += wl * self.lambdas[i];
        }
        (s, num)
    }

    /// `(Σ w_i lin_i, Σ w_i λ_i lin_i)`, rescaling first if the sum left the safe range.
    fn bet_sums(&mut self) -> (f64, f64) {
        self.materialize();
        let mut sums = match self.sums {
            Some(v) => v,
            None => self.compute_sums(),
        };
        if !(1e-250..=1e250).contains(&sums.0) && self.log_w.iter().any(|v| v.is_finite()) {
            self.refresh();
            sums = self.compute_sums();
        }
        self.sums = Some(sums);
        sums
    }

    /// `log W_n^π`.
    pub fn log_wealth(&mut self) -> f64 {
        let (s, _) = self.bet_sums();
        let bet = if s > 0.0 { self.scale + s.ln() } else { f64::NEG_INFINITY };
        if self.atom0 <= 0.0 {
            return bet;
        }
        let cash = self.atom0.ln();
        let hi = cash.max(bet);
        let lo = cash.min(bet);
        hi + (lo - hi).exp().ln_1p()
    }

    pub fn wealth(&mut self) -> f64 {
        self.log_wealth().exp()
    }

    /// The predictable plug-in fraction that reproduces the mixture wealth:
    /// `Σ w_i λ_i W^{λ_i} / (π({0}) + Σ w_i W^{λ_i})`.
    pub fn implied_fraction(&mut self) -> f64 {
        let (s, num) = self.bet_sums();
        let den = s + self.atom0 * (-self.scale).exp();
        if den > 0.0 && den.is_finite() {
            num / den
        } else {
            0.0
        }
    }
}

/// One mixture round: every node's log-wealth gains `log(1 + λ_i(x − m))`.
pub fn mixture_update(spec: &MixtureSpec, x: f64) -> Result<MixtureSpec> {
    let x = crate::wealth::check_observation(x)?;
    let mut next = spec.clone();
    next.observe(x);
    Ok(next)
}

/// Rescaled `Beta(a, b)` prior on `[−1, 1]`, no cash.
///
/// With `λ = −cos 2θ`, `θ ∈ [0, π/2]`, the Beta density becomes
/// `∝ sin^{2a−1}θ cos^{2b−1}θ`, which is smooth for `a, b ≥ 1/2`
/// (constant for the arcsine case), so Gauss–Legendre in `θ` converges fast.
pub fn build_beta_mixture(a: f64, b: f64, n_nodes: usize, null: NullSpec) -> Result<MixtureSpec> {
    MixtureSpec::new(0.0, &beta_nodes(a, b, n_nodes)?, null)
}

pub fn beta_nodes(a: f64, b: f64, n_nodes: usize) -> Result<Vec<(f64, f64)>> {
    if !(a > 0.0 && b > 0.0) {
        return Err(param(format!("Beta parameters must be positive, got ({a}, {b})")));
    }
    if n_nodes < 2 {
        return Err(param("at least 2 mixture nodes are required"));
    }
    let (theta, gw) = gauss_legendre_on(n_nodes, 0.0, std::f64::consts::FRAC_PI_2);
    let nodes: Vec<(f64, f64)> = theta
        .iter()
        .zip(&gw)
        .map(|(&t, &w)| {
            let lam = -(2.0 * t).cos();
            let dens = t.sin().powf(2.0 * a - 1.0) * t.cos().powf(2.0 * b - 1.0);
            (lam, w * dens)
        })
        .collect();
    let total: f64 = nodes.iter().map(|(_, w)| w).sum();
    Ok(nodes.into_iter().map(|(l, w)| (l, w / total)).collect())
}

/// Robbins iterated-logarithm density
/// `loglog C / (2|λ| log(C/|λ|) (loglog(C/|λ|))²)` on `0 < |λ| ≤ 1`.
pub fn robbins_density(lambda: f64) -> f64 {
    let a = lambda.abs();
    if a == 0.0 || a > 1.0 {
        return 0.0;
    }
    let l = (ROBBINS_C / a).ln();
    ROBBINS_C.ln().ln() / (2.0 * a * l * l.ln() * l.ln())
}

/// `∫_{λ_min ≤ |λ| ≤ 1} f(λ) dλ = 1 − loglog C / loglog(C/λ_min)`.
pub fn robbins_mass(lambda_min: f64) -> f64 {
    1.0 - ROBBINS_C.ln().ln() / (ROBBINS_C / lambda_min).ln().ln()
}

/// Robbins prior on `λ_min ≤ |λ| ≤ 1`, renormalized, no cash. Nodes are
/// Gauss–Legendre in `log|λ|`, mirrored to both signs.
pub fn build_robbins_mixture(n_nodes: usize, null: NullSpec) -> Result<MixtureSpec> {
    MixtureSpec::new(0.0, &robbins_nodes(n_nodes, ROBBINS_LAMBDA_MIN)?, null)
}

pub fn robbins_nodes(n_nodes: usize, lambda_min: f64) -> Result<Vec<(f64, f64)>> {
    if n_nodes < 2 {
        return Err(param("at least 2 mixture nodes are required"));
    }
    let per_side = n_nodes.div_ceil(2);
    let (t, gw) = gauss_legendre_on(per_side, lambda_min.ln(), 0.0);
    let mut nodes = Vec::with_capacity(2 * per_side);
    for (&t, &w) in t.iter().zip(&gw).rev() {
        let lam = t.exp();
        nodes.push((-lam, w * robbins_density(lam) * lam));
    }
    for (&t, &w) in t.iter().zip(&gw) {
        let lam = t.exp();
        nodes.push((lam, w * robbins_density(lam) * lam));
    }
    let total: f64 = nodes.iter().map(|(_, w)| w).sum();
    Ok(nodes.into_iter().map(|(l, w)| (l, w / total)).collect())
}

/// Unnormalized quadrature estimate of the Robbins mass carried by the node set.
pub fn robbins_node_mass(n_nodes: usize, lambda_min: f64) -> f64 {
    let per_side = n_nodes.div_ceil(2);
    let (t, gw) = gauss_legendre_on(per_side, lambda_min.ln(), 0.0);
    2.0 * t
        .iter()
        .zip(&gw)
        .map(|(&t, &w)| w * robbins_density(t.exp()) * t.exp())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn null(m: f64) -> NullSpec {
        NullSpec::new(m).unwrap()
    }

    #[test]
    fn pure_cash_is_flat() {
        let mut s = MixtureSpec::new(1.0, &[], null(0.5)).unwrap();
        for x in [0.0, 1.0, 1.0, 0.3] {
            s.observe(x);
            assert_eq!(s.wealth(), 1.0);
        }
    }

    #[test]
    fn single_node_is_fixed_fraction() {
        let mut s = MixtureSpec::new(0.0, &[(0.7, 1.0)], null(0.4)).unwrap();
        let mut w = 1.0;
        for x in [0.0, 1.0, 1.0, 0.3, 0.9, 0.0] {
            s.observe(x);
            w *= 1.0 + 0.7 * (x - 0.4);
            assert!((s.wealth() / w - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn weights_and_initial_wealth() {
        let mut s = build_beta_mixture(0.5, 0.5, 256, null(0.5)).unwrap();
        assert!((s.total_weight() - 1.0).abs() < 1e-12);
        assert_eq!(s.atom0(), 0.0);
        assert!((s.wealth() - 1.0).abs() < 1e-14);
        // odd counts put a node at zero, which moves into the cash atom
        let s = build_beta_mixture(0.5, 0.5, 257, null(0.5)).unwrap();
        assert!((s.total_weight() - 1.0).abs() < 1e-10);
        assert!(s.atom0() > 0.0 && s.atom0() < 0.01);
        assert!(s.nodes().all(|(l, _)| l != 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_beta_mixture(0.0, 1.0, 16, null(0.5)).is_err());
        assert!(build_beta_mixture(1.0, 1.0, 1, null(0.5)).is_err());
        assert!(MixtureSpec::new(0.0, &[(3.0, 1.0)], null(0.5)).is_err());
        assert!(MixtureSpec::new(0.0, &[(0.3, -1.0)], null(0.5)).is_err());
        assert!(MixtureSpec::new(1.2, &[(0.3, 1.0)], null(0.5)).is_err());
    }

    #[test]
    fn robbins_nodes_are_symmetric() {
        let nodes = robbins_nodes(256, ROBBINS_LAMBDA_MIN).unwrap();
        assert_eq!(nodes.len(), 256);
        for i in 0..128 {
            assert_eq!(nodes[i].0, -nodes[255 - i].0);
            assert_eq!(nodes[i].1, nodes[255 - i].1);
        }
        assert!((nodes.iter().map(|n| n.1).sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lazy_and_eager_paths_agree() {
        let xs: Vec<f64> = (0..500).map(|i| ((i * 7919) % 13 % 2) as f64).collect();
        let mut lazy = build_beta_mixture(0.5, 0.5, 64, null(0.5)).unwrap();
        let mut eager = lazy.clone();
        for &x in &xs {
            lazy.observe(x);
            eager.observe(x);
            eager.log_wealth();
        }
        let (a, b) = (lazy.log_wealth(), eager.log_wealth());
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn continuous_data_switches_to_eager() {
        let mut s = build_beta_mixture(2.0, 2.0, 32, null(0.5)).unwrap();
        let mut oracle = s.clone();
        let nodes: Vec<(f64, f64)> = s.nodes().collect();
        for i in 0..50 {
            let x = (i as f64 * 0.137).fract();
            s.observe(x);
            oracle = mixture_update(&oracle, x).unwrap();
        }
        let direct: f64 = nodes
            .iter()
            .map(|&(l, w)| w * (0..50).map(|i| 1.0 + l * ((i as f64 * 0.137).fract() - 0.5)).product::<f64>())
            .sum();
        assert!((s.wealth() / direct - 1.0).abs() < 1e-12);
        assert!((oracle.wealth() / direct - 1.0).abs() < 1e-12);
    }
}
