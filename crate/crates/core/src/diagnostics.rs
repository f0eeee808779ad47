//! Path diagnostics: `Σλ²`, the all-in event, `N^ρ`, hindsight-optimal
//! log-wealth `L_n*`, regret and `T_N = Σ S_n²/n²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strategies::grapa::{grapa_fraction, log_wealth_at};
use crate::wealth::{History, NullSpec, TOL_ZERO};

/// Horizon heuristic for the sum-of-squares dichotomy. Diagnostic only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SosClass {
    SumFinitePrediction,
    SumDivergingPrediction,
    AllInLoss,
}

/// `Σ` above this at the horizon counts as diverging.
pub const SOS_DIVERGENT_SUM: f64 = 25.0;
/// Growth over the last decade of rounds above this counts as diverging.
pub const SOS_DIVERGENT_DECADE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SosLedger {
    pub n: u64,
    pub sum_lambda_sq: f64,
    pub allin_hit: bool,
    /// `(10^k, Σλ² after 10^k rounds)`.
    decades: Vec<(u64, f64)>,
}

impl SosLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, lambda: f64, multiplier: f64) {
        self.n += 1;
        self.sum_lambda_sq += lambda * lambda;
        if multiplier <= TOL_ZERO {
            self.allin_hit = true;
        }
        let next_mark = 10u64.pow(self.decades.len() as u32);
        if self.n == next_mark {
            self.decades.push((self.n, self.sum_lambda_sq));
        }
    }

    /// Increase of the sum since round `⌊n/10⌋` (rounded down to a power of ten).
    pub fn last_decade_increment(&self) -> f64 {
        let base = self
            .decades
            .iter()
            .rev()
            .find(|(k, _)| k * 10 <= self.n)
            .map_or(0.0, |&(_, s)| s);
        self.sum_lambda_sq - base
    }

    pub fn classification(&self) -> SosClass {
        if self.allin_hit {
            SosClass::AllInLoss
        } else if self.sum_lambda_sq > SOS_DIVERGENT_SUM
            || self.last_decade_increment() > SOS_DIVERGENT_DECADE
        {
            SosClass::SumDivergingPrediction
        } else {
            SosClass::SumFinitePrediction
        }
    }
}

/// Adds `λ²` and flags the all-in event when `multiplier = 1 + λ(x − m)` is zero.
pub fn sos_update(ledger: &SosLedger, lambda: f64, multiplier: f64) -> SosLedger {
    let mut next = ledger.clone();
    next.record(lambda, multiplier);
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlinfResult {
    pub lambda_kl: f64,
    /// `L_n* = n KL_inf(P_n, m)` in nats.
    pub l_star: f64,
    pub chi_sq: f64,
}

/// Hindsight-maximal log-wealth over fixed fractions, via the GRAPA optimizer.
pub fn klinf(history: &History, null: NullSpec, tol: f64) -> Result<KlinfResult> {
    if history.is_empty() {
        return Err(Error::EmptySample);
    }
    let lambda_kl = grapa_fraction(history, null, tol);
    let l_star = log_wealth_at(history, lambda_kl, null.m()).max(0.0);
    Ok(KlinfResult {
        lambda_kl,
        l_star,
        chi_sq: 2.0 * l_star,
    })
}

/// `R_n = L_n* − log W_n`; `+∞` for a bankrupt path.
pub fn regret(l_star: f64, log_wealth: f64) -> f64 {
    l_star - log_wealth
}

/// Whether every `Ŵ_n` exceeds `rho`.
pub fn pnb_check(min_wealths: &[f64], rho: f64) -> bool {
    min_wealths.iter().all(|&w| w > rho)
}

/// `T_N = Σ_{n≤N} S_n²/n²` with snapshots at chosen rounds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TnTracker {
    pub n: u64,
    pub t_n: f64,
    pub snapshots: Vec<(u64, f64)>,
}

impl TnTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds round `n`'s term; `sum_dev` is `S_n`.
    pub fn record(&mut self, sum_dev: f64, n: u64) {
        debug_assert!(n >= 1);
        let nf = n as f64;
        self.t_n += sum_dev * sum_dev / (nf * nf);
        self.n = n;
    }

    pub fn snapshot(&mut self) {
        self.snapshots.push((self.n, self.t_n));
    }
}

pub fn tn_update(tracker: &TnTracker, sum_dev: f64, n: u64) -> TnTracker {
    let mut next = tracker.clone();
    next.record(sum_dev, n);
    next
}
