//! Betting only on the sparse round set `{⌊k^α⌋ : k ≥ 1}`.

/// Iterator over the bet rounds `⌊k^α⌋`, `k = 1, 2, …`.
#[derive(Debug, Clone)]
pub struct BetTimes {
    alpha: f64,
    k: u64,
}

impl BetTimes {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, k: 0 }
    }
}

impl Iterator for BetTimes {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        self.k += 1;
        // Guard against k^α landing a hair below an integer.
        Some(((self.k as f64).powf(self.alpha) + 1e-9).floor() as u64)
    }
}

/// Whether round `n` is a bet round for exponent `alpha`.
pub fn is_bet_time(n: u64, alpha: f64) -> bool {
    BetTimes::new(alpha).take_while(|&t| t <= n).any(|t| t == n)
}
