//! Betting strategies.
//!
//! A [`Strategy`] is immutable configuration. [`Strategy::bettor`] turns it
//! into a [`Bettor`], the per-path runtime state that emits the predictable
//! fraction for the next round and keeps the strategy's wealth.
//!
//! Mixtures and the hedged strategy are wealth-process rules; they still
//! report the implied plug-in fraction, i.e. the `λ_n` for which
//! `W_n = W_{n−1}(1 + λ_n(X_n − m))`.

pub mod agrapa;
pub mod grapa;
pub mod hedged;
pub mod intermittent;
pub mod kt;
pub mod leverage;
pub mod mixture;
pub mod quadrature;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::wealth::{check_fraction, FractionInterval, NullSpec, PathState};

pub use agrapa::agrapa_fraction;
pub use grapa::{grapa_fraction, grapa_fraction_in};
pub use hedged::{hedged_update, prh_fraction, HedgedState, ShrunkVariance};
pub use intermittent::{is_bet_time, BetTimes};
pub use kt::{kt_binary_log_wealth, kt_fraction, kt_fraction_with, KtNumerator};
pub use leverage::leveraged_fraction;
pub use mixture::{
    build_beta_mixture, build_robbins_mixture, mixture_update, MixtureSpec, Prior,
};

fn one() -> f64 {
    1.0
}
fn default_tol() -> f64 {
    grapa::DEFAULT_TOL
}
fn default_agrapa_clip() -> f64 {
    agrapa::DEFAULT_CLIP
}
fn default_alpha() -> f64 {
    hedged::DEFAULT_ALPHA
}
fn default_hedge_clip() -> f64 {
    hedged::DEFAULT_CLIP
}
fn default_nodes() -> usize {
    mixture::DEFAULT_NODES
}
fn default_rho() -> f64 {
    leverage::DEFAULT_RHO
}

/// Strategy descriptor, serialized with a `kind` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Strategy {
    /// The same fraction every round.
    Fixed { lambda: f64 },
    /// `(offset + Σ(X_k − m)) / (C n)`, clipped into the bound-scaled interval.
    /// `c = None` means `C = m(1 − m)`.
    Kt {
        #[serde(default)]
        c: Option<f64>,
        #[serde(default)]
        numerator: KtNumerator,
        #[serde(default = "one")]
        bound_scale: f64,
    },
    /// Hindsight-optimal fixed fraction over the bound-scaled interval.
    Grapa {
        #[serde(default = "one")]
        bound_scale: f64,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    Agrapa {
        #[serde(default = "default_agrapa_clip")]
        c: f64,
    },
    /// Predictable hedging with the decaying fraction.
    Hedged {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_hedge_clip")]
        c: f64,
    },
    /// `atom0 · cash + (1 − atom0) · prior`.
    Mixture {
        #[serde(default)]
        atom0: f64,
        prior: Prior,
        #[serde(default = "default_nodes")]
        nodes: usize,
    },
    /// Bets the inner strategy's fraction only at rounds `⌊k^α⌋`.
    Intermittent {
        inner: Box<Strategy>,
        alpha_exp: f64,
    },
    /// `ρ`-opportunistic leverage of the inner strategy.
    Leveraged {
        inner: Box<Strategy>,
        #[serde(default = "default_rho")]
        rho: f64,
    },
}

pub fn fixed_fraction(lambda: f64) -> Strategy {
    Strategy::Fixed { lambda }
}

pub fn intermittent(inner: Strategy, alpha_exp: f64) -> Strategy {
    Strategy::Intermittent {
        inner: Box::new(inner),
        alpha_exp,
    }
}

pub fn opportunistic_leverage(inner: Strategy, rho: f64) -> Strategy {
    Strategy::Leveraged {
        inner: Box::new(inner),
        rho,
    }
}

impl Strategy {
    pub fn kt(c: f64) -> Self {
        Strategy::Kt {
            c: Some(c),
            numerator: KtNumerator::Half,
            bound_scale: 1.0,
        }
    }

    pub fn kt_pseudo_count(c: f64) -> Self {
        Strategy::Kt {
            c: Some(c),
            numerator: KtNumerator::PseudoCount,
            bound_scale: 1.0,
        }
    }

    pub fn grapa(bound_scale: f64) -> Self {
        Strategy::Grapa {
            bound_scale,
            tol: grapa::DEFAULT_TOL,
        }
    }

    pub fn agrapa(c: f64) -> Self {
        Strategy::Agrapa { c }
    }

    pub fn hedged(alpha: f64, c: f64) -> Self {
        Strategy::Hedged { alpha, c }
    }

    pub fn beta_mixture(atom0: f64, a: f64, b: f64) -> Self {
        Strategy::Mixture {
            atom0,
            prior: Prior::Beta { a, b },
            nodes: mixture::DEFAULT_NODES,
        }
    }

    pub fn robbins_mixture() -> Self {
        Strategy::Mixture {
            atom0: 0.0,
            prior: Prior::Robbins,
            nodes: mixture::DEFAULT_NODES,
        }
    }

    /// Whether the per-round cost grows with the path length.
    pub fn needs_history(&self) -> bool {
        match self {
            Strategy::Grapa { .. } => true,
            Strategy::Intermittent { inner, .. } | Strategy::Leveraged { inner, .. } => {
                inner.needs_history()
            }
            _ => false,
        }
    }

    /// Validates the parameters against the null and builds per-path state.
    pub fn bettor(&self, null: NullSpec) -> Result<Box<dyn Bettor>> {
        let m = null.m();
        Ok(match self {
            Strategy::Fixed { lambda } => {
                check_fraction(*lambda, null)?;
                Box::new(PlugIn::new(Rule::Fixed(*lambda), null))
            }
            Strategy::Kt {
                c,
                numerator,
                bound_scale,
            } => {
                let c = c.unwrap_or(m * (1.0 - m));
                // tolerate rounding in a caller-computed m(1 − m)
                if !(c >= m * (1.0 - m) * (1.0 - 1e-12)) || !c.is_finite() {
                    return Err(param(format!("KT constant C = {c} is below m(1 − m)")));
                }
                check_scale(*bound_scale)?;
                Box::new(PlugIn::new(
                    Rule::Kt {
                        c,
                        numerator: *numerator,
                        bounds: null.bounds().scaled(*bound_scale),
                    },
                    null,
                ))
            }
            Strategy::Grapa { bound_scale, tol } => {
                check_scale(*bound_scale)?;
                if !(*tol > 0.0) {
                    return Err(param("GRAPA tolerance must be positive"));
                }
                Box::new(PlugIn::new(
                    Rule::Grapa {
                        bounds: null.bounds().scaled(*bound_scale),
                        tol: *tol,
                    },
                    null,
                ))
            }
            Strategy::Agrapa { c } => {
                check_open_unit("aGRAPA clip C", *c)?;
                Box::new(PlugIn::new(Rule::Agrapa { c: *c }, null))
            }
            Strategy::Hedged { alpha, c } => {
                check_open_unit("hedging α", *alpha)?;
                check_open_unit("hedging clip C", *c)?;
                Box::new(HedgedBettor::new(*alpha, *c, null))
            }
            Strategy::Mixture {
                atom0,
                prior,
                nodes,
            } => Box::new(MixtureBettor {
                spec: build_prior(*atom0, prior, *nodes, null)?,
            }),
            Strategy::Intermittent { inner, alpha_exp } => {
                if !(*alpha_exp > 1.0) || !alpha_exp.is_finite() {
                    return Err(param(format!("intermittent exponent must exceed 1, got {alpha_exp}")));
                }
                Box::new(IntermittentBettor::new(inner.bettor(null)?, *alpha_exp, null))
            }
            Strategy::Leveraged { inner, rho } => {
                check_open_unit("leverage ρ", *rho)?;
                Box::new(LeveragedBettor::new(inner.bettor(null)?, *rho, null))
            }
        })
    }
}

fn check_scale(s: f64) -> Result<()> {
    if s > 0.0 && s <= 1.0 {
        Ok(())
    } else {
        Err(param(format!("bound scale must lie in (0, 1], got {s}")))
    }
}

fn check_open_unit(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(param(format!("{what} must lie in (0, 1), got {v}")))
    }
}

/// Builds the mixture state for `atom0 · cash + (1 − atom0) · prior`.
pub fn build_prior(atom0: f64, prior: &Prior, nodes: usize, null: NullSpec) -> Result<MixtureSpec> {
    let bet = match prior {
        Prior::Beta { a, b } => mixture::beta_nodes(*a, *b, nodes)?,
        Prior::Robbins => mixture::robbins_nodes(nodes, mixture::ROBBINS_LAMBDA_MIN)?,
        Prior::Atoms { atoms } => atoms.clone(),
    };
    MixtureSpec::new(atom0, &bet, null)
}

/// Per-path runtime state of a strategy.
///
/// Call order per round: [`fraction`](Bettor::fraction) (optional), then
/// [`observe`](Bettor::observe). Observations must already lie in `[0, 1]`.
pub trait Bettor: Send {
    /// The fraction `λ_n` for the upcoming round.
    fn fraction(&mut self) -> f64;
    fn observe(&mut self, x: f64);
    fn log_wealth(&mut self) -> f64;
    fn rounds(&self) -> u64;
}

#[derive(Debug, Clone, Copy)]
enum Rule {
    Fixed(f64),
    Kt {
        c: f64,
        numerator: KtNumerator,
        bounds: FractionInterval,
    },
    Grapa {
        bounds: FractionInterval,
        tol: f64,
    },
    Agrapa {
        c: f64,
    },
}

impl Rule {
    fn fraction(&self, state: &PathState, null: NullSpec) -> f64 {
        match *self {
            Rule::Fixed(l) => l,
            Rule::Kt {
                c,
                numerator,
                bounds,
            } => kt_fraction_with(state, c, numerator, bounds, null),
            Rule::Grapa { bounds, tol } => {
                let h = state.history.as_ref().expect("GRAPA keeps history");
                grapa_fraction_in(h, null, bounds, tol)
            }
            Rule::Agrapa { c } => agrapa_fraction(state, c, null),
        }
    }
}

/// A predictable plug-in strategy driven by a [`PathState`].
#[derive(Debug, Clone)]
struct PlugIn {
    rule: Rule,
    state: PathState,
    null: NullSpec,
    next: f64,
}

impl PlugIn {
    fn new(rule: Rule, null: NullSpec) -> Self {
        let state = PathState::new(matches!(rule, Rule::Grapa { .. }));
        let next = rule.fraction(&state, null);
        Self {
            rule,
            state,
            null,
            next,
        }
    }
}

impl Bettor for PlugIn {
    fn fraction(&mut self) -> f64 {
        self.next
    }

    fn observe(&mut self, x: f64) {
        self.state.advance(self.next, x, self.null.m());
        self.next = self.rule.fraction(&self.state, self.null);
    }

    fn log_wealth(&mut self) -> f64 {
        self.state.log_wealth
    }

    fn rounds(&self) -> u64 {
        self.state.n
    }
}

struct HedgedBettor {
    state: HedgedState,
    null: NullSpec,
    next: f64,
}

impl HedgedBettor {
    fn new(alpha: f64, c: f64, null: NullSpec) -> Self {
        let state = HedgedState::new(alpha, c);
        let next = state.next_lambda(null);
        Self { state, null, next }
    }
}

impl Bettor for HedgedBettor {
    fn fraction(&mut self) -> f64 {
        self.state.implied_fraction(self.next)
    }

    fn observe(&mut self, x: f64) {
        self.state.advance_with(self.next, x, self.null.m());
        self.next = self.state.next_lambda(self.null);
    }

    fn log_wealth(&mut self) -> f64 {
        self.state.log_wealth()
    }

    fn rounds(&self) -> u64 {
        self.state.rounds()
    }
}

struct MixtureBettor {
    spec: MixtureSpec,
}

impl Bettor for MixtureBettor {
    fn fraction(&mut self) -> f64 {
        self.spec.implied_fraction()
    }

    fn observe(&mut self, x: f64) {
        self.spec.observe(x);
    }

    fn log_wealth(&mut self) -> f64 {
        self.spec.log_wealth()
    }

    fn rounds(&self) -> u64 {
        self.spec.rounds()
    }
}

/// Wraps a shadow strategy whose fraction is used only at the bet rounds.
struct IntermittentBettor {
    inner: Box<dyn Bettor>,
    times: BetTimes,
    next_bet: u64,
    state: PathState,
    null: NullSpec,
}

impl IntermittentBettor {
    fn new(inner: Box<dyn Bettor>, alpha: f64, null: NullSpec) -> Self {
        let mut times = BetTimes::new(alpha);
        let next_bet = times.next().unwrap_or(u64::MAX);
        Self {
            inner,
            times,
            next_bet,
            state: PathState::new(false),
            null,
        }
    }
}

impl Bettor for IntermittentBettor {
    fn fraction(&mut self) -> f64 {
        if self.state.n + 1 == self.next_bet {
            self.inner.fraction()
        } else {
            0.0
        }
    }

    fn observe(&mut self, x: f64) {
        let lambda = self.fraction();
        self.state.advance(lambda, x, self.null.m());
        self.inner.observe(x);
        while self.next_bet <= self.state.n {
            self.next_bet = self.times.next().unwrap_or(u64::MAX);
        }
    }

    fn log_wealth(&mut self) -> f64 {
        self.state.log_wealth
    }

    fn rounds(&self) -> u64 {
        self.state.n
    }
}

/// Tracks the shadow strategy's wealth and bets its leveraged fraction.
struct LeveragedBettor {
    inner: Box<dyn Bettor>,
    rho: f64,
    state: PathState,
    null: NullSpec,
}

impl LeveragedBettor {
    fn new(inner: Box<dyn Bettor>, rho: f64, null: NullSpec) -> Self {
        Self {
            inner,
            rho,
            state: PathState::new(false),
            null,
        }
    }
}

impl Bettor for LeveragedBettor {
    fn fraction(&mut self) -> f64 {
        let w_prev = self.inner.log_wealth().exp();
        let lambda = self.inner.fraction();
        let (gamma, _) = leveraged_fraction(w_prev, lambda, self.rho, self.null.m());
        self.null.bounds().clip(gamma)
    }

    fn observe(&mut self, x: f64) {
        let gamma = self.fraction();
        self.state.advance(gamma, x, self.null.m());
        self.inner.observe(x);
    }

    fn log_wealth(&mut self) -> f64 {
        self.state.log_wealth
    }

    fn rounds(&self) -> u64 {
        self.state.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn null(m: f64) -> NullSpec {
        NullSpec::new(m).unwrap()
    }

    fn run(s: &Strategy, m: f64, xs: &[f64]) -> f64 {
        let mut b = s.bettor(null(m)).unwrap();
        for &x in xs {
            b.observe(x);
        }
        b.log_wealth().exp()
    }

    #[test]
    fn fixed_examples() {
        assert_eq!(run(&fixed_fraction(0.0), 0.5, &[0.0, 1.0, 0.3]), 1.0);
        assert!((run(&fixed_fraction(1.0), 0.5, &[1.0, 0.0]) - 0.75).abs() < 1e-15);
        assert_eq!(run(&fixed_fraction(2.0), 0.5, &[0.0, 1.0]), 0.0);
        assert!(fixed_fraction(2.5).bettor(null(0.5)).is_err());
    }

    #[test]
    fn construction_errors() {
        assert!(Strategy::kt(0.1).bettor(null(0.5)).is_err());
        assert!(Strategy::kt(0.25).bettor(null(0.5)).is_ok());
        assert!(Strategy::agrapa(1.0).bettor(null(0.5)).is_err());
        assert!(Strategy::hedged(0.0, 0.5).bettor(null(0.5)).is_err());
        assert!(intermittent(Strategy::kt(2.0), 1.0).bettor(null(0.5)).is_err());
        assert!(opportunistic_leverage(Strategy::kt(2.0), 1.0).bettor(null(0.5)).is_err());
        assert!(Strategy::grapa(0.0).bettor(null(0.5)).is_err());
    }

    #[test]
    fn literal_kt_goes_all_in_until_the_first_tail() {
        let mut b = Strategy::kt(0.25).bettor(null(0.5)).unwrap();
        for _ in 0..20 {
            assert_eq!(b.fraction(), 2.0);
            b.observe(1.0);
        }
        b.observe(0.0);
        assert_eq!(b.log_wealth(), f64::NEG_INFINITY);
    }

    #[test]
    fn intermittent_bets_only_on_squares() {
        let mut b = intermittent(fixed_fraction(0.5), 2.0).bettor(null(0.5)).unwrap();
        let mut bet_rounds = Vec::new();
        for n in 1..=30u64 {
            if b.fraction() != 0.0 {
                bet_rounds.push(n);
            }
            b.observe(1.0);
        }
        assert_eq!(bet_rounds, vec![1, 4, 9, 16, 25]);
        assert!((b.log_wealth().exp() - 1.25f64.powi(5)).abs() < 1e-12);
    }

    #[test]
    fn serde_round_trip() {
        let s = opportunistic_leverage(Strategy::beta_mixture(0.5, 0.5, 0.5), 0.4);
        let json = serde_json::to_string(&s).unwrap();
        let back: Strategy = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);
        let kt: Strategy = serde_json::from_str(r#"{"kind":"kt"}"#).unwrap();
        assert_eq!(
            kt,
            Strategy::Kt {
                c: None,
                numerator: KtNumerator::Half,
                bound_scale: 1.0
            }
        );
        assert!(serde_json::from_str::<Strategy>(r#"{"kind":"martingale"}"#).is_err());
    }
}
