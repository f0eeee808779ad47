//! Desk-scale acceptance studies.
//!
//! Each study runs its ensembles, checks its thresholds and keeps the CSV
//! tables it produced so that runs under different worker counts can be
//! compared byte for byte.

use std::time::Instant;

use betlab::cli::output::{checkpoints_csv, confseq_csv, fmt_f64, klinf_csv, leverage_csv, subg_csv};
use betlab::simlab::confseq::{run_confseq, ConfSeqConfig};
use betlab::simlab::ensemble::{run_ensemble, EnsembleSummary, ExperimentConfig};
use betlab::simlab::leverage::{leverage_trace, run_leverage, LeverageTrace};
use betlab::simlab::seed::hash64;
use betlab::simlab::stats::{bernoulli_kl, harmonic, mean, median, ville_violation_rate};
use betlab::simlab::subg::{run_subg, SubgConfig, SubgRule};
use betlab::simlab::{sample_path, DistSpec};
use betlab::strategies::grapa::DEFAULT_TOL;
use betlab::strategies::{
    fixed_fraction, grapa_fraction, intermittent, kt_binary_log_wealth, kt_fraction_with, KtNumerator,
    Strategy,
};
use betlab::subgaussian::{
    gaussian_prior_nodes, subg_gaussian_mixture_log, subg_quadrature_mixture_log, SubgState,
};
use betlab::wealth::{NullSpec, PathState};

/// One threshold of a criterion.
#[derive(Debug, Clone)]
pub struct Check {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

fn check(label: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        label: label.into(),
        pass,
        detail: detail.into(),
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    /// `(name, csv)` tables in a fixed order.
    pub tables: Vec<(String, String)>,
    pub seconds: f64,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn line(&self) -> String {
        let parts: Vec<String> = self
            .checks
            .iter()
            .map(|c| format!("{} {} [{}]", c.label, c.detail, if c.pass { "ok" } else { "FAIL" }))
            .collect();
        format!(
            "criterion {:>2} {} {}: {} ({:.1}s)",
            self.id,
            if self.pass() { "PASS" } else { "FAIL" },
            self.title,
            parts.join("; "),
            self.seconds
        )
    }
}

/// Run size. `paths_div` divides every path count (at least one path is kept).
#[derive(Debug, Clone, Copy)]
pub struct Scale {
    pub paths_div: u64,
    pub workers: usize,
}

impl Scale {
    pub fn full(workers: usize) -> Self {
        Self { paths_div: 1, workers }
    }

    fn paths(&self, n: u64) -> u64 {
        (n / self.paths_div).max(1)
    }
}

const N3: u64 = 1_000;
const N4: u64 = 10_000;
const N5: u64 = 100_000;

fn null(m: f64) -> NullSpec {
    NullSpec::new(m).expect("valid null")
}

fn bern(p: f64) -> DistSpec {
    DistSpec::Bernoulli { p }
}

#[allow(clippy::too_many_arguments)]
fn ensemble(
    scale: Scale,
    seed: u64,
    dist: DistSpec,
    strategy: Strategy,
    paths: u64,
    horizon: u64,
    checkpoints: &[u64],
    track_klinf: bool,
) -> (ExperimentConfig, EnsembleSummary) {
    let config = ExperimentConfig {
        dist,
        null_m: 0.5,
        strategy,
        horizon,
        paths: scale.paths(paths),
        checkpoints: checkpoints.to_vec(),
        master_seed: seed,
        track_klinf,
    };
    let summary = run_ensemble(&config, scale.workers).expect("ensemble runs");
    (config, summary)
}

fn median_wealth(s: &EnsembleSummary, n: u64) -> f64 {
    median(&s.at(n, |p| p.log_wealth.exp()))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn e(v: f64) -> String {
    format!("{v:.4e}")
}

fn timed(id: u8, title: &'static str, f: impl FnOnce() -> (Vec<Check>, Vec<(String, String)>)) -> Outcome {
    let start = Instant::now();
    let (checks, tables) = f();
    Outcome {
        id,
        title,
        checks,
        tables,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn null_bankruptcy(scale: Scale) -> Outcome {
    timed(1, "null bankruptcy trend", || {
        let cks = [N3, N4, N5];
        let mut checks = Vec::new();
        let mut tables = Vec::new();

        let (cfg, kt) = ensemble(scale, 101, bern(0.5), Strategy::kt_pseudo_count(0.25), 1000, N5, &cks, false);
        let med: Vec<f64> = cks.iter().map(|&n| median_wealth(&kt, n)).collect();
        let ratio = med[1] / med[2];
        checks.push(check(
            "KT medians",
            strictly_decreasing(&med) && med[2] < 0.05,
            format!("{} > {} > {} (last < 0.05)", e(med[0]), e(med[1]), e(med[2])),
        ));
        checks.push(check("KT ratio 1e4/1e5", (2.0..=5.0).contains(&ratio), format!("{ratio:.3} in [2, 5]")));

        // closed-form KT wealth on regenerated paths
        let mut worst: f64 = 0.0;
        for i in 0..cfg.paths.min(20) {
            let xs = sample_path(&cfg.dist, N5 as usize, hash64(cfg.master_seed, i)).expect("path");
            for (k, &n) in cks.iter().enumerate() {
                let heads = xs[..n as usize].iter().filter(|&&x| x == 1.0).count() as u64;
                let cf = kt_binary_log_wealth(heads, n - heads, 0.5);
                let got = kt.paths[i as usize].samples[k].log_wealth;
                worst = worst.max((got - cf).abs() / (1.0 + cf.abs()));
            }
        }
        checks.push(check("KT closed form", worst < 1e-9, format!("max rel err {}", e(worst))));
        tables.push(("kt".into(), checkpoints_csv(&kt)));

        for (name, strat) in [
            ("GRAPA", Strategy::grapa(0.5)),
            ("aGRAPA", Strategy::agrapa(0.5)),
            ("PrH", Strategy::hedged(0.05, 0.5)),
        ] {
            let (_, s) = ensemble(scale, 102, bern(0.5), strat, 1000, N5, &cks, false);
            let med: Vec<f64> = cks.iter().map(|&n| median_wealth(&s, n)).collect();
            checks.push(check(
                format!("{name} medians"),
                strictly_decreasing(&med) && med[2] < 0.1,
                format!("{} > {} > {} (last < 0.1)", e(med[0]), e(med[1]), e(med[2])),
            ));
            tables.push((name.to_lowercase(), checkpoints_csv(&s)));
        }
        (checks, tables)
    })
}

pub fn kelly_growth(scale: Scale) -> Outcome {
    timed(2, "power-one Kelly growth", || {
        let (_, s) = ensemble(scale, 201, bern(0.6), Strategy::grapa(0.5), 200, N5, &[N5], false);
        let rate = mean(&s.at(N5, |p| p.log_wealth / N5 as f64));
        let kl = bernoulli_kl(0.6, 0.5);
        let rel = (rate / kl - 1.0).abs();
        (
            vec![check("GRAPA mean log W/n", rel <= 0.10, format!("{rate:.6} vs KL {kl:.6} (rel {rel:.3} ≤ 0.10)"))],
            vec![("grapa_alt".into(), checkpoints_csv(&s))],
        )
    })
}

pub fn chi_square_limit(scale: Scale) -> Outcome {
    timed(3, "chi-square limit of 2 L_n*", || {
        let mut checks = Vec::new();
        let mut tables = Vec::new();
        for (name, dist) in [("Bernoulli(1/2)", bern(0.5)), ("Beta(2,2)", DistSpec::ScaledBeta { a: 2.0, b: 2.0 })] {
            let (_, s) = ensemble(scale, 301, dist, fixed_fraction(0.0), 2000, N4, &[N4], true);
            let ks = s.checkpoints[0].ks_chi2;
            checks.push(check(format!("{name} KS"), ks < 0.05, format!("{ks:.4} < 0.05")));
            tables.push((name.into(), klinf_csv(&s)));
        }
        (checks, tables)
    })
}

pub fn no_cash(scale: Scale) -> Outcome {
    timed(4, "no-cash criterion", || {
        let cks = [N4, N5];
        let mut checks = Vec::new();
        let mut tables = Vec::new();
        let (_, s) = ensemble(scale, 401, bern(0.5), Strategy::beta_mixture(0.3, 0.5, 0.5), 500, N5, &cks, false);
        let w = s.at(N5, |p| p.log_wealth.exp());
        let frac = w.iter().filter(|&&v| (v - 0.3).abs() < 0.05).count() as f64 / w.len() as f64;
        checks.push(check("atom 0.3 band", frac >= 0.95, format!("{frac:.3} of paths within 0.3 ± 0.05 (≥ 0.95)")));
        tables.push(("atom03".into(), checkpoints_csv(&s)));
        for (name, strat) in [
            ("Beta-UP", Strategy::beta_mixture(0.0, 0.5, 0.5)),
            ("Robbins", Strategy::robbins_mixture()),
        ] {
            let (_, s) = ensemble(scale, 402, bern(0.5), strat, 500, N5, &cks, false);
            let med = median_wealth(&s, N5);
            checks.push(check(format!("{name} median"), med < 0.05, format!("{} < 0.05", e(med))));
            tables.push((name.into(), checkpoints_csv(&s)));
        }
        (checks, tables)
    })
}

pub fn ville(scale: Scale) -> Outcome {
    timed(5, "Ville's inequality", || {
        let bound = 0.05 + 3.0 * (0.05f64 * 0.95 / 2000.0).sqrt();
        let mut checks = Vec::new();
        let mut tables = Vec::new();
        for (name, strat) in [
            ("KT", Strategy::kt_pseudo_count(0.25)),
            ("Beta-UP", Strategy::beta_mixture(0.0, 0.5, 0.5)),
        ] {
            let (_, s) = ensemble(scale, 501, bern(0.5), strat, 2000, N4, &[N4], false);
            let sups = s.at(N4, |p| p.sup_log_wealth.exp());
            let rate = ville_violation_rate(&sups, 20.0);
            checks.push(check(format!("{name} P(sup W ≥ 20)"), rate <= bound, format!("{rate:.4} ≤ {bound:.4}")));
            tables.push((name.into(), checkpoints_csv(&s)));
        }
        (checks, tables)
    })
}

pub fn normality(scale: Scale) -> Outcome {
    timed(6, "asymptotic normality of sqrt(n) lambda_n", || {
        let mut checks = Vec::new();
        let mut tables = Vec::new();
        for (name, strat) in [
            ("KT", Strategy::kt_pseudo_count(0.25)),
            ("GRAPA", Strategy::grapa(0.5)),
            ("aGRAPA", Strategy::agrapa(0.5)),
        ] {
            let (_, s) = ensemble(scale, 601, bern(0.5), strat, 2000, N4, &[N4], false);
            let v = s.checkpoints[0].var_sqrtn_lambda;
            checks.push(check(format!("{name} var"), (v / 4.0 - 1.0).abs() <= 0.15, format!("{v:.3} vs 4 ± 15%")));
            tables.push((name.into(), checkpoints_csv(&s)));
        }
        (checks, tables)
    })
}

pub fn grapa_kt_coincidence() -> Outcome {
    timed(7, "GRAPA/KT Bernoulli coincidence", || {
        let mut checks = Vec::new();
        for numerator in [KtNumerator::Half, KtNumerator::PseudoCount] {
            let mut worst: f64 = 0.0;
            let mut violations = 0u64;
            for m in [0.3, 0.5, 0.7] {
                let nl = null(m);
                let c = m * (1.0 - m);
                for len in 1..=11usize {
                    for bits in 0u32..1 << len {
                        let mut st = PathState::new(true);
                        for i in 0..len {
                            st.update(0.0, ((bits >> i) & 1) as f64, nl).expect("legal");
                        }
                        // fractions for round n = len + 1
                        let n = (len + 1) as f64;
                        let g = grapa_fraction(st.history.as_ref().expect("history"), nl, DEFAULT_TOL);
                        let k = kt_fraction_with(&st, c, numerator, nl.bounds(), nl);
                        let ratio = (g - k).abs() / (2.0 / (c * n));
                        worst = worst.max(ratio);
                        if ratio > 1.0 + 1e-9 {
                            violations += 1;
                        }
                    }
                }
            }
            checks.push(check(
                format!("{numerator:?} numerator"),
                violations == 0,
                format!("max |Δλ|·m(1−m)n/2 = {worst:.3}, {violations} violations"),
            ));
        }
        (checks, Vec::new())
    })
}

pub fn tn_divergence(scale: Scale) -> Outcome {
    timed(8, "sum of S_n^2/n^2", || {
        let (_, s) = ensemble(scale, 801, bern(0.5), fixed_fraction(0.0), 2000, N4, &[N3, N4], false);
        let target = 0.25 * harmonic(N4);
        let m4 = s.checkpoints[1].tn_mean;
        let rel = (m4 / target - 1.0).abs();
        let (q3, q4) = (median(&s.at(N3, |p| p.tn)), median(&s.at(N4, |p| p.tn)));
        (
            vec![
                check("mean T_N", rel <= 0.10, format!("{m4:.4} vs σ²H_N = {target:.4} (rel {rel:.3})")),
                check("median growth", q4 > q3, format!("{q3:.4} → {q4:.4}")),
            ],
            vec![("tn".into(), checkpoints_csv(&s))],
        )
    })
}

fn summarize_traces(traces: &[LeverageTrace]) -> (usize, f64, u64) {
    let on: Vec<&LeverageTrace> = traces.iter().filter(|t| t.pnb).collect();
    let dev = on.iter().map(|t| t.max_rel_dev).fold(0.0, f64::max);
    let viol = on.iter().map(|t| t.alt_violations + t.null_violations).sum();
    (on.len(), dev, viol)
}

pub fn leverage(scale: Scale) -> Outcome {
    timed(9, "opportunistic leverage identity", || {
        let rho = 0.4;
        let mut checks = Vec::new();
        let mut tables = Vec::new();
        for (name, strat) in [
            ("atom-0.5 mixture", Strategy::beta_mixture(0.5, 0.5, 0.5)),
            ("fixed 0.1", fixed_fraction(0.1)),
        ] {
            let exhaustive: Vec<LeverageTrace> = (0u32..1 << 12)
                .map(|bits| {
                    let xs = (0..12).map(move |i| ((bits >> i) & 1) as f64);
                    leverage_trace(&strat, null(0.5), rho, xs, &[]).expect("trace")
                })
                .collect();
            let config = ExperimentConfig {
                dist: bern(0.5),
                null_m: 0.5,
                strategy: strat.clone(),
                horizon: N3,
                paths: scale.paths(100),
                checkpoints: vec![N3],
                master_seed: 901,
                track_klinf: false,
            };
            let sampled = run_leverage(&config, rho, scale.workers).expect("leverage runs");
            for (kind, traces) in [("binary", &exhaustive), ("sampled", &sampled)] {
                let (count, dev, viol) = summarize_traces(traces);
                checks.push(check(
                    format!("{name} {kind}"),
                    dev <= 1e-9 && viol == 0 && count > 0,
                    format!("{count}/{} on N^ρ, max rel dev {}, {viol} order violations", traces.len(), e(dev)),
                ));
            }
            tables.push((name.into(), leverage_csv(&sampled)));
        }
        (checks, tables)
    })
}

fn subg(scale: Scale, rule: SubgRule) -> (SubgConfig, Vec<betlab::simlab::SubgPath>) {
    let config = SubgConfig {
        dist: DistSpec::Normal { mu: 0.0, sigma: 1.0 },
        m: 0.0,
        rule,
        horizon: N5,
        paths: scale.paths(500),
        checkpoints: vec![N4, N5],
        master_seed: 1001,
    };
    let paths = run_subg(&config, scale.workers).expect("subg runs");
    (config, paths)
}

pub fn subgaussian(scale: Scale) -> Outcome {
    timed(10, "sub-Gaussian dichotomy", || {
        let mut checks = Vec::new();
        let mut tables = Vec::new();

        let (cfg, p) = subg(scale, SubgRule::Plugin { power: 0.5 });
        let med = median(&p.iter().map(|q| q.log_m[1].exp()).collect::<Vec<_>>());
        checks.push(check("1/sqrt(k) median M", med < 1e-3, format!("{} < 1e-3", e(med))));
        tables.push(("plugin_sqrt".into(), subg_csv(&cfg.checkpoints, &p)));

        let (cfg, p) = subg(scale, SubgRule::Plugin { power: 1.0 });
        let med = median(&p.iter().map(|q| (q.log_m[1] - q.log_m[0]).abs()).collect::<Vec<_>>());
        checks.push(check("1/k median |Δ log M|", med < 0.1, format!("{med:.4} < 0.1")));
        tables.push(("plugin_harmonic".into(), subg_csv(&cfg.checkpoints, &p)));

        let (cfg, p) = subg(scale, SubgRule::Mixture { atom: 0.3, tau: 1.0 });
        let med = median(&p.iter().map(|q| q.log_m[1].exp()).collect::<Vec<_>>());
        checks.push(check("atom-0.3 median M", (med - 0.3).abs() <= 0.05, format!("{med:.4} in 0.3 ± 0.05")));
        tables.push(("mixture".into(), subg_csv(&cfg.checkpoints, &p)));

        let xs = sample_path(&cfg.dist, 100, hash64(1002, 0)).expect("path");
        let nodes = gaussian_prior_nodes(0.0, 1.0, 100_000);
        let mut state = SubgState::new();
        let mut worst: f64 = 0.0;
        for &x in &xs {
            state.observe(0.0, x, 0.0);
            let q = subg_quadrature_mixture_log(&state, &nodes, 0.0);
            let c = subg_gaussian_mixture_log(&state, 1.0);
            worst = worst.max(((q - c).exp() - 1.0).abs());
        }
        checks.push(check("closed form vs quadrature", worst <= 1e-6, format!("max rel {} (n ≤ 100)", e(worst))));
        (checks, tables)
    })
}

pub fn confidence_sequence(scale: Scale) -> Outcome {
    timed(11, "confidence-sequence coverage", || {
        let config = ConfSeqConfig {
            dist: bern(0.5),
            family: Strategy::hedged(0.05, 0.5),
            alpha: 0.05,
            grid_step: 0.005,
            horizon: N4,
            paths: scale.paths(500),
            checkpoints: vec![N3, N4],
            master_seed: 1101,
            instantaneous: false,
        };
        let rows = run_confseq(&config, scale.workers).expect("confseq runs");
        let covered = rows.iter().filter(|r| r[1].running_covers(0.5)).count() as f64 / rows.len() as f64;
        let bound = 0.95 - 3.0 * (0.05f64 * 0.95 / 500.0).sqrt();
        let width = median(&rows.iter().map(|r| r[1].run_hi - r[1].run_lo).collect::<Vec<_>>());
        (
            vec![check(
                "running coverage",
                covered >= bound,
                format!("{covered:.3} ≥ {bound:.4} (median width {width:.3})"),
            )],
            vec![("confseq".into(), confseq_csv(&rows))],
        )
    })
}

pub fn intermittent_bets(scale: Scale) -> Outcome {
    timed(12, "intermittent non-bankruptcy", || {
        let strat = intermittent(Strategy::kt(2.0), 2.0);
        let cks = [N4, N5];
        let (_, s) = ensemble(scale, 1201, bern(0.5), strat.clone(), 500, N5, &cks, false);
        let med = median_wealth(&s, N5);
        let drift = median(
            &s.paths
                .iter()
                .map(|p| (p.samples[1].log_wealth - p.samples[0].log_wealth).abs())
                .collect::<Vec<_>>(),
        );
        let (_, a) = ensemble(scale, 1202, bern(0.6), strat, 500, N5, &cks, false);
        let g4 = median(&a.at(N4, |p| p.log_wealth / (N4 as f64).sqrt()));
        let g5 = median(&a.at(N5, |p| p.log_wealth / (N5 as f64).sqrt()));
        let ratio = g5 / g4;
        (
            vec![
                check("null median W", med > 0.05, format!("{med:.4} > 0.05")),
                check("null median |Δ log W|", drift < 0.2, format!("{drift:.4} < 0.2")),
                check("alt n^(-1/2) log W ratio", (1.0 / 3.0..=3.0).contains(&ratio), format!("{g4:.4} → {g5:.4} (ratio {ratio:.3})")),
            ],
            vec![("null".into(), checkpoints_csv(&s)), ("alt".into(), checkpoints_csv(&a))],
        )
    })
}

/// The randomized studies, in criterion order.
pub fn randomized_studies() -> Vec<fn(Scale) -> Outcome> {
    vec![
        null_bankruptcy,
        kelly_growth,
        chi_square_limit,
        no_cash,
        ville,
        normality,
        tn_divergence,
        leverage,
        subgaussian,
        confidence_sequence,
        intermittent_bets,
    ]
}

/// Reruns every randomized study under each worker count and compares tables.
pub fn determinism(paths_div: u64, worker_counts: &[usize]) -> Outcome {
    timed(13, "determinism across worker counts", || {
        let mut checks = Vec::new();
        for study in randomized_studies() {
            let runs: Vec<Outcome> = worker_counts
                .iter()
                .map(|&w| study(Scale { paths_div, workers: w }))
                .collect();
            let same = runs.windows(2).all(|r| r[0].tables == r[1].tables);
            let bytes: usize = runs[0].tables.iter().map(|(_, t)| t.len()).sum();
            checks.push(check(
                format!("#{}", runs[0].id),
                same && bytes > 0,
                format!("{} tables, {bytes} bytes", runs[0].tables.len()),
            ));
        }
        (checks, Vec::new())
    })
}

/// Formats a value the way the CSV writers do.
pub fn csv_value(v: f64) -> String {
    fmt_f64(v)
}
