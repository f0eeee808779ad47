//! CSV and JSON writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::simlab::confseq::ConfSeqRow;
use crate::simlab::ensemble::EnsembleSummary;
use crate::simlab::leverage::LeverageTrace;
use crate::simlab::subg::SubgPath;

/// 17 significant digits; `inf`, `-inf`, `nan` for the rest.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

/// Builds a CSV document; cells are formatted by the caller.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self { buf }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

pub const CHECKPOINT_COLUMNS: [&str; 15] = [
    "checkpoint",
    "q01",
    "q05",
    "q25",
    "q50",
    "q75",
    "q95",
    "q99",
    "bankrupt_frac_1e2",
    "bankrupt_frac_1e6",
    "mean_sqrtn_lambda",
    "var_sqrtn_lambda",
    "tn_mean",
    "sos_q50",
    "ks_chi2",
];

pub fn checkpoints_csv(summary: &EnsembleSummary) -> String {
    let mut csv = Csv::new(&CHECKPOINT_COLUMNS);
    for c in &summary.checkpoints {
        let mut cells = vec![c.n.to_string()];
        cells.extend(c.wealth_quantiles.iter().map(|&q| fmt_f64(q)));
        cells.extend(
            [
                c.bankrupt_frac_1e2,
                c.bankrupt_frac_1e6,
                c.mean_sqrtn_lambda,
                c.var_sqrtn_lambda,
                c.tn_mean,
                c.sos_quantiles[3],
                c.ks_chi2,
            ]
            .map(fmt_f64),
        );
        csv.row(&cells);
    }
    csv.finish()
}

/// One row per path and checkpoint.
pub fn paths_csv(summary: &EnsembleSummary) -> String {
    let mut csv = Csv::new(&["path", "checkpoint", "log_wealth", "sqrtn_lambda", "chi_sq", "tn", "sos", "sup_log_wealth"]);
    for p in &summary.paths {
        for (c, s) in summary.checkpoints.iter().zip(&p.samples) {
            let mut cells = vec![p.index.to_string(), c.n.to_string()];
            cells.extend([s.log_wealth, s.sqrtn_lambda, s.chi_sq, s.tn, s.sos, s.sup_log_wealth].map(fmt_f64));
            csv.row(&cells);
        }
    }
    csv.finish()
}

/// Per-path `2 L_n*` at the last checkpoint.
pub fn klinf_csv(summary: &EnsembleSummary) -> String {
    let mut csv = Csv::new(&["path", "chi_sq"]);
    for p in &summary.paths {
        if let Some(s) = p.samples.last() {
            csv.row(&[p.index.to_string(), fmt_f64(s.chi_sq)]);
        }
    }
    csv.finish()
}

pub fn confseq_csv(rows: &[Vec<ConfSeqRow>]) -> String {
    let mut csv = Csv::new(&["path", "checkpoint", "lo", "hi", "run_lo", "run_hi"]);
    for (i, path) in rows.iter().enumerate() {
        for r in path {
            let mut cells = vec![i.to_string(), r.n.to_string()];
            cells.extend([r.lo, r.hi, r.run_lo, r.run_hi].map(fmt_f64));
            csv.row(&cells);
        }
    }
    csv.finish()
}

pub fn leverage_csv(traces: &[LeverageTrace]) -> String {
    let mut csv = Csv::new(&[
        "path",
        "pnb",
        "rounds_on_event",
        "max_rel_dev",
        "alt_violations",
        "null_violations",
        "wealth",
        "leveraged_wealth",
    ]);
    for (i, t) in traces.iter().enumerate() {
        csv.row(&[
            i.to_string(),
            u8::from(t.pnb).to_string(),
            t.rounds_on_event.to_string(),
            fmt_f64(t.max_rel_dev),
            t.alt_violations.to_string(),
            t.null_violations.to_string(),
            fmt_f64(t.wealth.last().copied().unwrap_or(f64::NAN)),
            fmt_f64(t.leveraged_wealth.last().copied().unwrap_or(f64::NAN)),
        ]);
    }
    csv.finish()
}

pub fn subg_csv(checkpoints: &[u64], paths: &[SubgPath]) -> String {
    let mut csv = Csv::new(&["path", "checkpoint", "log_m"]);
    for (i, p) in paths.iter().enumerate() {
        for (n, v) in checkpoints.iter().zip(&p.log_m) {
            csv.row(&[i.to_string(), n.to_string(), fmt_f64(*v)]);
        }
    }
    csv.finish()
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> std::io::Result<()> {
    fs::write(dir.join(name), text)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    let _ = writeln!(text);
    write_text(dir, name, &text)
}
