use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use threshreg::montecarlo::{EstimationTable, SimConfig, SizeTable};
use threshreg::DetectionResult;

pub const SCHEMA_VERSION: u32 = 1;

pub fn tool_version() -> String {
    format!("threshreg {}", env!("CARGO_PKG_VERSION"))
}

/// Every resolved setting of a detection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectEcho {
    pub input: String,
    pub y: String,
    pub x: Vec<String>,
    pub q: String,
    pub has_header: bool,
    pub n: usize,
    pub dropped_rows: usize,
    pub c: f64,
    pub delta: f64,
    pub scale: f64,
    /// True when the scale was taken from the covariates' standard deviation.
    pub scale_from_data: bool,
    pub h: f64,
    pub m: usize,
    pub alpha: f64,
    pub grid_points: usize,
    pub trim: f64,
    pub test_trim: f64,
    pub min_regime_obs: usize,
    pub max_thresholds: usize,
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
    /// True when the box was set to mean +/- 2 sd of each covariate.
    pub box_from_data: bool,
    /// Command line that repeats this run with every value pinned.
    pub reproduce: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectTiming {
    pub load_seconds: f64,
    pub detect_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub version: String,
    pub command: String,
    pub config: DetectEcho,
    pub timing: DetectTiming,
    pub detection: DetectionResult,
    /// Position of each threshold in the empirical distribution of q, in percent.
    pub threshold_percentiles: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalRow {
    pub k: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub schema_version: u32,
    pub version: String,
    pub command: String,
    pub alphas: Vec<f64>,
    pub rows: Vec<CriticalRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SimTable {
    Size(SizeTable),
    Estimation(EstimationTable),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub schema_version: u32,
    pub version: String,
    pub command: String,
    pub config: SimConfig,
    pub seconds: f64,
    pub table: SimTable,
}

/// Quotes a word for a POSIX shell when it needs it.
pub fn shell_word(word: &str) -> String {
    let plain = !word.is_empty() && word.chars().all(|c| c.is_ascii_alphanumeric() || "-_./=:,+".contains(c));
    if plain {
        word.to_string()
    } else {
        format!("'{}'", word.replace('\'', r"'\''"))
    }
}

fn fmt_opt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4}")
    } else {
        "-".into()
    }
}

impl RunReport {
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let d = &self.detection;
        let mut out = String::new();
        let _ = writeln!(out, "{} rows used ({} dropped), h = {:.6}, box lo {:?} hi {:?}", c.n, c.dropped_rows, c.h, c.box_lo, c.box_hi);
        let _ = writeln!(out, "{:>5}  {:>10}  {:>3}  {:>9}  {:>9}  {:>6}", "s", "F", "k", "critical", "p-value", "reject");
        for r in &d.reports {
            let _ = writeln!(
                out,
                "{:>5}  {:>10}  {:>3}  {:>9.4}  {:>9.4}  {:>6}",
                r.s_null,
                fmt_opt(r.f_stat),
                r.k,
                r.critical_value,
                r.p_value,
                if r.reject { "yes" } else { "no" }
            );
        }
        let _ = writeln!(out, "thresholds found: {}", d.s_hat);
        for (g, p) in d.gammas.iter().zip(&self.threshold_percentiles) {
            let _ = writeln!(out, "  {g:.6}  (q percentile {p:.1})");
        }
        if !d.discovery_order.is_empty() {
            let order: Vec<String> = d.discovery_order.iter().map(|g| format!("{g:.6}")).collect();
            let _ = writeln!(out, "discovery order: {}", order.join(", "));
        }
        if d.cap_reached {
            let _ = writeln!(out, "stopped at --max-thresholds while still rejecting");
        }
        let _ = write!(out, "reproduce: {}", c.reproduce);
        out
    }
}

impl CriticalReport {
    pub fn to_text(&self) -> String {
        let mut out = format!("{:>3}", "k");
        for a in &self.alphas {
            let _ = write!(out, "  {:>9}", format!("{a}"));
        }
        for row in &self.rows {
            let _ = write!(out, "\n{:>3}", row.k);
            for v in &row.values {
                let _ = write!(out, "  {v:>9.6}");
            }
        }
        out
    }
}

impl SimReport {
    pub fn to_text(&self) -> String {
        match &self.table {
            SimTable::Size(t) => t.to_string(),
            SimTable::Estimation(t) => t.to_string(),
        }
    }
}
