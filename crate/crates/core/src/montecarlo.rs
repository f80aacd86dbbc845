//! Data-generating processes and replication harness for the simulation studies.

use std::fmt;

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{critical_value, sequential_test, InferenceConfig, DEFAULT_M};
use crate::kernel::{KernelConfig, WeightBox, DEFAULT_DELTA};
use crate::normal;
use crate::regime::{QOrder, RegimePartition, Sample};
use crate::search::{best_split, SearchConfig};

/// True thresholds of the three-threshold design.
pub const TRUE_THRESHOLDS: [f64; 3] = [-0.7, 0.15, 0.5];

/// Independent stream for replication `rep` of the experiment keyed by `seed`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Standard normal draw by inverting the CDF at a uniform on the open unit interval.
pub fn std_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let u = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
    normal::quantile(u).expect("u lies strictly inside (0, 1)")
}

/// Single-regime design: `Y = exp(-0.25 X) + sqrt(exp(-0.2 (X + Q)^2)) e`,
/// `X = sqrt(0.2) Q + sqrt(0.8) u`, with `Q, u, e` independent standard normals.
pub fn dgp_null<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Sample {
    let (s02, s08) = (0.2f64.sqrt(), 0.8f64.sqrt());
    let mut y = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for _ in 0..n {
        let qi = std_normal(rng);
        let ui = std_normal(rng);
        let ei = std_normal(rng);
        let xi = s02 * qi + s08 * ui;
        y.push((-0.25 * xi).exp() + (-0.2 * (xi + qi).powi(2)).exp().sqrt() * ei);
        x.push(xi);
        q.push(qi);
    }
    Sample::univariate(y, x, q).expect("generated sample is finite")
}

/// Regime mean of the three-threshold design.
pub fn three_threshold_mean(x: f64, q: f64) -> f64 {
    let [g1, g2, g3] = TRUE_THRESHOLDS;
    if q < g1 {
        (-0.25 * x).exp()
    } else if q < g2 {
        1.0 + (-0.5 * x).exp()
    } else if q < g3 {
        2.0 + (-0.1 * x).exp()
    } else {
        0.5 + (-0.8 * x).exp()
    }
}

/// Three-threshold design with `X, Q, e` independent standard normals and
/// noise `sqrt(0.5625 exp(-X^2)) e`.
pub fn dgp_three_thresholds<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Sample {
    let mut y = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for _ in 0..n {
        let xi = std_normal(rng);
        let qi = std_normal(rng);
        let ei = std_normal(rng);
        y.push(three_threshold_mean(xi, qi) + (0.5625 * (-xi * xi).exp()).sqrt() * ei);
        x.push(xi);
        q.push(qi);
    }
    Sample::univariate(y, x, q).expect("generated sample is finite")
}

/// Truths in the order sequential SSR minimization recovers them on the
/// three-threshold design: the population SSR of a single split is lowest at
/// -0.7, then 0.5 given -0.7, then 0.15.
pub const DISCOVERY_TRUTHS: [f64; 3] = [-0.7, 0.5, 0.15];

/// Default half-width of the weight box used in the simulations.
pub const DEFAULT_SIM_BOX: f64 = 1.5;

/// Size and replication settings of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub c: f64,
    pub delta: f64,
    pub m: usize,
    pub alphas: Vec<f64>,
    /// The weight box is `[-box_half, box_half]`.
    pub box_half: f64,
    pub search: SearchConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 500,
            reps: 200,
            seed: 7,
            c: 1.0,
            delta: DEFAULT_DELTA,
            m: DEFAULT_M,
            alphas: vec![0.10, 0.05, 0.01],
            box_half: DEFAULT_SIM_BOX,
            search: SearchConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Domain("reps must be at least 1".into()));
        }
        if self.n < 50 {
            return Err(Error::Domain(format!("n must be at least 50, got {}", self.n)));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(Error::Domain("alphas must be non-empty and inside (0, 1)".into()));
        }
        if !(self.box_half > 0.0 && self.box_half.is_finite()) {
            return Err(Error::Domain(format!("box half-width must be positive, got {}", self.box_half)));
        }
        self.kernel()?;
        self.inference().validate()?;
        self.search.validate()
    }

    /// Bandwidth `c n^(-1/delta)`; the covariates have unit scale by construction.
    pub fn kernel(&self) -> Result<KernelConfig> {
        KernelConfig::from_rule(self.c, 1.0, self.n, self.delta, 1)
    }

    pub fn inference(&self) -> InferenceConfig {
        InferenceConfig {
            m: self.m,
            grid_trim: self.search.test_trim,
            ..InferenceConfig::default()
        }
    }

    pub fn weight_box(&self) -> Result<WeightBox> {
        WeightBox::symmetric(self.box_half, 1)
    }
}

/// Rejection rates of the test of no threshold against one on the null design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeTable {
    pub n: usize,
    pub reps: usize,
    pub c: f64,
    pub alphas: Vec<f64>,
    pub rejection_rate: Vec<f64>,
    /// `sqrt(rate (1 - rate) / completed)`
    pub monte_carlo_se: Vec<f64>,
    /// Replications whose test raised an error; excluded from the rates.
    pub failures: usize,
    pub mean_statistic: f64,
}

/// Mean, standard error and MSE of one set of threshold estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub truth: f64,
    pub mean: f64,
    pub se: f64,
    pub mse: f64,
}

impl EstimateSummary {
    /// Standard error with the `k - 1` denominator; `mse = (mean - truth)^2 + se^2`.
    pub fn from_values(values: &[f64], truth: f64) -> Self {
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let se = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            truth,
            mean,
            se,
            mse: (mean - truth).powi(2) + se * se,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationTable {
    pub n: usize,
    pub reps: usize,
    /// Round `r` estimates against the `r`-th threshold in discovery order.
    pub by_round: Vec<EstimateSummary>,
    /// The three estimates of each replication sorted and matched to the
    /// sorted truths.
    pub by_threshold: Vec<EstimateSummary>,
    pub failures: usize,
}

/// Runs `body` for every replication in parallel and returns the results in
/// replication order, so the outcome does not depend on the thread count.
fn replicate<T: Send>(sim: &SimConfig, body: impl Fn(&mut ChaCha8Rng) -> T + Sync) -> Vec<T> {
    (0..sim.reps as u64)
        .into_par_iter()
        .map(|rep| body(&mut replication_rng(sim.seed, rep)))
        .collect()
}

/// Empirical size of the test of `s = 0` against `s = 1` on the null design.
pub fn size_experiment(sim: &SimConfig) -> Result<SizeTable> {
    sim.validate()?;
    let config = sim.kernel()?;
    let settings = sim.inference();
    let weight_box = sim.weight_box()?;
    let outcomes = replicate(sim, |rng| {
        let sample = dgp_null(sim.n, rng);
        sequential_test(&sample, &RegimePartition::empty(), &settings, &config, &weight_box).map(|r| (r.f_stat, r.k))
    });
    let done: Vec<(f64, usize)> = outcomes.iter().filter_map(|o| o.as_ref().ok().copied()).collect();
    let failures = outcomes.len() - done.len();
    let count = done.len().max(1) as f64;
    let mut rates = Vec::with_capacity(sim.alphas.len());
    for &alpha in &sim.alphas {
        let mut hits = 0usize;
        for &(f, k) in &done {
            if f > critical_value(k, alpha)? {
                hits += 1;
            }
        }
        rates.push(hits as f64 / count);
    }
    Ok(SizeTable {
        n: sim.n,
        reps: sim.reps,
        c: sim.c,
        alphas: sim.alphas.clone(),
        monte_carlo_se: rates.iter().map(|r| (r * (1.0 - r) / count).sqrt()).collect(),
        rejection_rate: rates,
        failures,
        mean_statistic: done.iter().map(|d| d.0).sum::<f64>() / count,
    })
}

/// Thresholds from three rounds of sequential estimation, without testing.
pub fn three_rounds(sample: &Sample, config: &KernelConfig, search: &SearchConfig) -> Result<[f64; 3]> {
    let order = QOrder::new(sample);
    let mut partition = RegimePartition::empty();
    let mut found = [0.0; 3];
    for slot in &mut found {
        let (best, _) = best_split(sample, &order, &partition, config, search)?;
        let (gamma, _) = best.ok_or_else(|| Error::Search("no regime admits another threshold".into()))?;
        partition = partition.with_threshold(gamma)?;
        *slot = gamma;
    }
    Ok(found)
}

/// Per-round and per-threshold summaries of three-round estimates.
pub fn summarize_rounds(estimates: &[[f64; 3]]) -> (Vec<EstimateSummary>, Vec<EstimateSummary>) {
    let by_round = (0..3)
        .map(|r| EstimateSummary::from_values(&estimates.iter().map(|e| e[r]).collect::<Vec<_>>(), DISCOVERY_TRUTHS[r]))
        .collect();
    let sorted: Vec<[f64; 3]> = estimates
        .iter()
        .map(|e| {
            let mut s = *e;
            s.sort_by(f64::total_cmp);
            s
        })
        .collect();
    let by_threshold = (0..3)
        .map(|r| EstimateSummary::from_values(&sorted.iter().map(|e| e[r]).collect::<Vec<_>>(), TRUE_THRESHOLDS[r]))
        .collect();
    (by_round, by_threshold)
}

/// Accuracy of sequential threshold estimation on the three-threshold design.
pub fn estimation_experiment(sim: &SimConfig) -> Result<EstimationTable> {
    sim.validate()?;
    let config = sim.kernel()?;
    let outcomes = replicate(sim, |rng| {
        let sample = dgp_three_thresholds(sim.n, rng);
        three_rounds(&sample, &config, &sim.search)
    });
    let done: Vec<[f64; 3]> = outcomes.iter().filter_map(|o| o.as_ref().ok().copied()).collect();
    if done.is_empty() {
        return Err(Error::Search("every replication failed".into()));
    }
    let (by_round, by_threshold) = summarize_rounds(&done);
    Ok(EstimationTable {
        n: sim.n,
        reps: sim.reps,
        by_round,
        by_threshold,
        failures: outcomes.len() - done.len(),
    })
}

impl fmt::Display for SizeTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Empirical size, n = {}, reps = {}, c = {}", self.n, self.reps, self.c)?;
        writeln!(f, "{:>8}  {:>8}  {:>8}", "alpha", "rate", "se")?;
        for ((a, r), se) in self.alphas.iter().zip(&self.rejection_rate).zip(&self.monte_carlo_se) {
            writeln!(f, "{:>8.3}  {:>8.3}  {:>8.4}", a, r, se)?;
        }
        write!(f, "failed replications: {}", self.failures)
    }
}

impl fmt::Display for EstimationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Threshold estimation, n = {}, reps = {}", self.n, self.reps)?;
        writeln!(f, "{:>9}  {:>7}  {:>9}  {:>9}  {:>10}", "", "truth", "mean", "se", "mse")?;
        for (i, r) in self.by_round.iter().enumerate() {
            writeln!(f, "{:>9}  {:>7.2}  {:>9.4}  {:>9.4}  {:>10.3e}", format!("round {}", i + 1), r.truth, r.mean, r.se, r.mse)?;
        }
        for r in &self.by_threshold {
            writeln!(f, "{:>9}  {:>7.2}  {:>9.4}  {:>9.4}  {:>10.3e}", "sorted", r.truth, r.mean, r.se, r.mse)?;
        }
        write!(f, "failed replications: {}", self.failures)
    }
}
