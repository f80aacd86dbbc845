//! Test for an extra threshold inside the regimes of a given partition.
//!
//! For every candidate split `tau` of a regime the weighted squared gap
//! between the one-regime fit and the two sub-regime fits is centred by its
//! bias estimate and scaled by its variance estimate. The standardized
//! candidates are decorrelated with the symmetric inverse square root of
//! their estimated correlation matrix and averaged into a regime statistic
//! `Z`; the statistic for `s` against `s + 1` thresholds is the largest `Z`
//! over the regimes, with limiting CDF `Phi^(s + 1)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{convolution_constant, roughness_constant, KernelConfig, WeightBox};
use crate::linalg::{matrix_inv_sqrt, DEFAULT_EIG_FLOOR};
use crate::normal;
use crate::regime::{block_moments, check_partition, full_density, FitScale, Moments, QOrder, RegimeInterval, RegimePartition, Sample};

pub const DEFAULT_M: usize = 7;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-12;
pub const DEFAULT_GRID_TRIM: f64 = 0.10;

/// Candidate grid size, level and numerical floors of the test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceConfig {
    pub m: usize,
    pub alpha: f64,
    pub variance_floor: f64,
    pub eig_floor: f64,
    /// Fraction of the regime's observations cut from each end before the
    /// candidate grid is laid out.
    pub grid_trim: f64,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            m: DEFAULT_M,
            alpha: DEFAULT_ALPHA,
            variance_floor: DEFAULT_VARIANCE_FLOOR,
            eig_floor: DEFAULT_EIG_FLOOR,
            grid_trim: DEFAULT_GRID_TRIM,
        }
    }
}

impl InferenceConfig {
    pub fn new(m: usize, alpha: f64) -> Result<Self> {
        let cfg = Self { m, alpha, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Domain("candidate grid size m must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(0.0..0.5).contains(&self.grid_trim) {
            return Err(Error::Domain(format!("grid trim must lie in [0, 0.5), got {}", self.grid_trim)));
        }
        if !(self.variance_floor > 0.0 && self.eig_floor > 0.0) {
            return Err(Error::Domain("floors must be positive".into()));
        }
        Ok(())
    }
}

/// Equally spaced interior candidates of a regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateGrid {
    pub regime: RegimeInterval,
    pub taus: Vec<f64>,
}

impl CandidateGrid {
    /// `m` points splitting `[lo, hi]` into `m + 1` equal gaps, where `lo` and
    /// `hi` are the empirical `trim` and `1 - trim` quantiles of `q` inside
    /// the regime (the extreme observations when `trim` is zero).
    pub fn for_regime(sample: &Sample, regime: &RegimeInterval, m: usize, trim: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("m must be at least 1".into()));
        }
        if !(0.0..0.5).contains(&trim) {
            return Err(Error::Domain(format!("grid trim must lie in [0, 0.5), got {trim}")));
        }
        let mut inside: Vec<f64> = sample.q().iter().copied().filter(|&q| regime.contains(q)).collect();
        if inside.is_empty() {
            return Err(Error::EmptyRegime { interval: *regime });
        }
        inside.sort_by(f64::total_cmp);
        let last = inside.len() - 1;
        let cut = (trim * inside.len() as f64).floor() as usize;
        let lo = inside[cut.min(last)];
        let hi = inside[last.saturating_sub(cut)];
        if !(lo < hi) {
            return Err(Error::NoViableCandidates { interval: *regime });
        }
        let step = (hi - lo) / (m + 1) as f64;
        let taus = (1..=m).map(|k| lo + k as f64 * step).collect();
        Ok(Self { regime: *regime, taus })
    }
}

/// Everything computed for one regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeTestResult {
    pub grid: CandidateGrid,
    /// Candidates that survived the occupancy and variance checks, in grid order.
    pub taus: Vec<f64>,
    pub dropped: Vec<f64>,
    pub gamma_tilde: Vec<f64>,
    pub xi_hat: Vec<f64>,
    pub sigma2_hat: Vec<f64>,
    pub delta_hat: Vec<f64>,
    /// Estimated correlation matrix of the candidates, unit diagonal.
    pub sigma_matrix: Vec<Vec<f64>>,
    pub delta_star: Vec<f64>,
    pub z: f64,
}

/// Outcome of the test of `s_null` thresholds against `s_null + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequentialTestReport {
    pub s_null: usize,
    pub partition: RegimePartition,
    pub per_regime: Vec<RegimeTestResult>,
    /// Regimes without a viable candidate; excluded from the max.
    pub skipped: Vec<RegimeInterval>,
    pub f_stat: f64,
    /// Number of regimes entering the max.
    pub k: usize,
    pub critical_value: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
}

/// `Phi^{-1}((1 - alpha)^(1/k))`, the level-`alpha` critical value of the max of `k` independent standard normals.
pub fn critical_value(k: usize, alpha: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    // upper tail 1 - (1 - alpha)^(1/k), formed without cancellation
    let tail = -((-alpha).ln_1p() / k as f64).exp_m1();
    Ok(-normal::quantile(tail)?)
}

/// `1 - Phi(f)^k`.
pub fn p_value(f_stat: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if f_stat.is_nan() {
        return Err(Error::Domain("statistic is NaN".into()));
    }
    let log_cdf = if f_stat > 0.0 {
        (-normal::sf(f_stat)).ln_1p()
    } else {
        normal::cdf(f_stat).ln()
    };
    Ok((-(k as f64 * log_cdf).exp_m1()).clamp(0.0, 1.0))
}

/// Precomputed pieces shared by every regime test on one sample.
pub(crate) struct TestContext<'a> {
    pub sample: &'a Sample,
    pub config: &'a KernelConfig,
    pub order: QOrder,
    /// Unrestricted density at each observation, floor-clamped.
    pub density: Vec<f64>,
    /// `a(X_i)`.
    pub weights: Vec<f64>,
    pub scale: FitScale,
}

impl<'a> TestContext<'a> {
    pub fn new(sample: &'a Sample, config: &'a KernelConfig, weight_box: &WeightBox) -> Result<Self> {
        config.validate()?;
        if config.dim != sample.dim() || weight_box.dim() != sample.dim() {
            return Err(Error::Domain(format!(
                "dimensions differ: sample {}, config {}, box {}",
                sample.dim(),
                config.dim,
                weight_box.dim()
            )));
        }
        let density = full_density(sample, config)
            .into_iter()
            .map(|d| d.max(config.density_floor))
            .collect();
        let weights = (0..sample.len())
            .map(|i| if weight_box.contains(sample.x_row(i)) { 1.0 } else { 0.0 })
            .collect();
        Ok(Self {
            sample,
            config,
            order: QOrder::new(sample),
            density,
            weights,
            scale: FitScale::new(sample.len(), config),
        })
    }

    fn min_obs(&self) -> usize {
        self.config.min_regime_obs.max(1)
    }

    /// Kernel moments of every observation over the blocks of `regime` cut at `taus`.
    fn blocks(&self, regime: &RegimeInterval, taus: &[f64]) -> RegimeBlocks {
        let range = self.order.range(regime);
        let mut cuts = Vec::with_capacity(taus.len() + 2);
        cuts.push(range.start);
        cuts.extend(taus.iter().map(|&t| self.order.position(t)));
        cuts.push(range.end);
        let eval: Vec<usize> = (0..self.sample.len()).collect();
        let moments = block_moments(self.sample, &self.order, &eval, &cuts, self.config.h);
        RegimeBlocks {
            moments,
            blocks: cuts.len() - 1,
            scale: self.scale,
        }
    }

    fn count(&self, lo: f64, hi: f64) -> usize {
        self.order.position(hi) - self.order.position(lo)
    }
}

struct RegimeBlocks {
    moments: Vec<Moments>,
    blocks: usize,
    scale: FitScale,
}

/// Density, mean and variance of one interval at one evaluation point.
#[derive(Clone, Copy)]
struct Fit {
    f: f64,
    m: f64,
    v: f64,
}

impl RegimeBlocks {
    /// Fit over blocks `a..b` at observation `i`.
    fn fit(&self, i: usize, a: usize, b: usize) -> Fit {
        let row = &self.moments[i * self.blocks..(i + 1) * self.blocks];
        let mut acc = Moments::default();
        for m in &row[a..b] {
            acc += *m;
        }
        Fit {
            f: self.scale.density(&acc),
            m: self.scale.mean(&acc),
            v: self.scale.variance(&acc),
        }
    }
}

/// Per-candidate statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateStats {
    pub gamma_tilde: f64,
    pub xi1: f64,
    pub xi2: f64,
    /// `C2 (xi1 + xi2)`
    pub xi: f64,
    pub s1: f64,
    pub s2: f64,
    /// `2 C3 (s1 + s2)`
    pub sigma2: f64,
    /// Standardized statistic; NaN when `sigma2` is at or below the variance floor.
    pub delta: f64,
}

/// The nine covariance terms and the normalizing sums for an ordered candidate pair.
/// `cov` is their sum scaled by `(v_l v_k)^(-1/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovTerms {
    pub c: [f64; 9],
    /// `s1 + s2` at the smaller candidate.
    pub v_l: f64,
    /// `s1 + s2` at the larger candidate.
    pub v_k: f64,
    pub cov: f64,
}

fn candidate_stats(ctx: &TestContext, blocks: &RegimeBlocks, regime: &RegimeInterval, split: usize, tau: f64, variance_floor: f64) -> CandidateStats {
    let sample = ctx.sample;
    let n = sample.len() as f64;
    let nb = blocks.blocks;
    let (mut gamma, mut xi1, mut xi2, mut s1, mut s2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..sample.len() {
        let a = ctx.weights[i];
        if a == 0.0 {
            continue;
        }
        let reg = blocks.fit(i, 0, nb);
        let left = blocks.fit(i, 0, split);
        let right = blocks.fit(i, split, nb);
        let q = sample.q()[i];
        if regime.contains(q) {
            let side = if q < tau { left.m } else { right.m };
            gamma += (reg.m - side).powi(2) * a;
        }
        let f_all = ctx.density[i];
        let f_reg = reg.f.max(ctx.config.density_floor);
        let wl = 1.0 - 2.0 * left.f / f_reg;
        let wr = 1.0 - 2.0 * right.f / f_reg;
        xi1 += reg.v * a / f_all;
        xi2 += (wl * left.v + wr * right.v) * a / f_all;
        s1 += reg.v * reg.v * a / f_all;
        s2 += (wl * left.v * left.v + wr * right.v * right.v) * a * a / f_all;
    }
    let (gamma, xi1, xi2, s1, s2) = (gamma / n, xi1 / n, xi2 / n, s1 / n, s2 / n);
    let p = ctx.config.dim as i32;
    let xi = roughness_constant(ctx.config.dim) * (xi1 + xi2);
    let sigma2 = 2.0 * convolution_constant(ctx.config.dim) * (s1 + s2);
    let h = ctx.config.h;
    let delta = if sigma2 > variance_floor {
        (n * h.powf(p as f64 / 2.0) * gamma - h.powf(-(p as f64) / 2.0) * xi) / sigma2.sqrt()
    } else {
        f64::NAN
    };
    CandidateStats {
        gamma_tilde: gamma,
        xi1,
        xi2,
        xi,
        s1,
        s2,
        sigma2,
        delta,
    }
}

/// Fits of the six intervals entering the covariance of candidates `l < k`
/// at one evaluation point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PairFits {
    /// Regime density, floor-clamped.
    pub f_r: f64,
    pub v_r: f64,
    /// `[lo, tau_l)`
    pub f_ll: f64,
    pub v_ll: f64,
    /// `[tau_l, hi)`
    pub f_rl: f64,
    pub v_rl: f64,
    /// `[lo, tau_k)`
    pub f_lk: f64,
    pub v_lk: f64,
    /// `[tau_k, hi)`
    pub f_rk: f64,
    pub v_rk: f64,
    /// `[tau_l, tau_k)`
    pub f_m: f64,
    pub v_m: f64,
}

/// Unscaled summands of the nine covariance terms at one point; the caller
/// multiplies by `a^2 / f` and the term factors `(1, -2, 1, -2, 4, -2, 1, -2, 1)`.
///
/// Shares are taken relative to the regime density throughout, and the
/// middle product of the eighth term pairs the `[tau_l, hi)` variance with
/// the middle interval. With these the sum reduces to the variance summand
/// when `tau_l = tau_k` and equals the squared covariance of the limiting
/// Gaussian forms otherwise.
pub(crate) fn cov_summands(p: &PairFits, floor: f64) -> [f64; 9] {
    let f_lk = p.f_lk.max(floor);
    let f_rl = p.f_rl.max(floor);
    let (ll, rl, lk, rk, m) = (p.f_ll / p.f_r, p.f_rl / p.f_r, p.f_lk / p.f_r, p.f_rk / p.f_r, p.f_m / p.f_r);
    [
        p.v_r * p.v_r,
        p.v_r * p.v_lk * lk + p.v_r * p.v_rk * rk,
        p.v_lk * p.v_lk * lk + p.v_rk * p.v_rk * rk,
        p.v_r * p.v_ll * ll + p.v_r * p.v_rl * rl,
        p.v_r * p.v_ll * ll + p.v_r * p.v_m * m + p.v_r * p.v_rk * rk,
        p.v_lk * p.v_ll * ll + p.v_lk * p.v_m * m + p.v_rk * p.v_rk * rk,
        p.v_ll * p.v_ll * ll + p.v_rl * p.v_rl * rl,
        p.v_ll * p.v_ll * ll + p.v_rl * p.v_m * m + p.v_rl * p.v_rk * rk,
        p.v_ll * p.v_ll * (p.f_ll / f_lk) + p.v_m * p.v_m * (p.f_m * p.f_m / (f_lk * f_rl)) + p.v_rk * p.v_rk * (p.f_rk / f_rl),
    ]
}

pub(crate) const COV_FACTORS: [f64; 9] = [1.0, -2.0, 1.0, -2.0, 4.0, -2.0, 1.0, -2.0, 1.0];

/// Covariance terms for the candidates at block boundaries `l <= k`.
fn cov_terms(ctx: &TestContext, blocks: &RegimeBlocks, l: usize, k: usize, v_l: f64, v_k: f64) -> CovTerms {
    let sample = ctx.sample;
    let n = sample.len() as f64;
    let nb = blocks.blocks;
    let floor = ctx.config.density_floor;
    let mut c = [0.0f64; 9];
    for i in 0..sample.len() {
        let a = ctx.weights[i];
        if a == 0.0 {
            continue;
        }
        let w = a * a / ctx.density[i];
        let r = blocks.fit(i, 0, nb);
        let ll = blocks.fit(i, 0, l);
        let rl = blocks.fit(i, l, nb);
        let lk = blocks.fit(i, 0, k);
        let rk = blocks.fit(i, k, nb);
        let mid = blocks.fit(i, l, k);
        let fits = PairFits {
            f_r: r.f.max(floor),
            v_r: r.v,
            f_ll: ll.f,
            v_ll: ll.v,
            f_rl: rl.f,
            v_rl: rl.v,
            f_lk: lk.f,
            v_lk: lk.v,
            f_rk: rk.f,
            v_rk: rk.v,
            f_m: mid.f,
            v_m: mid.v,
        };
        for (acc, t) in c.iter_mut().zip(cov_summands(&fits, floor)) {
            *acc += t * w;
        }
    }
    for (t, f) in c.iter_mut().zip(COV_FACTORS) {
        *t *= f / n;
    }
    let cov = c.iter().sum::<f64>() / (v_l.sqrt() * v_k.sqrt());
    CovTerms { c, v_l, v_k, cov }
}

fn check_split(ctx: &TestContext, regime: &RegimeInterval, tau: f64) -> Result<()> {
    if !(regime.lo < tau && tau < regime.hi) {
        return Err(Error::Domain(format!("candidate {tau} outside {regime}")));
    }
    if ctx.count(regime.lo, tau) < ctx.min_obs() || ctx.count(tau, regime.hi) < ctx.min_obs() {
        return Err(Error::ThinSplit { tau });
    }
    Ok(())
}

fn single_candidate(sample: &Sample, regime: &RegimeInterval, tau: f64, config: &KernelConfig, weight_box: &WeightBox) -> Result<CandidateStats> {
    let ctx = TestContext::new(sample, config, weight_box)?;
    check_split(&ctx, regime, tau)?;
    let blocks = ctx.blocks(regime, &[tau]);
    Ok(candidate_stats(&ctx, &blocks, regime, 1, tau, DEFAULT_VARIANCE_FLOOR))
}

/// All per-candidate statistics for a single split, without the variance guard.
pub fn candidate_statistics(sample: &Sample, regime: &RegimeInterval, tau: f64, config: &KernelConfig, weight_box: &WeightBox) -> Result<CandidateStats> {
    single_candidate(sample, regime, tau, config, weight_box)
}

/// Weighted squared gap between the regime fit and the two sub-regime fits at `tau`.
pub fn gamma_tilde(sample: &Sample, regime: &RegimeInterval, tau: f64, config: &KernelConfig, weight_box: &WeightBox) -> Result<f64> {
    Ok(single_candidate(sample, regime, tau, config, weight_box)?.gamma_tilde)
}

/// Bias estimate `C2 (xi1 + xi2)`.
pub fn xi_hat(sample: &Sample, regime: &RegimeInterval, tau: f64, config: &KernelConfig, weight_box: &WeightBox) -> Result<f64> {
    Ok(single_candidate(sample, regime, tau, config, weight_box)?.xi)
}

/// Variance estimate `2 C3 (s1 + s2)`; fails when it does not exceed the variance floor.
pub fn sigma2_hat(sample: &Sample, regime: &RegimeInterval, tau: f64, config: &KernelConfig, weight_box: &WeightBox) -> Result<f64> {
    let stats = single_candidate(sample, regime, tau, config, weight_box)?;
    if stats.sigma2 > DEFAULT_VARIANCE_FLOOR {
        Ok(stats.sigma2)
    } else {
        Err(Error::DegenerateVariance { tau })
    }
}

/// The nine covariance terms for `tau_l < tau_k` with their normalization.
pub fn cov_hat_terms(
    sample: &Sample,
    regime: &RegimeInterval,
    tau_l: f64,
    tau_k: f64,
    config: &KernelConfig,
    weight_box: &WeightBox,
) -> Result<CovTerms> {
    if !(tau_l < tau_k) {
        return Err(Error::Domain(format!("candidates must be ordered, got {tau_l} and {tau_k}")));
    }
    let ctx = TestContext::new(sample, config, weight_box)?;
    check_split(&ctx, regime, tau_l)?;
    check_split(&ctx, regime, tau_k)?;
    if ctx.count(tau_l, tau_k) < ctx.min_obs() {
        return Err(Error::ThinSplit { tau: tau_k });
    }
    let blocks = ctx.blocks(regime, &[tau_l, tau_k]);
    let sl = candidate_stats(&ctx, &blocks, regime, 1, tau_l, DEFAULT_VARIANCE_FLOOR);
    let sk = candidate_stats(&ctx, &blocks, regime, 2, tau_k, DEFAULT_VARIANCE_FLOOR);
    let (v_l, v_k) = (sl.s1 + sl.s2, sk.s1 + sk.s2);
    if !(v_l > 0.0) {
        return Err(Error::DegenerateVariance { tau: tau_l });
    }
    if !(v_k > 0.0) {
        return Err(Error::DegenerateVariance { tau: tau_k });
    }
    Ok(cov_terms(&ctx, &blocks, 1, 2, v_l, v_k))
}

/// Estimated covariance of the standardized statistics at `tau_l < tau_k`.
pub fn cov_hat(sample: &Sample, regime: &RegimeInterval, tau_l: f64, tau_k: f64, config: &KernelConfig, weight_box: &WeightBox) -> Result<f64> {
    Ok(cov_hat_terms(sample, regime, tau_l, tau_k, config, weight_box)?.cov)
}

pub(crate) fn regime_test_with(ctx: &TestContext, regime: &RegimeInterval, settings: &InferenceConfig) -> Result<RegimeTestResult> {
    let grid = CandidateGrid::for_regime(ctx.sample, regime, settings.m, settings.grid_trim)?;
    let min = ctx.min_obs();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut last = regime.lo;
    for &tau in &grid.taus {
        let ok = ctx.count(regime.lo, tau) >= min && ctx.count(tau, regime.hi) >= min && (kept.is_empty() || ctx.count(last, tau) >= min);
        if ok {
            kept.push(tau);
            last = tau;
        } else {
            dropped.push(tau);
        }
    }
    if kept.is_empty() {
        return Err(Error::NoViableCandidates { interval: *regime });
    }
    let blocks = ctx.blocks(regime, &kept);
    let stats: Vec<CandidateStats> = kept
        .par_iter()
        .enumerate()
        .map(|(k, &tau)| candidate_stats(ctx, &blocks, regime, k + 1, tau, settings.variance_floor))
        .collect();

    // block boundary index of each surviving candidate
    let mut live: Vec<(usize, f64, CandidateStats)> = Vec::new();
    for (k, (&tau, st)) in kept.iter().zip(&stats).enumerate() {
        if st.delta.is_finite() {
            live.push((k + 1, tau, *st));
        } else {
            dropped.push(tau);
        }
    }
    dropped.sort_by(f64::total_cmp);
    if live.is_empty() {
        return Err(Error::NoViableCandidates { interval: *regime });
    }

    let m = live.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| ((a + 1)..m).map(move |b| (a, b))).collect();
    let covs: Vec<f64> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (l, _, sl) = live[a];
            let (k, _, sk) = live[b];
            cov_terms(ctx, &blocks, l, k, sl.s1 + sl.s2, sk.s1 + sk.s2).cov
        })
        .collect();
    let mut sigma = DMatrix::<f64>::identity(m, m);
    for (&(a, b), &c) in pairs.iter().zip(&covs) {
        sigma[(a, b)] = c;
        sigma[(b, a)] = c;
    }
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateVariance { tau: live[0].1 });
    }
    let root = matrix_inv_sqrt(&sigma, settings.eig_floor)?;
    let delta = DVector::from_iterator(m, live.iter().map(|(_, _, s)| s.delta));
    let delta_star = &root * &delta;
    let z = delta_star.iter().sum::<f64>() / (m as f64).sqrt();

    Ok(RegimeTestResult {
        grid,
        taus: live.iter().map(|(_, t, _)| *t).collect(),
        dropped,
        gamma_tilde: live.iter().map(|(_, _, s)| s.gamma_tilde).collect(),
        xi_hat: live.iter().map(|(_, _, s)| s.xi).collect(),
        sigma2_hat: live.iter().map(|(_, _, s)| s.sigma2).collect(),
        delta_hat: delta.iter().copied().collect(),
        sigma_matrix: (0..m).map(|r| (0..m).map(|c| sigma[(r, c)]).collect()).collect(),
        delta_star: delta_star.iter().copied().collect(),
        z,
    })
}

/// Test for an extra threshold inside one regime.
pub fn regime_test(sample: &Sample, regime: &RegimeInterval, settings: &InferenceConfig, config: &KernelConfig, weight_box: &WeightBox) -> Result<RegimeTestResult> {
    settings.validate()?;
    let ctx = TestContext::new(sample, config, weight_box)?;
    let count = ctx.order.range(regime).len();
    if count < 2 * ctx.min_obs() {
        return Err(Error::ThinRegime {
            interval: *regime,
            count,
            required: 2 * ctx.min_obs(),
        });
    }
    regime_test_with(&ctx, regime, settings)
}

pub(crate) fn sequential_test_with(ctx: &TestContext, partition: &RegimePartition, settings: &InferenceConfig) -> Result<SequentialTestReport> {
    check_partition(&ctx.order, partition, ctx.config)?;
    let mut per_regime = Vec::new();
    let mut skipped = Vec::new();
    for regime in partition.regimes() {
        match regime_test_with(ctx, &regime, settings) {
            Ok(r) => per_regime.push(r),
            Err(Error::NoViableCandidates { .. }) => skipped.push(regime),
            Err(e) => return Err(e),
        }
    }
    if per_regime.is_empty() {
        return Err(Error::AllRegimesSkipped);
    }
    let k = per_regime.len();
    let f_stat = per_regime.iter().map(|r| r.z).fold(f64::NEG_INFINITY, f64::max);
    let critical_value = critical_value(k, settings.alpha)?;
    Ok(SequentialTestReport {
        s_null: partition.len(),
        partition: partition.clone(),
        per_regime,
        skipped,
        f_stat,
        k,
        critical_value,
        p_value: p_value(f_stat, k)?,
        alpha: settings.alpha,
        reject: f_stat > critical_value,
    })
}

/// Test of `partition.len()` thresholds against one more.
pub fn sequential_test(
    sample: &Sample,
    partition: &RegimePartition,
    settings: &InferenceConfig,
    config: &KernelConfig,
    weight_box: &WeightBox,
) -> Result<SequentialTestReport> {
    settings.validate()?;
    let ctx = TestContext::new(sample, config, weight_box)?;
    sequential_test_with(&ctx, partition, settings)
}
