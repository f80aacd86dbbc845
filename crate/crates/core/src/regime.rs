//! Samples, regimes and the regime-restricted kernel estimators.
//!
//! Regimes are half-open, closed on the left: an observation belongs to
//! `[lo, hi)` when `lo <= q < hi`. Unbounded ends are stored as infinities.

use std::fmt;
use std::ops::{Add, AddAssign, Range};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernel::{pair_weight, KernelConfig};

/// Response `y`, covariates `x` (row-major `n x p`) and threshold variable `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    y: Vec<f64>,
    x: Vec<f64>,
    q: Vec<f64>,
    dim: usize,
}

impl Sample {
    /// Builds a sample from row-major covariates.
    pub fn new(y: Vec<f64>, x: Vec<f64>, q: Vec<f64>, dim: usize) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::Domain("sample is empty".into()));
        }
        if dim == 0 {
            return Err(Error::Domain("covariate dimension must be at least 1".into()));
        }
        if q.len() != n || x.len() != n * dim {
            return Err(Error::Domain(format!(
                "row counts differ: y has {n}, q has {}, x has {} values for dimension {dim}",
                q.len(),
                x.len()
            )));
        }
        if y.iter().chain(&x).chain(&q).any(|v| !v.is_finite()) {
            return Err(Error::Domain("sample contains non-finite values".into()));
        }
        Ok(Self { y, x, q, dim })
    }

    /// Sample with a single covariate.
    pub fn univariate(y: Vec<f64>, x: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        Self::new(y, x, q, 1)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Covariates, row-major.
    pub fn x_flat(&self) -> &[f64] {
        &self.x
    }

    pub fn x_row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    /// Sample standard deviation (n - 1 denominator) of covariate `col`.
    pub fn x_std(&self, col: usize) -> f64 {
        let vals: Vec<f64> = (0..self.len()).map(|i| self.x_row(i)[col]).collect();
        std_dev(&vals)
    }

    /// Number of observations with `q` inside `interval`.
    pub fn count_in(&self, interval: &RegimeInterval) -> usize {
        self.q.iter().filter(|&&q| interval.contains(q)).count()
    }
}

pub(crate) fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Half-open interval `[lo, hi)` of the threshold variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeInterval {
    pub lo: f64,
    pub hi: f64,
}

impl RegimeInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::Domain(format!("invalid regime [{lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    /// The whole real line.
    pub fn full() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    #[inline]
    pub fn contains(&self, q: f64) -> bool {
        self.lo <= q && q < self.hi
    }

    /// Splits at `tau` into `[lo, tau)` and `[tau, hi)`.
    pub fn split(&self, tau: f64) -> Result<(Self, Self)> {
        if !(self.lo < tau && tau < self.hi) {
            return Err(Error::Domain(format!("split point {tau} outside {self}")));
        }
        Ok((Self { lo: self.lo, hi: tau }, Self { lo: tau, hi: self.hi }))
    }
}

impl fmt::Display for RegimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

// Unbounded ends serialize as null so the JSON stays standard.
impl Serialize for RegimeInterval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let bound = |v: f64| if v.is_finite() { Some(v) } else { None };
        (bound(self.lo), bound(self.hi)).serialize(s)
    }
}

impl<'de> Deserialize<'de> for RegimeInterval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (lo, hi) = <(Option<f64>, Option<f64>)>::deserialize(d)?;
        RegimeInterval::new(lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY))
            .map_err(serde::de::Error::custom)
    }
}

/// `1{q in interval}`.
pub fn regime_indicator(q_value: f64, interval: &RegimeInterval) -> Result<f64> {
    if q_value.is_nan() {
        return Err(Error::Domain("threshold variable is NaN".into()));
    }
    Ok(if interval.contains(q_value) { 1.0 } else { 0.0 })
}

/// Strictly increasing thresholds; `s` thresholds define `s + 1` regimes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RegimePartition {
    thresholds: Vec<f64>,
}

impl RegimePartition {
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("thresholds must be finite".into()));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("thresholds must be strictly increasing".into()));
        }
        Ok(Self { thresholds })
    }

    /// No thresholds: a single regime covering the real line.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn regimes(&self) -> Vec<RegimeInterval> {
        let mut bounds = Vec::with_capacity(self.thresholds.len() + 2);
        bounds.push(f64::NEG_INFINITY);
        bounds.extend_from_slice(&self.thresholds);
        bounds.push(f64::INFINITY);
        bounds
            .windows(2)
            .map(|w| RegimeInterval { lo: w[0], hi: w[1] })
            .collect()
    }

    /// Copy with `gamma` inserted in order.
    pub fn with_threshold(&self, gamma: f64) -> Result<Self> {
        let mut t = self.thresholds.clone();
        let pos = t.partition_point(|&v| v < gamma);
        if t.get(pos) == Some(&gamma) {
            return Err(Error::Domain(format!("threshold {gamma} already present")));
        }
        t.insert(pos, gamma);
        Self::new(t)
    }
}

/// Kernel-weighted moments `sum K`, `sum K y`, `sum K y^2` over a set of observations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Moments {
    pub w: f64,
    pub wy: f64,
    pub wy2: f64,
}

impl Add for Moments {
    type Output = Moments;
    fn add(self, o: Moments) -> Moments {
        Moments {
            w: self.w + o.w,
            wy: self.wy + o.wy,
            wy2: self.wy2 + o.wy2,
        }
    }
}

impl AddAssign for Moments {
    fn add_assign(&mut self, o: Moments) {
        self.w += o.w;
        self.wy += o.wy;
        self.wy2 += o.wy2;
    }
}

/// Turns kernel moments into density, mean and variance estimates.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FitScale {
    /// `n h^p`
    pub nhp: f64,
    /// Clamp for `sum K`, `density_floor * n * h^p`.
    pub w_floor: f64,
}

impl FitScale {
    pub fn new(n: usize, config: &KernelConfig) -> Self {
        let nhp = n as f64 * config.h_pow_p();
        Self {
            nhp,
            w_floor: config.density_floor * nhp,
        }
    }

    #[inline]
    pub fn density(&self, m: &Moments) -> f64 {
        m.w / self.nhp
    }

    #[inline]
    pub fn mean(&self, m: &Moments) -> f64 {
        m.wy / m.w.max(self.w_floor)
    }

    #[inline]
    pub fn variance(&self, m: &Moments) -> f64 {
        let den = m.w.max(self.w_floor);
        let mean = m.wy / den;
        (m.wy2 / den - mean * mean).max(0.0)
    }
}

/// Observation indices sorted by `q`, so every regime is a contiguous range.
#[derive(Debug, Clone)]
pub(crate) struct QOrder {
    pub order: Vec<usize>,
    pub q: Vec<f64>,
}

impl QOrder {
    pub fn new(sample: &Sample) -> Self {
        let mut order: Vec<usize> = (0..sample.len()).collect();
        order.sort_by(|&a, &b| sample.q[a].total_cmp(&sample.q[b]).then(a.cmp(&b)));
        let q = order.iter().map(|&i| sample.q[i]).collect();
        Self { order, q }
    }

    /// Positions (in sorted order) of observations inside `interval`.
    pub fn range(&self, interval: &RegimeInterval) -> Range<usize> {
        self.q.partition_point(|&v| v < interval.lo)..self.q.partition_point(|&v| v < interval.hi)
    }

    /// First sorted position whose `q` is at least `value`.
    pub fn position(&self, value: f64) -> usize {
        self.q.partition_point(|&v| v < value)
    }

    pub fn indices(&self, range: Range<usize>) -> &[usize] {
        &self.order[range]
    }
}

/// Kernel moments at each evaluation point over consecutive blocks of the
/// q-sorted observations. `cuts` are sorted positions; block `b` covers
/// `cuts[b]..cuts[b + 1]`. The result is row-major, one row per evaluation point.
pub(crate) fn block_moments(
    sample: &Sample,
    order: &QOrder,
    eval: &[usize],
    cuts: &[usize],
    h: f64,
) -> Vec<Moments> {
    let blocks = cuts.len().saturating_sub(1);
    let mut out = vec![Moments::default(); eval.len() * blocks];
    if blocks == 0 {
        return out;
    }
    out.par_chunks_mut(blocks)
        .zip(eval.par_iter())
        .for_each(|(row, &e)| {
            let xe = sample.x_row(e);
            for (b, slot) in row.iter_mut().enumerate() {
                let mut acc = Moments::default();
                for &j in &order.order[cuts[b]..cuts[b + 1]] {
                    let w = pair_weight(sample.x_row(j), xe, h);
                    let y = sample.y[j];
                    acc.w += w;
                    acc.wy += w * y;
                    acc.wy2 += w * y * y;
                }
                *slot = acc;
            }
        });
    out
}

/// Unrestricted density estimate at every observation, unclamped.
pub(crate) fn full_density(sample: &Sample, config: &KernelConfig) -> Vec<f64> {
    let n = sample.len();
    let nhp = n as f64 * config.h_pow_p();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = sample.x_row(i);
            (0..n).map(|j| pair_weight(sample.x_row(j), xi, config.h)).sum::<f64>() / nhp
        })
        .collect()
}

/// Sum of squared residuals of the regime's own fit over its observations.
pub(crate) fn regime_sse(sample: &Sample, order: &QOrder, range: Range<usize>, config: &KernelConfig) -> f64 {
    let members = order.indices(range.clone()).to_vec();
    let moments = block_moments(sample, order, &members, &[range.start, range.end], config.h);
    let scale = FitScale::new(sample.len(), config);
    members
        .iter()
        .zip(&moments)
        .map(|(&i, m)| (sample.y[i] - scale.mean(m)).powi(2))
        .sum()
}

fn check_point(sample: &Sample, x: &[f64], config: &KernelConfig) -> Result<()> {
    config.validate()?;
    if x.len() != sample.dim || config.dim != sample.dim {
        return Err(Error::Domain(format!(
            "evaluation point has dimension {}, sample {}, config {}",
            x.len(),
            sample.dim,
            config.dim
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite evaluation point".into()));
    }
    Ok(())
}

fn moments_at(sample: &Sample, interval: &RegimeInterval, x: &[f64], h: f64) -> (Moments, usize) {
    let mut acc = Moments::default();
    let mut count = 0;
    for i in 0..sample.len() {
        if interval.contains(sample.q[i]) {
            let w = pair_weight(sample.x_row(i), x, h);
            let y = sample.y[i];
            acc.w += w;
            acc.wy += w * y;
            acc.wy2 += w * y * y;
            count += 1;
        }
    }
    (acc, count)
}

/// Regime-restricted kernel density `(1 / (n h^p)) sum_i K((X_i - x) / h) 1{Q_i in interval}`.
pub fn density_hat(sample: &Sample, interval: &RegimeInterval, x: &[f64], config: &KernelConfig) -> Result<f64> {
    check_point(sample, x, config)?;
    let (m, _) = moments_at(sample, interval, x, config.h);
    Ok(FitScale::new(sample.len(), config).density(&m))
}

/// Nadaraya-Watson estimate of `E[Y | X = x]` within the regime.
pub fn nw_hat(sample: &Sample, interval: &RegimeInterval, x: &[f64], config: &KernelConfig) -> Result<f64> {
    check_point(sample, x, config)?;
    let (m, count) = moments_at(sample, interval, x, config.h);
    if count == 0 {
        return Err(Error::EmptyRegime { interval: *interval });
    }
    Ok(FitScale::new(sample.len(), config).mean(&m))
}

/// Nadaraya-Watson estimate of `Var(Y | X = x)` within the regime, clamped at zero.
pub fn cond_var_hat(sample: &Sample, interval: &RegimeInterval, x: &[f64], config: &KernelConfig) -> Result<f64> {
    check_point(sample, x, config)?;
    let (m, count) = moments_at(sample, interval, x, config.h);
    if count == 0 {
        return Err(Error::EmptyRegime { interval: *interval });
    }
    Ok(FitScale::new(sample.len(), config).variance(&m))
}

/// Checks every regime of `partition` against `config.min_regime_obs`.
pub(crate) fn check_partition(order: &QOrder, partition: &RegimePartition, config: &KernelConfig) -> Result<()> {
    for interval in partition.regimes() {
        let count = order.range(&interval).len();
        if count < config.min_regime_obs.max(1) {
            return Err(Error::ThinRegime {
                interval,
                count,
                required: config.min_regime_obs.max(1),
            });
        }
    }
    Ok(())
}

/// Mean squared residual of the threshold regression with the given partition.
/// Each observation is fitted by the Nadaraya-Watson regression of its own regime.
pub fn ssr(sample: &Sample, partition: &RegimePartition, config: &KernelConfig) -> Result<f64> {
    config.validate()?;
    if config.dim != sample.dim {
        return Err(Error::Domain("config dimension does not match the sample".into()));
    }
    let order = QOrder::new(sample);
    check_partition(&order, partition, config)?;
    let total: f64 = partition
        .regimes()
        .iter()
        .map(|iv| regime_sse(sample, &order, order.range(iv), config))
        .sum();
    Ok(total / sample.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn config(h: f64) -> KernelConfig {
        KernelConfig::with_bandwidth(h, 1).unwrap()
    }

    fn random_sample(n: usize, seed: u64) -> Sample {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = x.iter().zip(&q).map(|(x, q)| x * x + if *q > 0.2 { 1.0 } else { 0.0 } + rng.gen_range(-0.5..0.5)).collect();
        Sample::univariate(y, x, q).unwrap()
    }

    fn phi(u: f64) -> f64 {
        (-(u * u) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    #[test]
    fn indicator_half_open() {
        let iv = RegimeInterval::new(0.15, 0.5).unwrap();
        assert_eq!(regime_indicator(0.15, &iv).unwrap(), 1.0);
        assert_eq!(regime_indicator(0.5, &iv).unwrap(), 0.0);
        let left = RegimeInterval::new(f64::NEG_INFINITY, -0.7).unwrap();
        assert_eq!(regime_indicator(-3.0, &left).unwrap(), 1.0);
        assert!(regime_indicator(f64::NAN, &left).is_err());
    }

    #[test]
    fn interval_validation() {
        assert!(RegimeInterval::new(1.0, 1.0).is_err());
        assert!(RegimeInterval::new(f64::NAN, 1.0).is_err());
        assert!(RegimePartition::new(vec![0.5, 0.1]).is_err());
        assert!(RegimePartition::new(vec![0.1, 0.1]).is_err());
        let p = RegimePartition::new(vec![-0.7, 0.15, 0.5]).unwrap();
        assert_eq!(p.regimes().len(), 4);
        assert_eq!(p.with_threshold(0.0).unwrap().thresholds(), &[-0.7, 0.0, 0.15, 0.5]);
    }

    #[test]
    fn interval_json_uses_null_for_infinite_ends() {
        let iv = RegimeInterval::new(f64::NEG_INFINITY, 0.5).unwrap();
        let s = serde_json::to_string(&iv).unwrap();
        assert_eq!(s, "[null,0.5]");
        let back: RegimeInterval = serde_json::from_str(&s).unwrap();
        assert_eq!(back, iv);
    }

    #[test]
    fn single_point_density() {
        let s = Sample::univariate(vec![2.0], vec![0.3], vec![0.0]).unwrap();
        let h = 0.4;
        let d = density_hat(&s, &RegimeInterval::full(), &[0.3], &config(h)).unwrap();
        assert!((d - 0.398_942_280_401_432_7 / h).abs() < 1e-15);
        let empty = RegimeInterval::new(5.0, 6.0).unwrap();
        assert_eq!(density_hat(&s, &empty, &[0.3], &config(h)).unwrap(), 0.0);
    }

    #[test]
    fn nw_constant_and_single() {
        let s = Sample::univariate(vec![5.0; 20], (0..20).map(|i| i as f64 / 10.0).collect(), vec![0.0; 20]).unwrap();
        assert!((nw_hat(&s, &RegimeInterval::full(), &[0.77], &config(0.3)).unwrap() - 5.0).abs() < 1e-14);
        let one = Sample::univariate(vec![-1.25], vec![0.0], vec![1.0]).unwrap();
        assert_eq!(nw_hat(&one, &RegimeInterval::full(), &[0.9], &config(0.5)).unwrap(), -1.25);
        let err = nw_hat(&one, &RegimeInterval::new(2.0, 3.0).unwrap(), &[0.0], &config(0.5)).unwrap_err();
        assert!(matches!(err, Error::EmptyRegime { .. }));
    }

    #[test]
    fn cond_var_examples() {
        let s = Sample::univariate(vec![3.0; 5], vec![0.0, 0.1, 0.2, 0.3, 0.4], vec![0.0; 5]).unwrap();
        assert!(cond_var_hat(&s, &RegimeInterval::full(), &[0.2], &config(0.3)).unwrap().abs() < 1e-14);
        let two = Sample::univariate(vec![0.0, 2.0], vec![-1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let v = cond_var_hat(&two, &RegimeInterval::full(), &[0.0], &config(0.7)).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    // Direct double-loop reference: independent of the moment code above.
    fn oracle(s: &Sample, lo: f64, hi: f64, x: f64, h: f64) -> (f64, f64, f64) {
        let n = s.len();
        let (mut sw, mut swy, mut swy2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let q = s.q()[i];
            if q >= lo && q < hi {
                let k = phi((s.x_flat()[i] - x) / h);
                sw += k;
                swy += k * s.y()[i];
                swy2 += k * s.y()[i] * s.y()[i];
            }
        }
        let mean = swy / sw;
        (sw / (n as f64 * h), mean, swy2 / sw - mean * mean)
    }

    #[test]
    fn estimators_match_direct_sums() {
        let s = random_sample(40, 3);
        let h = 0.45;
        let cfg = config(h);
        let iv = RegimeInterval::new(-0.3, 0.6).unwrap();
        for &x in &[-1.5, -0.2, 0.0, 0.9, 1.7] {
            let (d, m, v) = oracle(&s, iv.lo, iv.hi, x, h);
            assert!((density_hat(&s, &iv, &[x], &cfg).unwrap() - d).abs() < 1e-12);
            assert!((nw_hat(&s, &iv, &[x], &cfg).unwrap() - m).abs() < 1e-12);
            assert!((cond_var_hat(&s, &iv, &[x], &cfg).unwrap() - v).abs() < 1e-12);
        }
    }

    #[test]
    fn density_additive_over_partition() {
        let s = random_sample(50, 9);
        let cfg = config(0.3);
        let p = RegimePartition::new(vec![-0.5, 0.0, 0.4]).unwrap();
        for &x in &[-1.0, 0.0, 0.5] {
            let whole = density_hat(&s, &RegimeInterval::full(), &[x], &cfg).unwrap();
            let parts: f64 = p.regimes().iter().map(|iv| density_hat(&s, iv, &[x], &cfg).unwrap()).sum();
            assert!((whole - parts).abs() < 1e-12);
        }
    }

    #[test]
    fn ssr_examples() {
        let n = 60;
        let x: Vec<f64> = (0..n).map(|i| i as f64 / 30.0).collect();
        let q: Vec<f64> = (0..n).map(|i| ((i * 7) % n) as f64).collect();
        let flat = Sample::univariate(vec![1.5; n], x.clone(), q.clone()).unwrap();
        let p = RegimePartition::new(vec![20.0]).unwrap();
        assert!(ssr(&flat, &p, &config(0.2)).unwrap().abs() < 1e-20);

        let s = random_sample(80, 21);
        let cfg = config(0.35);
        let collapsed = ssr(&s, &RegimePartition::empty(), &cfg).unwrap();
        let plain: f64 = (0..s.len())
            .map(|i| (s.y()[i] - oracle(&s, f64::NEG_INFINITY, f64::INFINITY, s.x_flat()[i], 0.35).1).powi(2))
            .sum::<f64>()
            / s.len() as f64;
        assert!((collapsed - plain).abs() < 1e-12);
    }

    #[test]
    fn ssr_rejects_thin_regime() {
        let s = random_sample(40, 1);
        let p = RegimePartition::new(vec![0.95]).unwrap();
        let err = ssr(&s, &p, &config(0.3)).unwrap_err();
        assert!(matches!(err, Error::ThinRegime { .. }));
    }

    #[test]
    fn block_sums_match_direct() {
        let s = random_sample(45, 17);
        let order = QOrder::new(&s);
        let eval: Vec<usize> = (0..s.len()).collect();
        let cuts = [0, 10, 11, 30, 45];
        let blocks = block_moments(&s, &order, &eval, &cuts, 0.4);
        for (e, row) in blocks.chunks(4).enumerate() {
            for b in 0..4 {
                let direct: f64 = order.order[cuts[b]..cuts[b + 1]]
                    .iter()
                    .map(|&j| phi((s.x_flat()[j] - s.x_flat()[e]) / 0.4))
                    .sum();
                assert!((row[b].w - direct).abs() < 1e-13);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn indicators_partition_unity(q in -10.0f64..10.0, mut t in proptest::collection::vec(-5.0f64..5.0, 0..6)) {
                t.sort_by(f64::total_cmp);
                t.dedup();
                let p = RegimePartition::new(t).unwrap();
                let total: f64 = p.regimes().iter().map(|iv| regime_indicator(q, iv).unwrap()).sum();
                prop_assert_eq!(total, 1.0);
            }

            #[test]
            fn nw_shift_equivariant(shift in -50.0f64..50.0, x in -1.5f64..1.5, seed in 0u64..1000) {
                let s = random_sample(30, seed);
                let shifted = Sample::univariate(s.y().iter().map(|v| v + shift).collect(), s.x_flat().to_vec(), s.q().to_vec()).unwrap();
                let cfg = config(0.5);
                let iv = RegimeInterval::full();
                let a = nw_hat(&s, &iv, &[x], &cfg).unwrap();
                let b = nw_hat(&shifted, &iv, &[x], &cfg).unwrap();
                prop_assert!((b - a - shift).abs() < 1e-9);
            }
        }
    }
}
