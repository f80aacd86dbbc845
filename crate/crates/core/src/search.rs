//! Threshold estimation by grid minimization of the sum of squared
//! residuals, and the sequential detection loop that alternates the test
//! with one-at-a-time estimation.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{sequential_test_with, InferenceConfig, SequentialTestReport, TestContext, DEFAULT_ALPHA, DEFAULT_M};
use crate::kernel::{KernelConfig, WeightBox};
use crate::regime::{block_moments, check_partition, regime_sse, FitScale, Moments, QOrder, RegimeInterval, RegimePartition, Sample};

/// Search grid, trimming and stopping rule of the detection loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Candidate threshold values per searched interval.
    pub grid_points: usize,
    /// Share of each interval's observations excluded at both ends.
    pub trim_fraction: f64,
    pub max_thresholds: usize,
    pub alpha: f64,
    /// Candidate grid size of the test.
    pub m: usize,
    /// Trimming of the test's candidate grid.
    pub test_trim: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        let test = InferenceConfig::default();
        Self {
            grid_points: 100,
            trim_fraction: 0.05,
            max_thresholds: 5,
            alpha: DEFAULT_ALPHA,
            m: DEFAULT_M,
            test_trim: test.grid_trim,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 3 {
            return Err(Error::Domain(format!("grid_points must be at least 3, got {}", self.grid_points)));
        }
        if !(0.0..0.5).contains(&self.trim_fraction) {
            return Err(Error::Domain(format!("trim fraction must lie in [0, 0.5), got {}", self.trim_fraction)));
        }
        if self.max_thresholds == 0 {
            return Err(Error::Domain("max_thresholds must be at least 1".into()));
        }
        self.inference().validate()
    }

    /// Settings handed to the test in every round.
    pub fn inference(&self) -> InferenceConfig {
        InferenceConfig {
            m: self.m,
            alpha: self.alpha,
            grid_trim: self.test_trim,
            ..InferenceConfig::default()
        }
    }
}

/// Thresholds found by the sequential procedure with its audit trail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub s_hat: usize,
    /// Accepted thresholds, sorted.
    pub gammas: Vec<f64>,
    /// Thresholds in the order they were accepted.
    pub discovery_order: Vec<f64>,
    /// Mean squared residual of the full partition after each accepted threshold.
    pub round_ssr: Vec<f64>,
    /// One test per round; the last one did not reject unless the cap was hit.
    pub reports: Vec<SequentialTestReport>,
    /// Regimes left out of a test or a search because they were too thin.
    pub skipped_intervals: Vec<RegimeInterval>,
    /// The last test still rejected when `max_thresholds` was reached.
    pub cap_reached: bool,
}

impl DetectionResult {
    fn empty() -> Self {
        Self {
            s_hat: 0,
            gammas: Vec::new(),
            discovery_order: Vec::new(),
            round_ssr: Vec::new(),
            reports: Vec::new(),
            skipped_intervals: Vec::new(),
            cap_reached: false,
        }
    }

    fn skip(&mut self, interval: RegimeInterval) {
        if !self.skipped_intervals.contains(&interval) {
            self.skipped_intervals.push(interval);
        }
    }
}

/// A failed detection run together with everything completed before the failure.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{error} (after {} accepted thresholds)", partial.s_hat)]
pub struct DetectFailure {
    #[source]
    pub error: Error,
    pub partial: DetectionResult,
}

/// Sorted split positions for the search inside `range`; each position `p`
/// puts sorted observations `start..p` on the left.
fn search_positions(order: &QOrder, range: &Range<usize>, search: &SearchConfig, min_obs: usize) -> Result<Vec<usize>> {
    let n_int = range.len();
    let cut = (search.trim_fraction * n_int as f64).floor() as usize;
    let edge = cut.max(min_obs);
    if n_int < 2 * cut + 2 * min_obs || n_int < 2 * edge {
        return Err(Error::Search(format!(
            "{n_int} observations leave fewer than {} after trimming",
            2 * min_obs
        )));
    }
    let (a, b) = (range.start + edge, range.end - edge);
    let span = (b - a) as f64;
    let g = search.grid_points;
    let mut out: Vec<usize> = Vec::with_capacity(g);
    for k in 0..g {
        let raw = a + (k as f64 * span / (g - 1) as f64).round() as usize;
        // ties in q: the split can only fall at the first copy of a value
        let p = order.position(order.q[raw]);
        if p >= a && p <= b && out.last() != Some(&p) {
            out.push(p);
        }
    }
    if out.is_empty() {
        return Err(Error::Search(format!("no admissible split in positions {a}..={b}")));
    }
    Ok(out)
}

/// Within-interval squared residuals for every split position, plus the
/// threshold value each position stands for.
fn interval_profile(sample: &Sample, order: &QOrder, range: Range<usize>, positions: &[usize], config: &KernelConfig) -> Vec<(f64, f64)> {
    let members = order.indices(range.clone()).to_vec();
    let mut cuts = Vec::with_capacity(positions.len() + 2);
    cuts.push(range.start);
    cuts.extend_from_slice(positions);
    cuts.push(range.end);
    let nb = cuts.len() - 1;
    let moments = block_moments(sample, order, &members, &cuts, config.h);
    let scale = FitScale::new(sample.len(), config);

    // prefix[r][g] sums blocks 0..=g, suffix[r][g] sums blocks g+1..
    let rows: Vec<(Vec<Moments>, Vec<Moments>)> = moments
        .par_chunks(nb)
        .map(|row| {
            let mut prefix = Vec::with_capacity(nb - 1);
            let mut acc = Moments::default();
            for m in &row[..nb - 1] {
                acc += *m;
                prefix.push(acc);
            }
            let mut suffix = vec![Moments::default(); nb - 1];
            let mut acc = Moments::default();
            for g in (0..nb - 1).rev() {
                acc += row[g + 1];
                suffix[g] = acc;
            }
            (prefix, suffix)
        })
        .collect();

    (0..positions.len())
        .into_par_iter()
        .map(|g| {
            let split = positions[g];
            let mut sse = 0.0;
            for (r, &i) in members.iter().enumerate() {
                let fit = if range.start + r < split { &rows[r].0[g] } else { &rows[r].1[g] };
                sse += (sample.y()[i] - scale.mean(fit)).powi(2);
            }
            (order.q[split], sse)
        })
        .collect()
}

fn regime_sses(sample: &Sample, order: &QOrder, partition: &RegimePartition, config: &KernelConfig) -> Vec<f64> {
    partition
        .regimes()
        .iter()
        .map(|iv| regime_sse(sample, order, order.range(iv), config))
        .collect()
}

/// Best split of regime `j` of `fixed`; SSR is the full-partition mean.
fn estimate_in(sample: &Sample, order: &QOrder, fixed: &RegimePartition, sses: &[f64], j: usize, config: &KernelConfig, search: &SearchConfig) -> Result<(f64, f64)> {
    let interval = fixed.regimes()[j];
    let range = order.range(&interval);
    let positions = search_positions(order, &range, search, config.min_regime_obs.max(1))?;
    let others: f64 = sses.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, s)| s).sum();
    let profile = interval_profile(sample, order, range, &positions, config);
    let mut best = profile[0];
    for &(gamma, sse) in &profile[1..] {
        if sse < best.1 {
            best = (gamma, sse);
        }
    }
    Ok((best.0, (others + best.1) / sample.len() as f64))
}

fn check_inputs(sample: &Sample, config: &KernelConfig, search: &SearchConfig) -> Result<()> {
    config.validate()?;
    search.validate()?;
    if config.dim != sample.dim() {
        return Err(Error::Domain("config dimension does not match the sample".into()));
    }
    Ok(())
}

/// Minimizes the full-partition SSR over a single extra threshold inside
/// `interval`, which must be one of the regimes of `fixed`. Returns the
/// threshold and the mean squared residual at the minimum; on exact ties the
/// smallest threshold wins.
pub fn estimate_one_threshold(sample: &Sample, fixed: &RegimePartition, interval: &RegimeInterval, config: &KernelConfig, search: &SearchConfig) -> Result<(f64, f64)> {
    check_inputs(sample, config, search)?;
    let j = fixed
        .regimes()
        .iter()
        .position(|r| r == interval)
        .ok_or_else(|| Error::Domain(format!("{interval} is not a regime of the fixed partition")))?;
    let order = QOrder::new(sample);
    check_partition(&order, fixed, config)?;
    let sses = regime_sses(sample, &order, fixed, config);
    estimate_in(sample, &order, fixed, &sses, j, config, search)
}

/// One round of estimation: searches every regime of `partition` and
/// returns the regime index, threshold and full-partition SSR of the best
/// split, plus the regimes that could not be searched.
pub(crate) fn best_split(sample: &Sample, order: &QOrder, partition: &RegimePartition, config: &KernelConfig, search: &SearchConfig) -> Result<(Option<(f64, f64)>, Vec<RegimeInterval>)> {
    let sses = regime_sses(sample, order, partition, config);
    let regimes = partition.regimes();
    let mut best: Option<(f64, f64)> = None;
    let mut skipped = Vec::new();
    for j in 0..regimes.len() {
        match estimate_in(sample, order, partition, &sses, j, config, search) {
            Ok((gamma, ssr)) => {
                if best.map_or(true, |(_, b)| ssr < b) {
                    best = Some((gamma, ssr));
                }
            }
            Err(Error::Search(_)) => skipped.push(regimes[j]),
            Err(e) => return Err(e),
        }
    }
    Ok((best, skipped))
}

/// Sequential detection: test `s` against `s + 1` thresholds, and on
/// rejection add the single threshold that lowers the SSR most, until a test
/// fails to reject or `max_thresholds` is reached.
pub fn detect(sample: &Sample, config: &KernelConfig, search: &SearchConfig, weight_box: &WeightBox) -> std::result::Result<DetectionResult, DetectFailure> {
    let mut result = DetectionResult::empty();
    let fail = |error: Error, partial: &DetectionResult| DetectFailure {
        error,
        partial: partial.clone(),
    };
    if let Err(e) = check_inputs(sample, config, search) {
        return Err(fail(e, &result));
    }
    let min_obs = config.min_regime_obs.max(1);
    if sample.len() < 4 * min_obs {
        let e = Error::Precondition(format!("detection needs at least {} observations, got {}", 4 * min_obs, sample.len()));
        return Err(fail(e, &result));
    }
    let ctx = TestContext::new(sample, config, weight_box).map_err(|e| fail(e, &result))?;
    let settings = search.inference();
    let mut partition = RegimePartition::empty();
    loop {
        let report = sequential_test_with(&ctx, &partition, &settings).map_err(|e| fail(e, &result))?;
        for r in &report.skipped {
            result.skip(*r);
        }
        let reject = report.reject;
        result.reports.push(report);
        if !reject {
            break;
        }
        if partition.len() >= search.max_thresholds {
            result.cap_reached = true;
            break;
        }
        let (best, skipped) = best_split(sample, &ctx.order, &partition, config, search).map_err(|e| fail(e, &result))?;
        for r in skipped {
            result.skip(r);
        }
        let Some((gamma, ssr)) = best else {
            return Err(fail(Error::Search("no regime admits another threshold".into()), &result));
        };
        partition = partition.with_threshold(gamma).map_err(|e| fail(e, &result))?;
        result.discovery_order.push(gamma);
        result.round_ssr.push(ssr);
        result.gammas = partition.thresholds().to_vec();
        result.s_hat = partition.len();
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{dgp_null, dgp_three_thresholds, replication_rng};
    use crate::regime::ssr;

    fn kernel(n: usize) -> KernelConfig {
        KernelConfig::from_rule(1.0, 1.0, n, 4.25, 1).unwrap()
    }

    #[test]
    fn constant_response_picks_first_grid_point() {
        let s = dgp_null(200, &mut replication_rng(1, 0));
        let flat = Sample::univariate(vec![2.0; 200], s.x_flat().to_vec(), s.q().to_vec()).unwrap();
        let search = SearchConfig::default();
        let (gamma, value) = estimate_one_threshold(&flat, &RegimePartition::empty(), &RegimeInterval::full(), &kernel(200), &search).unwrap();
        assert_eq!(value, 0.0);
        let order = QOrder::new(&flat);
        let range = order.range(&RegimeInterval::full());
        let first = search_positions(&order, &range, &search, 10).unwrap()[0];
        assert_eq!(gamma, order.q[first]);
    }

    #[test]
    fn profile_matches_direct_ssr() {
        let s = dgp_three_thresholds(300, &mut replication_rng(2, 0));
        let cfg = kernel(300);
        let fixed = RegimePartition::new(vec![0.1]).unwrap();
        let interval = fixed.regimes()[1];
        let search = SearchConfig { grid_points: 15, ..Default::default() };
        let order = QOrder::new(&s);
        let sses = regime_sses(&s, &order, &fixed, &cfg);
        let range = order.range(&interval);
        let positions = search_positions(&order, &range, &search, 10).unwrap();
        let profile = interval_profile(&s, &order, range, &positions, &cfg);
        for (gamma, inside) in profile {
            let direct = ssr(&s, &fixed.with_threshold(gamma).unwrap(), &cfg).unwrap();
            let via = (sses[0] + inside) / 300.0;
            assert!((direct - via).abs() < 1e-12, "{direct} vs {via}");
        }
        let (gamma, value) = estimate_one_threshold(&s, &fixed, &interval, &cfg, &search).unwrap();
        assert!(interval.contains(gamma));
        assert!((ssr(&s, &fixed.with_threshold(gamma).unwrap(), &cfg).unwrap() - value).abs() < 1e-12);
    }

    #[test]
    fn grid_respects_trim_and_occupancy() {
        let s = dgp_null(400, &mut replication_rng(3, 0));
        let order = QOrder::new(&s);
        let range = order.range(&RegimeInterval::full());
        let search = SearchConfig::default();
        let pos = search_positions(&order, &range, &search, 10).unwrap();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(pos[0] >= 20 && *pos.last().unwrap() <= 380);
        let thin = RegimeInterval::new(f64::NEG_INFINITY, order.q[15]).unwrap();
        assert!(matches!(search_positions(&order, &order.range(&thin), &search, 10), Err(Error::Search(_))));
    }

    #[test]
    fn interval_must_be_a_regime() {
        let s = dgp_null(200, &mut replication_rng(4, 0));
        let err = estimate_one_threshold(&s, &RegimePartition::new(vec![0.0]).unwrap(), &RegimeInterval::full(), &kernel(200), &SearchConfig::default()).unwrap_err();
        assert!(err.is_domain());
    }

    #[test]
    fn detect_guards_small_samples() {
        let s = dgp_null(39, &mut replication_rng(5, 0));
        let err = detect(&s, &kernel(39), &SearchConfig::default(), &WeightBox::symmetric(1.5, 1).unwrap()).unwrap_err();
        assert!(matches!(err.error, Error::Precondition(_)));
        assert_eq!(err.partial.reports.len(), 0);
    }

    #[test]
    fn detect_report_trail_is_consistent() {
        let s = dgp_three_thresholds(800, &mut replication_rng(6, 0));
        let r = detect(&s, &kernel(800), &SearchConfig::default(), &WeightBox::symmetric(1.5, 1).unwrap()).unwrap();
        assert_eq!(r.gammas.len(), r.s_hat);
        assert_eq!(r.reports.len(), r.s_hat + 1);
        assert!(r.gammas.windows(2).all(|w| w[0] < w[1]));
        assert!(r.round_ssr.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.s_hat >= 1);
    }
}
