//! Deliberately naive reimplementation of the estimators and test
//! statistics: plain loops over all observations at every point, no sorting,
//! no block sums and a Jacobi eigen-solver for the inverse square root.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use threshreg::montecarlo::{dgp_null, dgp_three_thresholds};
use threshreg::{KernelConfig, RegimeInterval, Sample, WeightBox};

pub const TOL: f64 = 1e-10;
const FLOOR: f64 = 1e-10;

pub struct Case {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub q: Vec<f64>,
    pub h: f64,
    pub half: f64,
    pub regime: (f64, f64),
}

impl Case {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn sample(&self) -> Sample {
        Sample::univariate(self.y.clone(), self.x.clone(), self.q.clone()).unwrap()
    }

    pub fn config(&self) -> KernelConfig {
        KernelConfig::with_bandwidth(self.h, 1).unwrap()
    }

    pub fn weight_box(&self) -> WeightBox {
        WeightBox::symmetric(self.half, 1).unwrap()
    }

    pub fn interval(&self) -> RegimeInterval {
        RegimeInterval::new(self.regime.0, self.regime.1).unwrap()
    }

    pub fn a(&self, i: usize) -> f64 {
        if self.x[i].abs() <= self.half {
            1.0
        } else {
            0.0
        }
    }

    /// Kernel sums over observations with `lo <= q < hi`.
    pub fn sums(&self, x: f64, lo: f64, hi: f64) -> (f64, f64, f64) {
        let mut s = (0.0, 0.0, 0.0);
        for j in 0..self.n() {
            if self.q[j] >= lo && self.q[j] < hi {
                let u = (self.x[j] - x) / self.h;
                let k = (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
                s.0 += k;
                s.1 += k * self.y[j];
                s.2 += k * self.y[j] * self.y[j];
            }
        }
        s
    }

    pub fn f(&self, x: f64, lo: f64, hi: f64) -> f64 {
        self.sums(x, lo, hi).0 / (self.n() as f64 * self.h)
    }

    pub fn m(&self, x: f64, lo: f64, hi: f64) -> f64 {
        let (k, ky, _) = self.sums(x, lo, hi);
        ky / k.max(FLOOR * self.n() as f64 * self.h)
    }

    pub fn v(&self, x: f64, lo: f64, hi: f64) -> f64 {
        let (k, ky, ky2) = self.sums(x, lo, hi);
        let d = k.max(FLOOR * self.n() as f64 * self.h);
        (ky2 / d - (ky / d).powi(2)).max(0.0)
    }

    pub fn f_all(&self, x: f64) -> f64 {
        self.f(x, f64::NEG_INFINITY, f64::INFINITY).max(FLOOR)
    }

    pub fn gamma(&self, tau: f64) -> f64 {
        let (lo, hi) = self.regime;
        let mut total = 0.0;
        for i in 0..self.n() {
            let q = self.q[i];
            if q >= lo && q < hi {
                let x = self.x[i];
                let side = if q < tau { self.m(x, lo, tau) } else { self.m(x, tau, hi) };
                total += self.a(i) * (self.m(x, lo, hi) - side).powi(2);
            }
        }
        total / self.n() as f64
    }

    /// (xi, sigma^2, s1 + s2) at `tau`.
    pub fn bias_var(&self, tau: f64) -> (f64, f64, f64) {
        let (lo, hi) = self.regime;
        let (mut xi, mut s) = (0.0, 0.0);
        for i in 0..self.n() {
            let x = self.x[i];
            let fr = self.f(x, lo, hi).max(FLOOR);
            let wl = 1.0 - 2.0 * self.f(x, lo, tau) / fr;
            let wr = 1.0 - 2.0 * self.f(x, tau, hi) / fr;
            let (vr, vl, vk) = (self.v(x, lo, hi), self.v(x, lo, tau), self.v(x, tau, hi));
            let w = self.a(i) / self.f_all(x);
            xi += w * (vr + wl * vl + wr * vk);
            s += w * (vr * vr + wl * vl * vl + wr * vk * vk);
        }
        let n = self.n() as f64;
        let c2 = 1.0 / (2.0 * std::f64::consts::PI.sqrt());
        let c3 = 1.0 / (2.0 * (2.0 * std::f64::consts::PI).sqrt());
        (c2 * xi / n, 2.0 * c3 * s / n, s / n)
    }

    pub fn delta(&self, tau: f64) -> f64 {
        let (xi, s2, _) = self.bias_var(tau);
        let n = self.n() as f64;
        (n * self.h.sqrt() * self.gamma(tau) - xi / self.h.sqrt()) / s2.sqrt()
    }

    /// The nine covariance terms for `tl < tk`, each with its sign and
    /// multiplicity, written out term by term.
    pub fn c_terms(&self, tl: f64, tk: f64) -> [f64; 9] {
        let (lo, hi) = self.regime;
        let mut c = [0.0; 9];
        for i in 0..self.n() {
            let x = self.x[i];
            let w = self.a(i) * self.a(i) / self.f_all(x);
            let fg = self.f(x, lo, hi).max(FLOOR);
            let vg = self.v(x, lo, hi);
            let (f_ll, v_ll) = (self.f(x, lo, tl), self.v(x, lo, tl));
            let (f_rl, v_rl) = (self.f(x, tl, hi), self.v(x, tl, hi));
            let (f_lk, v_lk) = (self.f(x, lo, tk), self.v(x, lo, tk));
            let (f_rk, v_rk) = (self.f(x, tk, hi), self.v(x, tk, hi));
            let (f_m, v_m) = (self.f(x, tl, tk), self.v(x, tl, tk));
            c[0] += w * vg * vg;
            c[1] += w * -2.0 * vg * (v_lk * f_lk / fg + v_rk * f_rk / fg);
            c[2] += w * (v_lk * v_lk * f_lk / fg + v_rk * v_rk * f_rk / fg);
            c[3] += w * -2.0 * vg * (v_ll * f_ll / fg + v_rl * f_rl / fg);
            c[4] += w * 4.0 * vg * (v_ll * f_ll / fg + v_m * f_m / fg + v_rk * f_rk / fg);
            c[5] += w * -2.0 * (v_lk * v_ll * f_ll / fg + v_lk * v_m * f_m / fg + v_rk * v_rk * f_rk / fg);
            c[6] += w * (v_ll * v_ll * f_ll / fg + v_rl * v_rl * f_rl / fg);
            c[7] += w * -2.0 * (v_ll * v_ll * f_ll / fg + v_rl * v_m * f_m / fg + v_rl * v_rk * f_rk / fg);
            let (flk, frl) = (f_lk.max(FLOOR), f_rl.max(FLOOR));
            c[8] += w * (v_ll * v_ll * f_ll / flk + v_m * v_m * f_m * f_m / (flk * frl) + v_rk * v_rk * f_rk / frl);
        }
        c.map(|t| t / self.n() as f64)
    }

    pub fn count(&self, lo: f64, hi: f64) -> usize {
        self.q.iter().filter(|&&q| q >= lo && q < hi).count()
    }

    /// Surviving candidates of the default grid: trimmed quantile ends,
    /// m + 1 equal gaps, greedy occupancy filter with ten per side.
    pub fn candidates(&self, m: usize, trim: f64) -> Vec<f64> {
        let (lo, hi) = self.regime;
        let mut inside: Vec<f64> = self.q.iter().copied().filter(|&q| q >= lo && q < hi).collect();
        inside.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cut = (trim * inside.len() as f64).floor() as usize;
        let (a, b) = (inside[cut], inside[inside.len() - 1 - cut]);
        let mut kept: Vec<f64> = Vec::new();
        for k in 1..=m {
            let t = a + k as f64 * (b - a) / (m + 1) as f64;
            let since = kept.last().map_or(usize::MAX, |&p| self.count(p, t));
            if self.count(lo, t) >= 10 && self.count(t, hi) >= 10 && since >= 10 {
                kept.push(t);
            }
        }
        kept
    }

    pub fn z(&self, taus: &[f64]) -> (Vec<f64>, f64) {
        let k = taus.len();
        let deltas: Vec<f64> = taus.iter().map(|&t| self.delta(t)).collect();
        let vs: Vec<f64> = taus.iter().map(|&t| self.bias_var(t).2).collect();
        let mut sig = vec![vec![0.0; k]; k];
        for a in 0..k {
            sig[a][a] = 1.0;
            for b in a + 1..k {
                let c: f64 = self.c_terms(taus[a], taus[b]).iter().sum();
                sig[a][b] = c / (vs[a] * vs[b]).sqrt();
                sig[b][a] = sig[a][b];
            }
        }
        let root = jacobi_inv_sqrt(sig, 1e-8);
        let z = (0..k).map(|r| (0..k).map(|c| root[r][c] * deltas[c]).sum::<f64>()).sum::<f64>() / (k as f64).sqrt();
        (deltas, z)
    }
}

/// Symmetric inverse square root by cyclic Jacobi rotations.
pub fn jacobi_inv_sqrt(mut a: Vec<Vec<f64>>, floor: f64) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let inv: Vec<f64> = (0..n).map(|i| 1.0 / a[i][i].max(floor).sqrt()).collect();
    (0..n)
        .map(|r| (0..n).map(|c| (0..n).map(|k| v[r][k] * inv[k] * v[c][k]).sum()).collect())
        .collect()
}

pub fn case(seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
    let n = rng.gen_range(120..=300);
    let s = match seed % 3 {
        0 => dgp_null(n, &mut rng),
        1 => dgp_three_thresholds(n, &mut rng),
        _ => {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y = x.iter().zip(&q).map(|(a, b)| a.sin() + 0.3 * b + rng.gen_range(-0.5..0.5)).collect();
            Sample::univariate(y, x, q).unwrap()
        }
    };
    let regime = if seed % 4 == 3 {
        let mut q = s.q().to_vec();
        q.sort_by(|a, b| a.partial_cmp(b).unwrap());
        (q[n / 5], f64::INFINITY)
    } else {
        (f64::NEG_INFINITY, f64::INFINITY)
    };
    Case {
        y: s.y().to_vec(),
        x: s.x_flat().to_vec(),
        q: s.q().to_vec(),
        h: rng.gen_range(0.7..1.5) * (n as f64).powf(-1.0 / 4.25),
        half: rng.gen_range(1.0..2.5),
        regime,
    }
}

pub fn close(got: f64, want: f64) -> bool {
    (got - want).abs() <= TOL * want.abs().max(1.0)
}

/// Largest scaled discrepancy `|got - want| / max(1, |want|)` between the
/// library and the oracle over every statistic on one random case.
pub fn sweep(seed: u64) -> f64 {
    use threshreg::inference::{candidate_statistics, cov_hat_terms, gamma_tilde, regime_test, sigma2_hat, xi_hat, InferenceConfig};
    use threshreg::regime::{cond_var_hat, density_hat, nw_hat};
    let c = case(seed);
    let (s, cfg, bx, iv) = (c.sample(), c.config(), c.weight_box(), c.interval());
    let (lo, hi) = c.regime;
    let mut worst = 0.0f64;
    let mut see = |got: f64, want: f64| worst = worst.max((got - want).abs() / want.abs().max(1.0));
    for i in (0..c.n()).step_by(11) {
        let x = c.x[i];
        see(density_hat(&s, &iv, &[x], &cfg).unwrap(), c.f(x, lo, hi));
        see(nw_hat(&s, &iv, &[x], &cfg).unwrap(), c.m(x, lo, hi));
        see(cond_var_hat(&s, &iv, &[x], &cfg).unwrap(), c.v(x, lo, hi));
    }
    let taus = c.candidates(7, 0.1);
    for &tau in &taus {
        let (xi, s2, _) = c.bias_var(tau);
        see(gamma_tilde(&s, &iv, tau, &cfg, &bx).unwrap(), c.gamma(tau));
        see(xi_hat(&s, &iv, tau, &cfg, &bx).unwrap(), xi);
        see(sigma2_hat(&s, &iv, tau, &cfg, &bx).unwrap(), s2);
        see(candidate_statistics(&s, &iv, tau, &cfg, &bx).unwrap().delta, c.delta(tau));
    }
    if taus.len() >= 2 {
        let got = cov_hat_terms(&s, &iv, taus[0], taus[1], &cfg, &bx).unwrap();
        for (g, w) in got.c.iter().zip(c.c_terms(taus[0], taus[1])) {
            see(*g, w);
        }
    }
    let r = regime_test(&s, &iv, &InferenceConfig::default(), &cfg, &bx).unwrap();
    if r.taus != taus {
        return f64::INFINITY;
    }
    let (deltas, z) = c.z(&taus);
    for (g, w) in r.delta_hat.iter().zip(&deltas) {
        see(*g, *w);
    }
    see(r.z, z);
    worst
}
