//! Forward integration of single characteristics together with the
//! variational pair
//!
//! ```text
//! ξ = e^{λ−μ} ∂R,      η = ∂W + V e^{λ−μ} λ̇ ∂R,      η̂ = s η,
//! ```
//!
//! for `∂ = ∂_r`, using the field equations to eliminate second derivatives.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinematics::energy_factor_unchecked;
use crate::metric::{DeSitterVacuum, MetricState};

/// Metric data at one spacetime point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalMetric {
    pub lambda: f64,
    pub mu: f64,
    pub lambda_dot: f64,
    pub mu_dot: f64,
    pub mu_prime: f64,
    pub q: f64,
}

impl LocalMetric {
    #[inline]
    pub fn lapse_ratio(&self) -> f64 {
        (self.mu - self.lambda).exp()
    }
}

/// A metric evaluable along trajectories.
pub trait Background: Sync {
    fn cosmo(&self) -> f64;
    /// Closed interval of times where `sample` is defined.
    fn time_range(&self) -> (f64, f64);
    fn sample(&self, s: f64, r: f64) -> LocalMetric;

    fn covers(&self, s: f64) -> bool {
        let (a, b) = self.time_range();
        let slack = 1e-12 * b.abs().max(1.0);
        s >= a - slack && s <= b + slack
    }
}

/// Exact plane-symmetric vacuum.
#[derive(Clone, Copy, Debug)]
pub struct DeSitterBackground(pub DeSitterVacuum);

impl Background for DeSitterBackground {
    fn cosmo(&self) -> f64 {
        self.0.cosmo
    }

    fn time_range(&self) -> (f64, f64) {
        (f64::MIN_POSITIVE, f64::INFINITY)
    }

    fn sample(&self, s: f64, _r: f64) -> LocalMetric {
        let v = self.0;
        LocalMetric { lambda: v.lambda(s), mu: v.mu(s), lambda_dot: v.lambda_dot(s), mu_dot: v.mu_dot(s), mu_prime: 0.0, q: 0.0 }
    }
}

/// Coefficients frozen in space and time.
#[derive(Clone, Copy, Debug)]
pub struct FrozenBackground {
    pub cosmo: f64,
    pub local: LocalMetric,
}

impl Background for FrozenBackground {
    fn cosmo(&self) -> f64 {
        self.cosmo
    }

    fn time_range(&self) -> (f64, f64) {
        (f64::MIN_POSITIVE, f64::INFINITY)
    }

    fn sample(&self, _s: f64, _r: f64) -> LocalMetric {
        self.local
    }
}

/// Stored metric snapshots on the periodic `r`-grid.
///
/// Interpolation is linear in `r` and in time, applied to the rescaled
/// fields `λ − ln t`, `μ + ln t`, `tλ̇`, `tμ̇`, `t³μ′`, `t⁵q`.
#[derive(Clone, Debug)]
pub struct MetricHistory {
    pub cosmo: f64,
    pub times: Vec<f64>,
    /// Rescaled fields per snapshot, each of length `nr`.
    levels: Vec<[Vec<f64>; 6]>,
    nr: usize,
}

impl MetricHistory {
    pub fn new(cosmo: f64) -> Self {
        Self { cosmo, times: Vec::new(), levels: Vec::new(), nr: 0 }
    }

    /// Appends a snapshot; times must increase strictly.
    pub fn push(&mut self, metric: &MetricState, q: &[f64]) -> Result<()> {
        let t = metric.t;
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::Domain(format!("history times must increase ({t} after {last})")));
            }
        }
        if self.levels.is_empty() {
            self.nr = metric.nr();
        } else if metric.nr() != self.nr || q.len() != self.nr {
            return Err(Error::Incompatible(format!("snapshot with {} nodes in a history of {}", metric.nr(), self.nr)));
        }
        let lt = t.ln();
        let level = [
            metric.lambda.iter().map(|l| l - lt).collect(),
            metric.mu.iter().map(|m| m + lt).collect(),
            metric.lambda_dot.iter().map(|x| x * t).collect(),
            metric.mu_dot.iter().map(|x| x * t).collect(),
            metric.mu_prime.iter().map(|x| x * t.powi(3)).collect(),
            q.iter().map(|x| x * t.powi(5)).collect(),
        ];
        self.times.push(t);
        self.levels.push(level);
        Ok(())
    }

    pub fn from_snapshots(cosmo: f64, metrics: &[MetricState], q: &[Vec<f64>]) -> Result<Self> {
        let mut h = Self::new(cosmo);
        for (m, qq) in metrics.iter().zip(q) {
            h.push(m, qq)?;
        }
        Ok(h)
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Snapshot `n` restored as a `MetricState` together with its `q`.
    pub fn snapshot(&self, n: usize) -> (MetricState, Vec<f64>) {
        let t = self.times[n];
        let lt = t.ln();
        let l = &self.levels[n];
        let m = MetricState {
            t,
            lambda: l[0].iter().map(|x| x + lt).collect(),
            mu: l[1].iter().map(|x| x - lt).collect(),
            lambda_dot: l[2].iter().map(|x| x / t).collect(),
            mu_dot: l[3].iter().map(|x| x / t).collect(),
            mu_prime: l[4].iter().map(|x| x / t.powi(3)).collect(),
        };
        (m, l[5].iter().map(|x| x / t.powi(5)).collect())
    }

    fn bracket(&self, s: f64) -> (usize, f64) {
        let n = self.times.len();
        if n == 1 {
            return (0, 0.0);
        }
        let hi = self.times.partition_point(|&t| t <= s).clamp(1, n - 1);
        let lo = hi - 1;
        let th = ((s - self.times[lo]) / (self.times[hi] - self.times[lo])).clamp(0.0, 1.0);
        (lo, th)
    }
}

impl Background for MetricHistory {
    fn cosmo(&self) -> f64 {
        self.cosmo
    }

    fn time_range(&self) -> (f64, f64) {
        match (self.times.first(), self.times.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => (f64::INFINITY, f64::NEG_INFINITY),
        }
    }

    fn sample(&self, s: f64, r: f64) -> LocalMetric {
        let (lo, th) = self.bracket(s);
        let hi = (lo + 1).min(self.times.len() - 1);
        let nr = self.nr;
        let x = r.rem_euclid(1.0) * nr as f64;
        let i0 = (x.floor() as usize) % nr;
        let i1 = (i0 + 1) % nr;
        let tx = x - x.floor();
        let v = |c: usize| {
            let a = &self.levels[lo][c];
            let b = &self.levels[hi][c];
            let at_lo = a[i0] + tx * (a[i1] - a[i0]);
            let at_hi = b[i0] + tx * (b[i1] - b[i0]);
            at_lo + th * (at_hi - at_lo)
        };
        let ls = s.ln();
        LocalMetric {
            lambda: v(0) + ls,
            mu: v(1) - ls,
            lambda_dot: v(2) / s,
            mu_dot: v(3) / s,
            mu_prime: v(4) / s.powi(3),
            q: v(5) / s.powi(5),
        }
    }
}

/// `(dR/ds, dW/ds)` of the characteristic flow.
pub fn char_rhs(bg: &impl Background, s: f64, r: f64, w: f64, big_f: f64) -> (f64, f64) {
    rates_from(&bg.sample(s, r), s, w, big_f)
}

#[inline]
fn rates_from(m: &LocalMetric, s: f64, w: f64, big_f: f64) -> (f64, f64) {
    let v = energy_factor_unchecked(s, w, big_f);
    let a = m.lapse_ratio();
    (a * w / v, -m.lambda_dot * w - m.mu_prime * a * v)
}

/// Matrix `A` of the linear system `d(ξ, η)/ds = A (ξ, η)`.
pub fn variational_matrix(m: &LocalMetric, cosmo: f64, s: f64, w: f64, big_f: f64) -> [[f64; 2]; 2] {
    let v = energy_factor_unchecked(s, w, big_f);
    let (ld, md) = (m.lambda_dot, m.mu_dot);
    let a11 = w * w / (v * v) * ld - md;
    let a12 = (1.0 + big_f / (s * s)) / v.powi(3);
    let a21 = v * ((cosmo - 4.0 * PI * m.q) * (2.0 * m.mu).exp() + (md - ld) / s) - ld * big_f / (v * s.powi(3));
    let a22 = -(w / v) * (m.lapse_ratio() * m.mu_prime + w * ld / v);
    [[a11, a12], [a21, a22]]
}

/// `(dξ/ds, dη/ds)`.
#[allow(clippy::too_many_arguments)]
pub fn variational_rhs(bg: &impl Background, s: f64, r: f64, w: f64, big_f: f64, xi: f64, eta: f64) -> (f64, f64) {
    let a = variational_matrix(&bg.sample(s, r), bg.cosmo(), s, w, big_f);
    (a[0][0] * xi + a[0][1] * eta, a[1][0] * xi + a[1][1] * eta)
}

/// `c₁..c₄` of the normal form `ξ̇ = s⁻¹[(1+c₁)ξ + (1+c₂)η̂]`, `η̂̇ = s⁻¹[(1+c₃)ξ + (1+c₄)η̂]`.
pub fn normal_form_coefficients(a: &[[f64; 2]; 2], s: f64) -> [f64; 4] {
    [s * a[0][0] - 1.0, a[0][1] - 1.0, s * s * a[1][0] - 1.0, s * a[1][1]]
}

/// `E = s⁻⁴(ξ + η̂)² + (ξ − η̂)²`.
pub fn monitor_energy(s: f64, xi: f64, eta_hat: f64) -> f64 {
    (xi + eta_hat).powi(2) / s.powi(4) + (xi - eta_hat).powi(2)
}

/// One point of an integrated trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharState {
    pub s: f64,
    pub r: f64,
    pub w: f64,
    pub big_f: f64,
    pub xi: f64,
    pub eta_hat: f64,
    pub e: f64,
    /// Recovered `∂R/∂r = e^{μ−λ} ξ`.
    pub d_r: f64,
    /// Recovered `s ∂W/∂r = s(η − V λ̇ ξ)`.
    pub s_d_w: f64,
    /// `s² Σ|c_i|` at this point.
    pub c_sum_s2: f64,
}

impl CharState {
    /// `W·s`, the comoving momentum.
    pub fn ws(&self) -> f64 {
        self.w * self.s
    }
}

/// Starting point of a characteristic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Seed {
    pub t: f64,
    pub r: f64,
    pub w: f64,
    pub big_f: f64,
}

impl Seed {
    /// Parses `r,w,F` triplets separated by `;`.
    pub fn parse_list(text: &str, t: f64) -> Result<Vec<Seed>> {
        text.split(';')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                let v: Vec<f64> = p
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Domain(format!("seed `{p}`: expected `r,w,F`")))?;
                match v[..] {
                    [r, w, big_f] if big_f >= 0.0 => Ok(Seed { t, r, w, big_f }),
                    _ => Err(Error::Domain(format!("seed `{p}`: expected `r,w,F` with F ≥ 0"))),
                }
            })
            .collect()
    }

    /// `n` deterministic seeds spread over `[0,1) × [−0.6 w_sup, 0.6 w_sup] × [0.1, 0.7]·F_sup`.
    pub fn spread(n: usize, t: f64, w_sup: f64, f_sup: f64) -> Vec<Seed> {
        (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) / n as f64;
                let y = ((i * 7) % n) as f64 / (n.max(2) - 1) as f64;
                let z = ((i * 3) % n) as f64 / (n.max(2) - 1) as f64;
                Seed { t, r: x, w: w_sup * 0.6 * (2.0 * y - 1.0), big_f: f_sup * (0.1 + 0.6 * z) }
            })
            .collect()
    }
}

/// Step control for [`integrate_characteristic`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rk4Options {
    /// Upper bound on the step in `ln s`; steps are uniform in `ln s`.
    pub rel_step: f64,
}

impl Default for Rk4Options {
    fn default() -> Self {
        Self { rel_step: 0.01 }
    }
}

type Y = [f64; 4];

fn deriv(bg: &impl Background, s: f64, y: &Y, big_f: f64) -> Y {
    let m = bg.sample(s, y[0]);
    let (dr, dw) = rates_from(&m, s, y[1], big_f);
    let a = variational_matrix(&m, bg.cosmo(), s, y[1], big_f);
    [dr, dw, a[0][0] * y[2] + a[0][1] * y[3], a[1][0] * y[2] + a[1][1] * y[3]]
}

fn state_at(bg: &impl Background, s: f64, y: &Y, big_f: f64) -> CharState {
    let m = bg.sample(s, y[0]);
    let v = energy_factor_unchecked(s, y[1], big_f);
    let a = variational_matrix(&m, bg.cosmo(), s, y[1], big_f);
    let c = normal_form_coefficients(&a, s);
    let eta_hat = s * y[3];
    CharState {
        s,
        r: y[0],
        w: y[1],
        big_f,
        xi: y[2],
        eta_hat,
        e: monitor_energy(s, y[2], eta_hat),
        d_r: m.lapse_ratio() * y[2],
        s_d_w: s * (y[3] - v * m.lambda_dot * y[2]),
        c_sum_s2: s * s * c.iter().map(|x| x.abs()).sum::<f64>(),
    }
}

/// RK4 integration of `(R, W, ξ, η)` from the seed to `s_end` for `∂ = ∂_r`.
///
/// Starts from `∂R/∂r = 1`, `∂W/∂r = 0`; every step is recorded.
pub fn integrate_characteristic(bg: &impl Background, seed: Seed, s_end: f64, opts: Rk4Options) -> Result<Vec<CharState>> {
    if !bg.covers(seed.t) || !bg.covers(s_end) {
        let (a, b) = bg.time_range();
        return Err(Error::Domain(format!("interval [{}, {s_end}] outside stored history [{a}, {b}]", seed.t)));
    }
    if !(s_end >= seed.t) {
        return Err(Error::Domain(format!("s_end = {s_end} precedes the seed time {}", seed.t)));
    }
    let f = seed.big_f;
    let m0 = bg.sample(seed.t, seed.r);
    let v0 = energy_factor_unchecked(seed.t, seed.w, f);
    let xi0 = (m0.lambda - m0.mu).exp();
    let mut y: Y = [seed.r, seed.w, xi0, v0 * xi0 * m0.lambda_dot];
    let mut out = vec![state_at(bg, seed.t, &y, f)];
    if s_end == seed.t {
        return Ok(out);
    }
    // geometric steps landing exactly on s_end
    let span = (s_end / seed.t).ln();
    let n = (span / opts.rel_step).ceil().max(1.0) as usize;
    let mut s = seed.t;
    for k in 1..=n {
        let s_next = if k == n { s_end } else { seed.t * (span * k as f64 / n as f64).exp() };
        let h = s_next - s;
        let k1 = deriv(bg, s, &y, f);
        let k2 = deriv(bg, s + 0.5 * h, &add(&y, &k1, 0.5 * h), f);
        let k3 = deriv(bg, s + 0.5 * h, &add(&y, &k2, 0.5 * h), f);
        let k4 = deriv(bg, s_next, &add(&y, &k3, h), f);
        for c in 0..4 {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::BlowUp { last_good_t: s });
        }
        s = s_next;
        out.push(state_at(bg, s, &y, f));
    }
    Ok(out)
}

fn add(y: &Y, k: &Y, h: f64) -> Y {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]]
}

/// Independent trajectories in parallel; order follows `seeds`.
pub fn integrate_many(bg: &impl Background, seeds: &[Seed], s_end: f64, opts: Rk4Options) -> Result<Vec<Vec<CharState>>> {
    seeds.par_iter().map(|&seed| integrate_characteristic(bg, seed, s_end, opts)).collect()
}

/// Extremes of one trajectory restricted to `s ∈ [s_lo, s_hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundSummary {
    /// `max E(s) / E(s_lo)`.
    pub max_e_ratio: f64,
    pub max_d_r: f64,
    pub max_s_d_w: f64,
    pub max_c_sum_s2: f64,
    /// Values at the first state with `s ≥ s_lo`.
    pub start: CharState,
}

pub fn summarize(traj: &[CharState], s_lo: f64, s_hi: f64) -> Option<BoundSummary> {
    let inside: Vec<&CharState> = traj.iter().filter(|c| c.s >= s_lo * (1.0 - 1e-12) && c.s <= s_hi * (1.0 + 1e-12)).collect();
    let start = **inside.first()?;
    let fold = |g: fn(&CharState) -> f64| inside.iter().map(|c| g(c)).fold(0.0_f64, f64::max);
    Some(BoundSummary {
        max_e_ratio: inside.iter().map(|c| c.e / start.e).fold(0.0_f64, f64::max),
        max_d_r: fold(|c| c.d_r.abs()),
        max_s_d_w: fold(|c| c.s_d_w.abs()),
        max_c_sum_s2: fold(|c| c.c_sum_s2),
        start,
    })
}

/// Linear interpolation of a trajectory at time `s`.
pub fn state_near(traj: &[CharState], s: f64) -> Option<CharState> {
    let idx = traj.partition_point(|c| c.s < s);
    if idx == 0 {
        return traj.first().copied().filter(|c| (c.s - s).abs() <= 1e-12 * s.max(1.0));
    }
    let b = *traj.get(idx)?;
    let a = traj[idx - 1];
    let th = (s - a.s) / (b.s - a.s);
    let l = |x: f64, y: f64| x + th * (y - x);
    Some(CharState {
        s,
        r: l(a.r, b.r),
        w: l(a.w, b.w),
        big_f: a.big_f,
        xi: l(a.xi, b.xi),
        eta_hat: l(a.eta_hat, b.eta_hat),
        e: l(a.e, b.e),
        d_r: l(a.d_r, b.d_r),
        s_d_w: l(a.s_d_w, b.s_d_w),
        c_sum_s2: l(a.c_sum_s2, b.c_sum_s2),
    })
}
