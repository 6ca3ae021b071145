//! Semi-Lagrangian transport of `f` along the characteristics
//!
//! ```text
//! dR/ds = α = e^{μ−λ} W / V,      dW/ds = −β = −(λ̇ W + e^{μ−λ} μ′ V).
//! ```
//!
//! Each arrival node is traced back over one step with the midpoint rule,
//! and the old distribution is reconstructed at the departure point. `F` is
//! a pure slice parameter and is never modified.

use rayon::prelude::*;

use crate::config::Interpolation;
use crate::kinematics::energy_factor_unchecked;
use crate::metric::MetricState;
use crate::phase_space::{DistributionFn, PhaseSpaceGrid};

/// Velocity field of the characteristic flow in `(r, w)`.
pub trait PhaseFlow: Sync {
    /// `(dR/ds, dW/ds)` at time `s`.
    fn velocity(&self, s: f64, r: f64, w: f64, big_f: f64) -> (f64, f64);
}

/// The `r`-profiles that determine α and β at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportCoefficients {
    pub t: f64,
    /// `e^{μ−λ}`
    pub lapse_ratio: Vec<f64>,
    pub lambda_dot: Vec<f64>,
    /// `e^{μ−λ} μ′`
    pub force: Vec<f64>,
}

impl TransportCoefficients {
    pub fn from_metric(metric: &MetricState) -> Self {
        let lapse_ratio: Vec<f64> = metric.mu.iter().zip(&metric.lambda).map(|(m, l)| (m - l).exp()).collect();
        let force = lapse_ratio.iter().zip(&metric.mu_prime).map(|(a, mp)| a * mp).collect();
        Self { t: metric.t, lapse_ratio, lambda_dot: metric.lambda_dot.clone(), force }
    }

    /// Periodic linear interpolation of the three profiles at position `r`.
    #[inline]
    pub fn sample(&self, r: f64) -> (f64, f64, f64) {
        let n = self.lapse_ratio.len();
        let x = r.rem_euclid(1.0) * n as f64;
        let i0 = (x.floor() as usize) % n;
        let i1 = (i0 + 1) % n;
        let th = x - x.floor();
        let lerp = |v: &[f64]| v[i0] + th * (v[i1] - v[i0]);
        (lerp(&self.lapse_ratio), lerp(&self.lambda_dot), lerp(&self.force))
    }

    #[inline]
    pub fn alpha(&self, i: usize, w: f64, big_f: f64) -> f64 {
        self.lapse_ratio[i] * w / energy_factor_unchecked(self.t, w, big_f)
    }

    #[inline]
    pub fn beta(&self, i: usize, w: f64, big_f: f64) -> f64 {
        self.lambda_dot[i] * w + self.force[i] * energy_factor_unchecked(self.t, w, big_f)
    }

    /// α on every phase-space node, row-major `(r, w, F)`.
    pub fn alpha_grid(&self, grid: &PhaseSpaceGrid) -> Vec<f64> {
        self.materialize(grid, |i, w, x| self.alpha(i, w, x))
    }

    /// β on every phase-space node, row-major `(r, w, F)`.
    pub fn beta_grid(&self, grid: &PhaseSpaceGrid) -> Vec<f64> {
        self.materialize(grid, |i, w, x| self.beta(i, w, x))
    }

    fn materialize(&self, grid: &PhaseSpaceGrid, g: impl Fn(usize, f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(grid.len());
        for i in 0..grid.nr {
            for j in 0..grid.nw {
                for k in 0..grid.nf {
                    out.push(g(i, grid.w(j, self.t), grid.f(k)));
                }
            }
        }
        out
    }

    /// Largest `|α|` and largest comoving speed `|d(sW)/ds| = |W − sβ|` over the grid.
    pub fn max_speeds(&self, grid: &PhaseSpaceGrid) -> (f64, f64) {
        let t = self.t;
        let mut a_max = 0.0_f64;
        let mut u_max = 0.0_f64;
        for i in 0..grid.nr {
            for j in 0..grid.nw {
                let w = grid.w(j, t);
                for k in 0..grid.nf {
                    let x = grid.f(k);
                    a_max = a_max.max(self.alpha(i, w, x).abs());
                    u_max = u_max.max((w - t * self.beta(i, w, x)).abs());
                }
            }
        }
        (a_max, u_max)
    }
}

pub fn coefficients(metric: &MetricState, grid: &PhaseSpaceGrid) -> TransportCoefficients {
    debug_assert_eq!(metric.nr(), grid.nr);
    TransportCoefficients::from_metric(metric)
}

/// Coefficients interpolated linearly in time between two levels.
///
/// The blended quantities are `t² e^{μ−λ}`, `t λ̇` and `t⁵ e^{μ−λ} μ′`, which
/// are constant on de Sitter, so the de Sitter flow is reproduced exactly.
pub struct BlendedFlow<'a> {
    pub early: &'a TransportCoefficients,
    pub late: &'a TransportCoefficients,
}

impl PhaseFlow for BlendedFlow<'_> {
    #[inline]
    fn velocity(&self, s: f64, r: f64, w: f64, big_f: f64) -> (f64, f64) {
        let (t0, t1) = (self.early.t, self.late.t);
        let span = t1 - t0;
        let th = if span == 0.0 { 0.0 } else { (s - t0) / span };
        let (a0, l0, f0) = self.early.sample(r);
        let (a1, l1, f1) = self.late.sample(r);
        let blend = |x0: f64, x1: f64, p: i32| (x0 * t0.powi(p) * (1.0 - th) + x1 * t1.powi(p) * th) / s.powi(p);
        let a = blend(a0, a1, 2);
        let ld = blend(l0, l1, 1);
        let fo = blend(f0, f1, 5);
        let v = energy_factor_unchecked(s, w, big_f);
        (a * w / v, -(ld * w + fo * v))
    }
}

/// Departure point at `t_arrive − dt` of the characteristic through `(r, w, F)` at `t_arrive`.
///
/// One backward midpoint (RK2) step in `(r, u = s·w)`, exact when `s·W` is
/// conserved; `F` is held fixed.
pub fn trace_back_flow(flow: &impl PhaseFlow, t_arrive: f64, r: f64, w: f64, big_f: f64, dt: f64) -> (f64, f64) {
    if dt == 0.0 {
        return (r, w);
    }
    let s1 = t_arrive;
    let u = s1 * w;
    let (k1r, k1w) = flow.velocity(s1, r, w, big_f);
    let sm = s1 - 0.5 * dt;
    let rm = r - 0.5 * dt * k1r;
    let um = u - 0.5 * dt * (w + s1 * k1w);
    let wm = um / sm;
    let (k2r, k2w) = flow.velocity(sm, rm, wm, big_f);
    let u0 = u - dt * (wm + sm * k2w);
    (r - dt * k2r, u0 / (s1 - dt))
}

/// Departure point using coefficients at the two bounding time levels.
pub fn trace_back(
    early: &TransportCoefficients,
    late: &TransportCoefficients,
    r: f64,
    w: f64,
    big_f: f64,
    dt: f64,
) -> (f64, f64) {
    trace_back_flow(&BlendedFlow { early, late }, late.t, r, w, big_f, dt)
}

/// Advances `f` from `f.t` to `t_new` along `flow`.
///
/// Periodic wrap in `r`, zero extension beyond the `w` range. Values are
/// clipped at zero; with bilinear weights they also never exceed the old
/// slice maximum.
pub fn advect_flow(
    f: &DistributionFn,
    grid: &PhaseSpaceGrid,
    flow: &impl PhaseFlow,
    t_new: f64,
    interp: Interpolation,
) -> DistributionFn {
    let dt = t_new - f.t;
    if dt == 0.0 {
        return f.clone();
    }
    if f.is_vacuum() {
        return DistributionFn::zeros(grid, t_new);
    }
    let slice_max: Vec<f64> = (0..grid.nf)
        .map(|k| f.values.iter().skip(k).step_by(grid.nf).fold(0.0_f64, |m, &v| m.max(v)))
        .collect();
    let sampler = Sampler { grid, values: &f.values, t_old: f.t, interp };
    let row = grid.nw * grid.nf;
    let mut values = vec![0.0; grid.len()];
    values.par_chunks_mut(row).enumerate().for_each(|(i, out)| {
        let r = grid.r(i);
        for j in 0..grid.nw {
            let w = grid.w(j, t_new);
            for k in 0..grid.nf {
                if slice_max[k] == 0.0 {
                    continue;
                }
                let big_f = grid.f(k);
                let (r0, w0) = trace_back_flow(flow, t_new, r, w, big_f, dt);
                let v = sampler.at(r0, w0, k).max(0.0);
                out[j * grid.nf + k] = match interp {
                    Interpolation::Bilinear => v.min(slice_max[k]),
                    Interpolation::Bicubic => v,
                };
            }
        }
    });
    DistributionFn { values, t: t_new }
}

/// Semi-Lagrangian update between two coefficient levels (`early.t = f.t`).
pub fn advect(
    f: &DistributionFn,
    grid: &PhaseSpaceGrid,
    early: &TransportCoefficients,
    late: &TransportCoefficients,
    interp: Interpolation,
) -> DistributionFn {
    debug_assert_eq!(early.t, f.t);
    advect_flow(f, grid, &BlendedFlow { early, late }, late.t, interp)
}

struct Sampler<'a> {
    grid: &'a PhaseSpaceGrid,
    values: &'a [f64],
    t_old: f64,
    interp: Interpolation,
}

impl Sampler<'_> {
    #[inline]
    fn node(&self, i: usize, j: isize, k: usize) -> f64 {
        if j < 0 || j >= self.grid.nw as isize {
            0.0
        } else {
            self.values[self.grid.idx(i, j as usize, k)]
        }
    }

    /// Reconstruction of the old slice `k` at `(r, w)`.
    #[inline]
    fn at(&self, r: f64, w: f64, k: usize) -> f64 {
        let g = self.grid;
        let u = w * self.t_old;
        let y = (u + g.u_max()) / g.du();
        if !(y >= 0.0 && y <= (g.nw - 1) as f64) {
            return 0.0;
        }
        let x = r.rem_euclid(1.0) * g.nr as f64;
        let xf = x.floor();
        let i0 = (xf as usize) % g.nr;
        let tx = x - xf;
        let j0 = (y.floor() as usize).min(g.nw - 2);
        let ty = y - j0 as f64;
        let nr = g.nr;
        match self.interp {
            Interpolation::Bilinear => {
                let i1 = (i0 + 1) % nr;
                let j0 = j0 as isize;
                let a = self.node(i0, j0, k) * (1.0 - ty) + self.node(i0, j0 + 1, k) * ty;
                let b = self.node(i1, j0, k) * (1.0 - ty) + self.node(i1, j0 + 1, k) * ty;
                a * (1.0 - tx) + b * tx
            }
            Interpolation::Bicubic => {
                let wx = cubic_weights(tx);
                let wy = cubic_weights(ty);
                let mut acc = 0.0;
                for (a, wxa) in wx.iter().enumerate() {
                    let ii = (i0 + nr + a - 1) % nr;
                    let mut col = 0.0;
                    for (b, wyb) in wy.iter().enumerate() {
                        col += wyb * self.node(ii, j0 as isize + b as isize - 1, k);
                    }
                    acc += wxa * col;
                }
                acc
            }
        }
    }
}

/// Lagrange weights on the nodes −1, 0, 1, 2 for a point at offset `t ∈ [0, 1]`.
#[inline]
fn cubic_weights(t: f64) -> [f64; 4] {
    let tm1 = t - 1.0;
    let tm2 = t - 2.0;
    let tp1 = t + 1.0;
    [-t * tm1 * tm2 / 6.0, tp1 * tm1 * tm2 / 2.0, -tp1 * t * tm2 / 2.0, tp1 * t * tm1 / 6.0]
}
