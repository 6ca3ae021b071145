//! Discrete distribution function `f(t, r, w, F)` and everything computed
//! directly from it: initial data, moments, support, the rescaled `f̂` and
//! the weighted Sobolev distance.
//!
//! The momentum axis is stored in the comoving variable `u = t w`. At time
//! `t` the `w`-nodes are `u_j / t`, so at the reference time the grid is the
//! uniform `[−w_max, w_max]` grid and afterwards it contracts with the
//! support of `f`, which shrinks like `1/t`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::fd::{derivative_axis, Dims3};
use crate::kinematics::energy_factor_unchecked;

/// Relative level below which node values are treated as rounding debris.
pub const SUPPORT_THRESHOLD: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceGrid {
    pub nr: usize,
    pub nw: usize,
    pub nf: usize,
    /// Momentum half-width at `t_ref`.
    pub w_max: f64,
    pub f_max: f64,
    /// Time at which the `w`-nodes span exactly `[−w_max, w_max]`.
    pub t_ref: f64,
}

impl PhaseSpaceGrid {
    pub fn new(nr: usize, nw: usize, nf: usize, w_max: f64, f_max: f64, t_ref: f64) -> Self {
        assert!(nr >= 1 && nw >= 3 && nf >= 1, "grid too small");
        Self { nr, nw, nf, w_max, f_max, t_ref }
    }

    pub fn from_config(cfg: &SimConfig) -> Self {
        Self::new(cfg.nr, cfg.nw, cfg.nf, cfg.w_max, cfg.f_max, cfg.t0)
    }

    pub fn dims(&self) -> Dims3 {
        Dims3 { n0: self.nr, n1: self.nw, n2: self.nf }
    }

    pub fn len(&self) -> usize {
        self.nr * self.nw * self.nf
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.nw + j) * self.nf + k
    }

    pub fn dr(&self) -> f64 {
        1.0 / self.nr as f64
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        i as f64 / self.nr as f64
    }

    pub fn u_max(&self) -> f64 {
        self.w_max * self.t_ref
    }

    pub fn du(&self) -> f64 {
        2.0 * self.u_max() / (self.nw - 1) as f64
    }

    /// Comoving node `u_j`; exactly antisymmetric under `j → nw − 1 − j`.
    #[inline]
    pub fn u(&self, j: usize) -> f64 {
        (2.0 * j as f64 - (self.nw - 1) as f64) * 0.5 * self.du()
    }

    #[inline]
    pub fn w(&self, j: usize, t: f64) -> f64 {
        self.u(j) / t
    }

    pub fn dw(&self, t: f64) -> f64 {
        self.du() / t
    }

    pub fn w_extent(&self, t: f64) -> f64 {
        self.u_max() / t
    }

    pub fn df(&self) -> f64 {
        self.f_max / self.nf as f64
    }

    /// Midpoint node `F_k`, strictly positive.
    #[inline]
    pub fn f(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.df()
    }

    /// Trapezoid weight factor of the `w`-node.
    #[inline]
    pub fn w_weight(&self, j: usize) -> f64 {
        if j == 0 || j == self.nw - 1 {
            0.5
        } else {
            1.0
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.nr == other.nr
            && self.nw == other.nw
            && self.nf == other.nf
            && self.w_max == other.w_max
            && self.f_max == other.f_max
            && self.t_ref == other.t_ref
    }

    /// Grid with every spacing halved `levels` times; coarse nodes stay nodes.
    pub fn refined(&self, levels: u32) -> Self {
        let s = 1usize << levels;
        Self { nr: self.nr * s, nw: (self.nw - 1) * s + 1, ..self.clone() }
    }
}

/// Node values of `f`, row-major in `(r, w, F)`, at areal time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionFn {
    pub values: Vec<f64>,
    pub t: f64,
}

impl DistributionFn {
    pub fn zeros(grid: &PhaseSpaceGrid, t: f64) -> Self {
        Self { values: vec![0.0; grid.len()], t }
    }

    pub fn from_fn(grid: &PhaseSpaceGrid, t: f64, mut g: impl FnMut(f64, f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nr {
            for j in 0..grid.nw {
                for k in 0..grid.nf {
                    values.push(g(grid.r(i), grid.w(j, t), grid.f(k)));
                }
            }
        }
        Self { values, t }
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_vacuum(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Largest value on the first and last `w` rows.
    pub fn boundary_sup(&self, grid: &PhaseSpaceGrid) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..grid.nr {
            for j in [0, grid.nw - 1] {
                for k in 0..grid.nf {
                    m = m.max(self.values[grid.idx(i, j, k)].abs());
                }
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentFields {
    pub rho: Vec<f64>,
    pub p: Vec<f64>,
    pub j: Vec<f64>,
    pub q: Vec<f64>,
    pub t: f64,
}

impl MomentFields {
    pub fn zeros(n: usize, t: f64) -> Self {
        Self { rho: vec![0.0; n], p: vec![0.0; n], j: vec![0.0; n], q: vec![0.0; n], t }
    }
}

/// Smooth compactly supported even profile `(1 − x²)³` on `|x| < 1`.
#[inline]
pub fn bump(x: f64) -> f64 {
    let s = 1.0 - x * x;
    if s > 0.0 {
        s * s * s
    } else {
        0.0
    }
}

/// Initial distribution `f0 · bump(w/w_sup) · bump(F/F_sup) · (1 + A cos 2πr)`.
///
/// Even in `w`, so the initial current vanishes and the momentum constraint
/// holds with a constant μ.
pub fn build_initial_data(cfg: &SimConfig, grid: &PhaseSpaceGrid) -> Result<DistributionFn> {
    let init = &cfg.init;
    if !(init.amplitude > -1.0) {
        return Err(Error::Domain(format!("modulation A = {} would make f negative", init.amplitude)));
    }
    if !(init.f0 >= 0.0) {
        return Err(Error::Domain(format!("f0 = {} is negative", init.f0)));
    }
    let t0 = cfg.t0;
    Ok(DistributionFn::from_fn(grid, t0, |r, w, f| {
        init.f0 * bump(w / init.w_sup) * bump(f / init.f_sup) * (1.0 + init.amplitude * (2.0 * PI * r).cos())
    }))
}

/// Moments ρ, p, j, q by trapezoid-in-`w` × midpoint-in-`F` quadrature at each `r`-node.
pub fn compute_moments(f: &DistributionFn, grid: &PhaseSpaceGrid) -> MomentFields {
    let t = f.t;
    let dw = grid.dw(t);
    let df = grid.df();
    let cell = dw * df;
    let t2 = t * t;
    let per_r: Vec<[f64; 4]> = (0..grid.nr)
        .into_par_iter()
        .map(|i| {
            let (mut rho, mut p, mut q, mut j_sum) = (0.0, 0.0, 0.0, 0.0);
            let slab = &f.values[grid.idx(i, 0, 0)..grid.idx(i, 0, 0) + grid.nw * grid.nf];
            for jw in 0..grid.nw {
                let w = grid.w(jw, t);
                let c = grid.w_weight(jw);
                for k in 0..grid.nf {
                    let fv = slab[jw * grid.nf + k];
                    if fv == 0.0 {
                        continue;
                    }
                    let big_f = grid.f(k);
                    let v = energy_factor_unchecked(t, w, big_f);
                    rho += c * v * fv;
                    p += c * w * w / v * fv;
                    q += c * big_f / v * fv;
                }
            }
            // odd integrand: pair mirrored nodes so even data cancels exactly
            for jw in 0..grid.nw / 2 {
                let mirror = grid.nw - 1 - jw;
                let w = grid.w(jw, t);
                let c = grid.w_weight(jw);
                for k in 0..grid.nf {
                    let diff = slab[jw * grid.nf + k] - slab[mirror * grid.nf + k];
                    j_sum += c * w * diff;
                }
            }
            [PI / t2 * rho * cell, PI / t2 * p * cell, PI / t2 * j_sum * cell, PI / (t2 * t2) * q * cell]
        })
        .collect();
    let mut m = MomentFields::zeros(grid.nr, t);
    for (i, v) in per_r.into_iter().enumerate() {
        m.rho[i] = v[0];
        m.p[i] = v[1];
        m.j[i] = v[2];
        m.q[i] = v[3];
    }
    m
}

/// Largest `|w_j|` carrying a value above `1e-14 · max f`; 0 for vacuum.
pub fn support_radius_w(f: &DistributionFn, grid: &PhaseSpaceGrid) -> f64 {
    let max = f.sup();
    if max == 0.0 {
        return 0.0;
    }
    let cut = SUPPORT_THRESHOLD * max;
    let mut radius = 0.0_f64;
    for i in 0..grid.nr {
        for j in 0..grid.nw {
            let w = grid.w(j, f.t).abs();
            if w <= radius {
                continue;
            }
            let row = grid.idx(i, j, 0);
            if f.values[row..row + grid.nf].iter().any(|&v| v > cut) {
                radius = w;
            }
        }
    }
    radius
}

/// Samples `f̂(t, r, u, F) = f(t, r, u/t, F)` at the given `u`-nodes by
/// linear interpolation in `w`, zero outside the stored `w` range.
///
/// Returns a row-major `(r, u, F)` array with `u_nodes.len()` columns.
pub fn rescale_fhat_onto(f: &DistributionFn, grid: &PhaseSpaceGrid, u_nodes: &[f64]) -> Vec<f64> {
    let t = f.t;
    let dw = grid.dw(t);
    let w0 = grid.w(0, t);
    let nu = u_nodes.len();
    let mut out = vec![0.0; grid.nr * nu * grid.nf];
    for (m, &u) in u_nodes.iter().enumerate() {
        let x = (u / t - w0) / dw;
        if !(x >= 0.0 && x <= (grid.nw - 1) as f64) {
            continue;
        }
        let j = (x.floor() as usize).min(grid.nw - 2);
        let th = x - j as f64;
        for i in 0..grid.nr {
            for k in 0..grid.nf {
                let a = f.values[grid.idx(i, j, k)];
                let b = f.values[grid.idx(i, j + 1, k)];
                out[(i * nu + m) * grid.nf + k] = if th == 0.0 { a } else { (1.0 - th) * a + th * b };
            }
        }
    }
    out
}

/// `f̂` on the grid's own comoving nodes `u_j`.
///
/// The stored nodes are `w_j = u_j / t`, so this is an exact copy.
pub fn rescale_fhat(f: &DistributionFn, grid: &PhaseSpaceGrid) -> DistributionFn {
    debug_assert_eq!(f.values.len(), grid.len());
    f.clone()
}

/// Discrete `‖f1 − f2‖_{H^l_z}` over `(r, w, F)`.
///
/// Sums weighted squared finite-difference derivatives `∂_r^a ∂_w^{b1} ∂_F^{b2}`
/// with `a + b1 + b2 ≤ l` and weight `(1 + w² + F)^{z + b1 + b2}`.
pub fn weighted_sobolev_distance(
    f1: &DistributionFn,
    f2: &DistributionFn,
    grid: &PhaseSpaceGrid,
    l: usize,
    z: f64,
) -> Result<f64> {
    if l > 4 {
        return Err(Error::Domain(format!("Sobolev order l = {l} exceeds the supported depth 4")));
    }
    if f1.values.len() != grid.len() || f2.values.len() != grid.len() {
        return Err(Error::Incompatible("distribution does not match the grid".into()));
    }
    if f1.t != f2.t {
        return Err(Error::Incompatible(format!("snapshots at different times {} and {}", f1.t, f2.t)));
    }
    let t = f1.t;
    let diff: Vec<f64> = f1.values.iter().zip(&f2.values).map(|(a, b)| a - b).collect();
    Ok(weighted_sobolev_norm(&diff, grid, t, l, z))
}

pub(crate) fn weighted_sobolev_norm(data: &[f64], grid: &PhaseSpaceGrid, t: f64, l: usize, z: f64) -> f64 {
    let dims = grid.dims();
    let (dr, dw, df) = (grid.dr(), grid.dw(t), grid.df());
    let cell = dr * dw * df;
    let base_weight: Vec<f64> = (0..grid.nw)
        .flat_map(|j| {
            let w = grid.w(j, t);
            (0..grid.nf).map(move |k| 1.0 + w * w + grid.f(k))
        })
        .collect();
    let mut total = 0.0;
    let mut r_deriv = data.to_vec();
    for a in 0..=l {
        let mut w_deriv = r_deriv.clone();
        for bw in 0..=(l - a) {
            let mut f_deriv = w_deriv.clone();
            for bf in 0..=(l - a - bw) {
                let expo = z + (bw + bf) as f64;
                let mut s = 0.0;
                for i in 0..grid.nr {
                    for j in 0..grid.nw {
                        let c = grid.w_weight(j);
                        for k in 0..grid.nf {
                            let g = f_deriv[dims.at(i, j, k)];
                            if g != 0.0 {
                                s += c * base_weight[j * grid.nf + k].powf(expo) * g * g;
                            }
                        }
                    }
                }
                total += s * cell;
                if bf < l - a - bw {
                    f_deriv = derivative_axis(&f_deriv, dims, 2, df, false);
                }
            }
            if bw < l - a {
                w_deriv = derivative_axis(&w_deriv, dims, 1, dw, false);
            }
        }
        if a < l {
            r_deriv = derivative_axis(&r_deriv, dims, 0, dr, true);
        }
    }
    total.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimConfig;
    use proptest::prelude::*;

    fn small_grid() -> PhaseSpaceGrid {
        PhaseSpaceGrid::new(8, 33, 6, 0.5, 1.0, 1.0)
    }

    #[test]
    fn grid_geometry() {
        let g = PhaseSpaceGrid::new(16, 128, 8, 0.5, 1.0, 1.0);
        assert_eq!(g.dr(), 1.0 / 16.0);
        assert!((g.w(0, 1.0) + 0.5).abs() < 1e-15);
        assert!((g.w(127, 1.0) - 0.5).abs() < 1e-15);
        for j in 0..128 {
            assert_eq!(g.u(j), -g.u(127 - j));
        }
        assert!((0..8).all(|k| g.f(k) > 0.0));
        assert!((g.w_extent(4.0) - 0.125).abs() < 1e-15);
        let fine = g.refined(1);
        assert_eq!((fine.nr, fine.nw), (32, 255));
        assert_eq!(fine.u(2 * 5), g.u(5));
    }

    #[test]
    fn zero_data_is_vacuum() {
        let mut cfg = SimConfig::default();
        cfg.init.f0 = 0.0;
        let g = PhaseSpaceGrid::from_config(&cfg);
        let f = build_initial_data(&cfg, &g).unwrap();
        assert!(f.is_vacuum());
        let m = compute_moments(&f, &g);
        for v in [&m.rho, &m.p, &m.j, &m.q] {
            assert!(v.iter().all(|&x| x == 0.0));
        }
        assert_eq!(support_radius_w(&f, &g), 0.0);
    }

    #[test]
    fn initial_data_rejects_negative_modulation() {
        let mut cfg = SimConfig::default();
        cfg.init.amplitude = -1.0;
        let g = PhaseSpaceGrid::from_config(&cfg);
        assert!(build_initial_data(&cfg, &g).is_err());
    }

    #[test]
    fn initial_current_vanishes() {
        let mut cfg = SimConfig::default();
        cfg.init.amplitude = 0.3;
        cfg.init.f0 = 1e-3;
        let g = PhaseSpaceGrid::from_config(&cfg);
        let f = build_initial_data(&cfg, &g).unwrap();
        let m = compute_moments(&f, &g);
        assert!(crate::fd::sup_abs(&m.j) <= 1e-12);
        assert!(m.rho.iter().all(|&x| x > 0.0));
        assert_eq!(f.boundary_sup(&g), 0.0);
    }

    #[test]
    fn homogeneous_data_has_flat_moments() {
        let mut cfg = SimConfig::default();
        cfg.init.amplitude = 0.0;
        let g = PhaseSpaceGrid::from_config(&cfg);
        let f = build_initial_data(&cfg, &g).unwrap();
        let m = compute_moments(&f, &g);
        let spread = m.rho.iter().fold(0.0_f64, |a, &x| a.max((x - m.rho[0]).abs()));
        assert!(spread <= 1e-15 * m.rho[0].abs().max(1.0));
    }

    #[test]
    fn support_radius_of_initial_bump() {
        let cfg = SimConfig::default();
        let g = PhaseSpaceGrid::from_config(&cfg);
        let f = build_initial_data(&cfg, &g).unwrap();
        let s = support_radius_w(&f, &g);
        assert!((s - cfg.init.w_sup).abs() <= g.dw(cfg.t0), "{s}");
    }

    fn indicator_moment_oracle(w_half: f64, f1: f64, f0: f64) -> f64 {
        // ∫√(a+F)dF = (2/3)(a+F)^{3/2}; remaining w-integral by composite Simpson
        let g = |w: f64| {
            let a = 1.0 + w * w;
            2.0 / 3.0 * ((a + f1).powf(1.5) - a.powf(1.5))
        };
        let n = 20_000;
        let h = 2.0 * w_half / n as f64;
        let mut s = g(-w_half) + g(w_half);
        for m in 1..n {
            let w = -w_half + m as f64 * h;
            s += if m % 2 == 1 { 4.0 } else { 2.0 } * g(w);
        }
        PI * f0 * s * h / 3.0
    }

    #[test]
    fn energy_density_of_box_matches_closed_form() {
        // indicator over nodes |w_j| ≤ w1 is the midpoint rule on [−w1 − Δw/2, w1 + Δw/2]
        let g = PhaseSpaceGrid::new(2, 401, 40, 0.5, 1.0, 1.0);
        let dw = g.dw(1.0);
        let j_half = 120;
        let w1 = g.w(200 + j_half, 1.0);
        let f1 = 0.5; // 20 full midpoint cells
        let f0 = 2.0;
        let f = DistributionFn::from_fn(&g, 1.0, |_, w, big_f| {
            if w.abs() <= w1 + 1e-12 && big_f < f1 {
                f0
            } else {
                0.0
            }
        });
        let m = compute_moments(&f, &g);
        let exact = indicator_moment_oracle(w1 + 0.5 * dw, f1, f0);
        let rel = (m.rho[0] - exact).abs() / exact;
        assert!(rel < 1e-4, "rel = {rel:e}");
    }

    #[test]
    fn quadrature_is_second_order_on_smooth_profile() {
        let profile = |_r: f64, w: f64, big_f: f64| (-(w * w) / 0.02).exp() * (-(big_f - 0.5).powi(2) / 0.05).exp();
        let rho_at = |nw: usize, nf: usize| {
            let g = PhaseSpaceGrid::new(1, nw, nf, 0.5, 1.0, 1.0);
            compute_moments(&DistributionFn::from_fn(&g, 1.0, profile), &g).rho[0]
        };
        // fixed Nw so the F-quadrature order is isolated; w trapezoid is spectral here
        let a = rho_at(257, 16);
        let b = rho_at(257, 32);
        let c = rho_at(257, 64);
        let order = ((a - b) / (b - c)).abs().log2();
        assert!(order >= 1.9, "observed order {order}");
    }

    #[test]
    fn fhat_rescaling() {
        let g = PhaseSpaceGrid::new(3, 41, 2, 1.0, 1.0, 2.0);
        // stored at t = 2 where the w-nodes span [−1, 1]
        let lin = |w: f64| 3.0 + w;
        let f = DistributionFn::from_fn(&g, 2.0, |_, w, _| lin(w));
        let u_nodes: Vec<f64> = (0..11).map(|m| -1.5 + 0.3 * m as f64).collect();
        let fh = rescale_fhat_onto(&f, &g, &u_nodes);
        for (m, &u) in u_nodes.iter().enumerate() {
            assert!((fh[(11 + m) * 2] - lin(u / 2.0)).abs() < 1e-12);
        }
        // at t = t_ref = 1 the transform is the identity
        let g1 = PhaseSpaceGrid::new(3, 41, 2, 1.0, 1.0, 1.0);
        let f1 = DistributionFn::from_fn(&g1, 1.0, |r, w, x| r + w * w + x);
        assert_eq!(rescale_fhat(&f1, &g1).values, f1.values);
    }

    #[test]
    fn sobolev_distance_box_oracle() {
        let g = small_grid();
        let t = 1.0;
        let f1 = DistributionFn::from_fn(&g, t, |r, w, x| bump(w / 0.4) * bump(x) * (1.0 + r));
        let delta = 0.1;
        let in_box = |i: usize, j: usize, k: usize| (2..5).contains(&i) && (10..20).contains(&j) && (1..4).contains(&k);
        let mut f2 = f1.clone();
        let mut oracle = 0.0;
        let z = 3.0;
        let cell = g.dr() * g.dw(t) * g.df();
        for i in 0..g.nr {
            for j in 0..g.nw {
                for k in 0..g.nf {
                    if in_box(i, j, k) {
                        f2.values[g.idx(i, j, k)] += delta;
                        let w = g.w(j, t);
                        oracle += (1.0 + w * w + g.f(k)).powf(z) * cell;
                    }
                }
            }
        }
        let d = weighted_sobolev_distance(&f1, &f2, &g, 0, z).unwrap();
        assert!((d - delta * oracle.sqrt()).abs() < 1e-12, "{d}");
        assert_eq!(weighted_sobolev_distance(&f1, &f1, &g, 4, z).unwrap(), 0.0);
        assert!(weighted_sobolev_distance(&f1, &f2, &g, 5, z).is_err());
    }

    proptest! {
        #[test]
        fn moments_are_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, s1 in 0.1f64..0.45, s2 in 0.1f64..0.45) {
            let g = small_grid();
            let f1 = DistributionFn::from_fn(&g, 1.7, |r, w, x| bump(w / s1) * bump(x) * (1.0 + 0.5 * (2.0 * PI * r).sin()));
            let f2 = DistributionFn::from_fn(&g, 1.7, |r, w, x| bump((w - 0.05) / s2) * (x + r));
            let comb = DistributionFn {
                values: f1.values.iter().zip(&f2.values).map(|(x, y)| a * x + b * y).collect(),
                t: 1.7,
            };
            let (m1, m2, mc) = (compute_moments(&f1, &g), compute_moments(&f2, &g), compute_moments(&comb, &g));
            for i in 0..g.nr {
                for (x, y, c) in [(&m1.rho, &m2.rho, &mc.rho), (&m1.p, &m2.p, &mc.p), (&m1.j, &m2.j, &mc.j), (&m1.q, &m2.q, &mc.q)] {
                    let expect = a * x[i] + b * y[i];
                    prop_assert!((c[i] - expect).abs() <= 1e-12 * (1.0 + x[i].abs() + y[i].abs()));
                }
            }
        }

        #[test]
        fn even_data_has_zero_current(s in 0.05f64..0.5, amp in 0.0f64..0.9, t in 0.5f64..20.0) {
            let g = small_grid();
            let f = DistributionFn::from_fn(&g, t, |r, w, x| bump(w * t / s) * (2.0 - x) * (1.0 + amp * (2.0 * PI * r).cos()));
            let m = compute_moments(&f, &g);
            prop_assert!(m.j.iter().all(|&x| x == 0.0));
            for i in 0..g.nr {
                prop_assert!(m.rho[i] >= 0.0 && m.p[i] >= 0.0 && m.q[i] >= 0.0);
                prop_assert!(m.j[i].abs() <= m.rho[i]);
            }
        }

        #[test]
        fn current_bounded_by_density(c in -0.3f64..0.3, s in 0.05f64..0.3) {
            let g = small_grid();
            let f = DistributionFn::from_fn(&g, 1.0, |_, w, x| bump((w - c) / s) * bump(x));
            let m = compute_moments(&f, &g);
            for i in 0..g.nr {
                prop_assert!(m.j[i].abs() <= m.rho[i]);
            }
        }

        #[test]
        fn fhat_preserves_sign_and_sup(scale in 0.3f64..3.0, t in 0.5f64..4.0) {
            let g = small_grid();
            let f = DistributionFn::from_fn(&PhaseSpaceGrid { t_ref: 1.0, ..g.clone() }, t, |r, w, x| bump(w / 0.3) * (1.0 + r) * x);
            let u: Vec<f64> = (0..25).map(|m| (m as f64 - 12.0) * 0.02 * scale).collect();
            let fh = rescale_fhat_onto(&f, &g, &u);
            prop_assert!(fh.iter().all(|&v| v >= 0.0));
            prop_assert!(fh.iter().fold(0.0_f64, |a, &v| a.max(v)) <= f.sup() + 1e-15);
        }

        #[test]
        fn sobolev_distance_symmetric(seed in 0u64..1000) {
            let g = small_grid();
            let shift = (seed % 7) as f64 * 0.01;
            let f1 = DistributionFn::from_fn(&g, 1.0, |r, w, x| bump(w / 0.4) * bump(x) * (1.0 + r));
            let f2 = DistributionFn::from_fn(&g, 1.0, |r, w, x| bump((w - shift) / 0.4) * bump(x) * (1.0 + 0.5 * r));
            let d12 = weighted_sobolev_distance(&f1, &f2, &g, 2, 3.0).unwrap();
            let d21 = weighted_sobolev_distance(&f2, &f1, &g, 2, 3.0).unwrap();
            prop_assert!((d12 - d21).abs() <= 1e-12 * d12.max(1.0));
        }
    }
}
