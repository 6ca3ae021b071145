//! Per-record measurements of the solver state.

pub mod energy;
pub mod fit;
pub mod nohair;
pub mod residuals;

pub use energy::energy_functionals;
pub use fit::{fit_decay_rate, fit_decay_rate_with, FitWindow, RateFit, MIN_FIT_SAMPLES};
pub use nohair::{lambda_infinity, nohair_distances};
pub use residuals::{constraint_residuals, eq4_residual, eq5_residual, lambda_ddot_backward};

use crate::evolution::{Model, Simulation};
use crate::fd::{periodic_first, periodic_second, sup_abs};
use crate::metric::MetricState;
use crate::phase_space::{rescale_fhat, support_radius_w, DistributionFn, MomentFields, PhaseSpaceGrid};

/// Column names of `timeseries.csv`, in order.
pub const COLUMNS: [&str; 24] = [
    "t",
    "sup_rho",
    "sup_p",
    "sup_j",
    "sup_q",
    "lambda_dot_dev",
    "mu_dot_dev",
    "emu_dev",
    "sup_mu_prime",
    "sup_rho_prime",
    "sup_lambda_prime",
    "sup_mu_pp",
    "support_wt",
    "E0",
    "tE0",
    "E1",
    "tE1",
    "eq4_residual",
    "eq5_residual",
    "nohair_g",
    "nohair_k",
    "fhat_delta",
    "sup_lambda_dot_prime",
    "sup_mu_dot_prime",
];

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub sup_rho: f64,
    pub sup_p: f64,
    pub sup_j: f64,
    pub sup_q: f64,
    /// `sup_r |λ̇ t − 1|`
    pub lambda_dot_dev: f64,
    /// `sup_r |μ̇ t + 1|`
    pub mu_dot_dev: f64,
    /// `sup_r |e^μ t √(Λ/3) − 1|`
    pub emu_dev: f64,
    pub sup_mu_prime: f64,
    pub sup_rho_prime: f64,
    pub sup_lambda_prime: f64,
    pub sup_mu_pp: f64,
    /// Largest occupied `|w|` times `t`.
    pub support_wt: f64,
    pub e0: f64,
    pub t_e0: f64,
    pub e1: f64,
    pub t_e1: f64,
    pub eq4_residual: f64,
    pub eq5_residual: Option<f64>,
    pub nohair_g: f64,
    pub nohair_k: f64,
    /// `‖f̂(t) − f̂(t_prev)‖_∞` against the previous record.
    pub fhat_delta: Option<f64>,
    pub sup_lambda_dot_prime: f64,
    pub sup_mu_dot_prime: f64,
}

impl DiagnosticsRecord {
    /// Values in [`COLUMNS`] order; absent entries are `None`.
    pub fn values(&self) -> [Option<f64>; 24] {
        [
            Some(self.t),
            Some(self.sup_rho),
            Some(self.sup_p),
            Some(self.sup_j),
            Some(self.sup_q),
            Some(self.lambda_dot_dev),
            Some(self.mu_dot_dev),
            Some(self.emu_dev),
            Some(self.sup_mu_prime),
            Some(self.sup_rho_prime),
            Some(self.sup_lambda_prime),
            Some(self.sup_mu_pp),
            Some(self.support_wt),
            Some(self.e0),
            Some(self.t_e0),
            Some(self.e1),
            Some(self.t_e1),
            Some(self.eq4_residual),
            self.eq5_residual,
            Some(self.nohair_g),
            Some(self.nohair_k),
            self.fhat_delta,
            Some(self.sup_lambda_dot_prime),
            Some(self.sup_mu_dot_prime),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().flatten().all(|v| v.is_finite())
    }
}

/// Inputs of [`record`] beyond the current state.
#[derive(Clone, Copy)]
pub struct RecordContext<'a> {
    pub model: &'a Model,
    pub grid: &'a PhaseSpaceGrid,
    /// Limit profile for the no-hair distances; the current snapshot is used when absent.
    pub lambda_inf: Option<&'a [f64]>,
    pub previous_f: Option<&'a DistributionFn>,
    pub lambda_ddot: Option<&'a [f64]>,
}

fn sup_dev(v: &[f64], g: impl Fn(f64) -> f64) -> f64 {
    v.iter().map(|&x| g(x).abs()).fold(0.0, f64::max)
}

/// Measures one state. Pure in its arguments.
pub fn record(ctx: &RecordContext, metric: &MetricState, f: &DistributionFn, moments: &MomentFields) -> DiagnosticsRecord {
    let t = metric.t;
    let grid = ctx.grid;
    let h = grid.dr();
    let cosmo = ctx.model.cosmo;
    let hub = (cosmo / 3.0).sqrt();
    let (e0, e1) = energy_functionals(f, grid);
    let (eq4, eq5) = constraint_residuals(cosmo, metric, moments, ctx.lambda_ddot);
    let own_inf;
    let lambda_inf = match ctx.lambda_inf {
        Some(l) => l,
        None => {
            own_inf = lambda_infinity(metric);
            &own_inf
        }
    };
    let (nohair_g, nohair_k) = nohair_distances(ctx.model.class, cosmo, metric, lambda_inf);
    let fhat_delta = ctx.previous_f.map(|prev| {
        let a = rescale_fhat(f, grid);
        let b = rescale_fhat(prev, grid);
        a.values.iter().zip(&b.values).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
    });
    DiagnosticsRecord {
        t,
        sup_rho: sup_abs(&moments.rho),
        sup_p: sup_abs(&moments.p),
        sup_j: sup_abs(&moments.j),
        sup_q: sup_abs(&moments.q),
        lambda_dot_dev: sup_dev(&metric.lambda_dot, |x| x * t - 1.0),
        mu_dot_dev: sup_dev(&metric.mu_dot, |x| x * t + 1.0),
        emu_dev: sup_dev(&metric.mu, |m| m.exp() * t * hub - 1.0),
        sup_mu_prime: sup_abs(&metric.mu_prime),
        sup_rho_prime: sup_abs(&periodic_first(&moments.rho, h)),
        sup_lambda_prime: sup_abs(&periodic_first(&metric.lambda, h)),
        sup_mu_pp: sup_abs(&periodic_second(&metric.mu, h)),
        support_wt: support_radius_w(f, grid) * t,
        e0,
        t_e0: t * e0,
        e1,
        t_e1: t * e1,
        eq4_residual: eq4,
        eq5_residual: eq5,
        nohair_g,
        nohair_k,
        fhat_delta,
        sup_lambda_dot_prime: sup_abs(&periodic_first(&metric.lambda_dot, h)),
        sup_mu_dot_prime: sup_abs(&periodic_first(&metric.mu_dot, h)),
    }
}

/// Accumulates records and the metric history along a run.
#[derive(Clone, Debug, Default)]
pub struct Recorder {
    pub records: Vec<DiagnosticsRecord>,
    /// Metric at every record time.
    pub metrics: Vec<MetricState>,
    /// `q` at every record time.
    pub q: Vec<Vec<f64>>,
    previous_f: Option<DistributionFn>,
}

impl Recorder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, sim: &Simulation) -> &DiagnosticsRecord {
        let n = self.metrics.len();
        let ldd = (n >= 2).then(|| {
            let a = &self.metrics[n - 2];
            let b = &self.metrics[n - 1];
            lambda_ddot_backward([(a.t, &a.lambda_dot), (b.t, &b.lambda_dot), (sim.metric.t, &sim.metric.lambda_dot)])
        });
        let ctx = RecordContext {
            model: &sim.model,
            grid: &sim.grid,
            lambda_inf: None,
            previous_f: self.previous_f.as_ref(),
            lambda_ddot: ldd.as_deref(),
        };
        let rec = record(&ctx, &sim.metric, &sim.f, &sim.moments);
        self.records.push(rec);
        self.metrics.push(sim.metric.clone());
        self.q.push(sim.moments.q.clone());
        self.previous_f = Some(sim.f.clone());
        self.records.last().expect("just pushed")
    }

    /// Recomputes the no-hair columns against `λ∞` from the last record.
    pub fn finalize_nohair(&mut self, model: &Model) {
        let Some(last) = self.metrics.last() else { return };
        let inf = lambda_infinity(last);
        for (rec, m) in self.records.iter_mut().zip(&self.metrics) {
            let (g, k) = nohair_distances(model.class, model.cosmo, m, &inf);
            rec.nohair_g = g;
            rec.nohair_k = k;
        }
    }

    /// `(t, value)` pairs of one column, skipping absent entries.
    pub fn series(&self, column: &str) -> Vec<(f64, f64)> {
        let Some(idx) = COLUMNS.iter().position(|c| *c == column) else { return Vec::new() };
        self.records.iter().filter_map(|r| r.values()[idx].map(|v| (r.t, v))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimConfig;

    #[test]
    fn vacuum_record() {
        let mut cfg = SimConfig { nr: 8, nw: 17, nf: 4, ..SimConfig::default() };
        cfg.init.f0 = 0.0;
        let sim = Simulation::new(&cfg).unwrap();
        let mut rec = Recorder::new();
        let r = rec.observe(&sim).clone();
        assert_eq!((r.sup_rho, r.sup_p, r.sup_j, r.sup_q), (0.0, 0.0, 0.0, 0.0));
        assert!(r.eq4_residual < 1e-14);
        assert_eq!(r.eq5_residual, None);
        assert_eq!(r.fhat_delta, None);
        assert!(r.emu_dev < 1e-15);
        assert!(r.is_finite());
    }

    #[test]
    fn homogeneous_record_has_flat_monitors() {
        let mut cfg = SimConfig { nr: 8, nw: 33, nf: 4, ..SimConfig::default() };
        cfg.init.amplitude = 0.0;
        let mut sim = Simulation::new(&cfg).unwrap();
        let mut rec = Recorder::new();
        for _ in 0..4 {
            rec.observe(&sim);
            let dt = sim.suggested_dt();
            sim.advance(dt).unwrap();
        }
        let r = rec.observe(&sim);
        for v in [r.sup_rho_prime, r.sup_lambda_prime, r.sup_mu_pp, r.sup_mu_prime, r.sup_lambda_dot_prime] {
            assert!(v <= 1e-10, "{v}");
        }
        assert!(r.eq5_residual.is_some());
    }

    #[test]
    fn record_is_pure() {
        let cfg = SimConfig { nr: 8, nw: 33, nf: 4, ..SimConfig::default() };
        let sim = Simulation::new(&cfg).unwrap();
        let ctx = RecordContext { model: &sim.model, grid: &sim.grid, lambda_inf: None, previous_f: None, lambda_ddot: None };
        let a = record(&ctx, &sim.metric, &sim.f, &sim.moments);
        let b = record(&ctx, &sim.metric, &sim.f, &sim.moments);
        assert_eq!(a, b);
    }
}
