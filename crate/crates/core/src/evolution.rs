//! Coupled time stepping of `(λ, μ, f)`.

use crate::config::{Interpolation, MetricVariables, SimConfig};
use crate::error::{Error, Result};
use crate::kinematics::SymmetryClass;
use crate::metric::MetricState;
use crate::phase_space::{build_initial_data, compute_moments, DistributionFn, MomentFields, PhaseSpaceGrid};
use crate::transport::{advect, coefficients, TransportCoefficients};

/// Physical parameters and scheme options shared by every step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Model {
    pub class: SymmetryClass,
    pub cosmo: f64,
    pub interp: Interpolation,
    pub variables: MetricVariables,
}

impl Model {
    pub fn from_config(cfg: &SimConfig) -> Self {
        Self {
            class: cfg.symmetry,
            cosmo: cfg.cosmological_constant,
            interp: cfg.interpolation,
            variables: cfg.variables,
        }
    }

    /// `o(t)` such that `λ − o` and `μ + o` are the stepped variables.
    fn offset(&self, t: f64) -> f64 {
        match self.variables {
            MetricVariables::Areal => 0.0,
            MetricVariables::Rescaled => t.ln(),
        }
    }

    /// Rate of `ln t` in the stepped variables.
    fn offset_rate(&self, t: f64) -> f64 {
        match self.variables {
            MetricVariables::Areal => 0.0,
            MetricVariables::Rescaled => 1.0 / t,
        }
    }
}

/// Result of one coupled step.
#[derive(Clone, Debug)]
pub struct StepOutput {
    pub metric: MetricState,
    pub f: DistributionFn,
    pub moments: MomentFields,
}

fn moments_of(f: &DistributionFn, grid: &PhaseSpaceGrid) -> MomentFields {
    if f.is_vacuum() {
        MomentFields::zeros(grid.nr, f.t)
    } else {
        compute_moments(f, grid)
    }
}

/// Heun updates of `x − sign·o(t)`, converted back to `x` at `t1`.
struct Stepper<'a> {
    model: &'a Model,
    t0: f64,
    t1: f64,
    dt: f64,
}

impl Stepper<'_> {
    fn euler(&self, x: &[f64], rate: &[f64], sign: f64) -> Vec<f64> {
        let (o0, o1) = (self.model.offset(self.t0), self.model.offset(self.t1));
        let s0 = self.model.offset_rate(self.t0);
        x.iter().zip(rate).map(|(x, r)| (x - sign * o0) + self.dt * (r - sign * s0) + sign * o1).collect()
    }

    fn trapezoid(&self, x: &[f64], r0: &[f64], r1: &[f64], sign: f64) -> Vec<f64> {
        let (o0, o1) = (self.model.offset(self.t0), self.model.offset(self.t1));
        let (s0, s1) = (self.model.offset_rate(self.t0), self.model.offset_rate(self.t1));
        x.iter()
            .zip(r0)
            .zip(r1)
            .map(|((x, a), c)| (x - sign * o0) + 0.5 * self.dt * ((a - sign * s0) + (c - sign * s1)) + sign * o1)
            .collect()
    }
}

/// One Heun step from `metric.t` to `metric.t + dt`.
///
/// `metric` must carry rates consistent with the moments of `f`.
pub fn step(
    model: &Model,
    grid: &PhaseSpaceGrid,
    metric: &MetricState,
    f: &DistributionFn,
    dt: f64,
) -> Result<StepOutput> {
    let t0 = metric.t;
    if dt == 0.0 {
        return Ok(StepOutput { metric: metric.clone(), f: f.clone(), moments: moments_of(f, grid) });
    }
    let t1 = t0 + dt;
    let blow_up = || Error::BlowUp { last_good_t: t0 };

    let heun = Stepper { model, t0, t1, dt };

    // predictor
    let lambda_p = heun.euler(&metric.lambda, &metric.lambda_dot, 1.0);
    let mu_p = heun.euler(&metric.mu, &metric.mu_dot, -1.0);

    let vacuum = f.is_vacuum();
    let (f_new, m_new) = if vacuum {
        (DistributionFn::zeros(grid, t1), MomentFields::zeros(grid.nr, t1))
    } else {
        let c_now = coefficients(metric, grid);
        let frozen = TransportCoefficients { t: t1, ..c_now.clone() };
        let f_pred = advect(f, grid, &c_now, &frozen, model.interp);
        let m_pred = compute_moments(&f_pred, grid);
        let metric_pred = MetricState::with_rates(model.class, model.cosmo, t1, lambda_p.clone(), mu_p.clone(), &m_pred);
        if !metric_pred.is_finite() {
            return Err(blow_up());
        }
        let c_next = coefficients(&metric_pred, grid);
        let f_new = advect(f, grid, &c_now, &c_next, model.interp);
        let m_new = compute_moments(&f_new, grid);
        (f_new, m_new)
    };

    // corrector
    let pred = MetricState::with_rates(model.class, model.cosmo, t1, lambda_p, mu_p, &m_new);
    let lambda = heun.trapezoid(&metric.lambda, &metric.lambda_dot, &pred.lambda_dot, 1.0);
    let mu = heun.trapezoid(&metric.mu, &metric.mu_dot, &pred.mu_dot, -1.0);
    let metric_new = MetricState::with_rates(model.class, model.cosmo, t1, lambda, mu, &m_new);
    if !metric_new.is_finite() || !f_new.is_finite() {
        return Err(blow_up());
    }
    Ok(StepOutput { metric: metric_new, f: f_new, moments: m_new })
}

/// `cfl · min(Δr / max|α|, Δu / max|d(tw)/dt|, dt_cap · t)`.
pub fn cfl_time_step(metric: &MetricState, grid: &PhaseSpaceGrid, f: &DistributionFn, cfl: f64, dt_cap: f64) -> f64 {
    let cap = dt_cap * metric.t;
    if f.is_vacuum() {
        return cfl * cap;
    }
    let c = coefficients(metric, grid);
    let (a, u) = c.max_speeds(grid);
    let mut dt = cap;
    if a > 0.0 {
        dt = dt.min(grid.dr() / a);
    }
    if u > 0.0 {
        dt = dt.min(grid.du() / u);
    }
    cfl * dt
}

/// Full solver state together with its configuration.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub model: Model,
    pub grid: PhaseSpaceGrid,
    pub cfl: f64,
    pub dt_cap: f64,
    pub metric: MetricState,
    pub f: DistributionFn,
    pub moments: MomentFields,
    pub steps: usize,
}

impl Simulation {
    /// Initial state at `t0`: `μ̊` takes its de Sitter value, `λ̊ = init.lambda0`.
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        let cfg = cfg.clone().validated()?;
        let grid = PhaseSpaceGrid::from_config(&cfg);
        let f = build_initial_data(&cfg, &grid)?;
        Self::from_initial(&cfg, grid, f)
    }

    /// Initial state with caller-supplied `f` on `grid`.
    pub fn from_initial(cfg: &SimConfig, grid: PhaseSpaceGrid, f: DistributionFn) -> Result<Self> {
        let model = Model::from_config(cfg);
        let t0 = cfg.t0;
        let mu0 = -0.5 * (cfg.cosmological_constant * t0 * t0 / 3.0).ln();
        let moments = moments_of(&f, &grid);
        let metric = MetricState::with_rates(
            model.class,
            model.cosmo,
            t0,
            vec![cfg.init.lambda0; grid.nr],
            vec![mu0; grid.nr],
            &moments,
        );
        Ok(Self { model, grid, cfl: cfg.cfl, dt_cap: cfg.dt_cap, metric, f, moments, steps: 0 })
    }

    pub fn t(&self) -> f64 {
        self.metric.t
    }

    pub fn suggested_dt(&self) -> f64 {
        cfl_time_step(&self.metric, &self.grid, &self.f, self.cfl, self.dt_cap)
    }

    pub fn advance(&mut self, dt: f64) -> Result<()> {
        let out = step(&self.model, &self.grid, &self.metric, &self.f, dt)?;
        self.metric = out.metric;
        self.f = out.f;
        self.moments = out.moments;
        self.steps += 1;
        Ok(())
    }

    /// Steps until `t_end`, clipping the last step to land on it exactly.
    ///
    /// `observe` runs after every step.
    pub fn run_until(&mut self, t_end: f64, mut observe: impl FnMut(&Simulation) -> Result<()>) -> Result<()> {
        while self.t() < t_end {
            let mut dt = self.suggested_dt();
            let last = self.t() + dt >= t_end * (1.0 - 1e-14);
            if last {
                dt = t_end - self.t();
            }
            self.advance(dt)?;
            if last {
                self.metric.t = t_end;
                self.f.t = t_end;
                self.moments.t = t_end;
            }
            observe(self)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::{periodic_first, sup_abs};
    use crate::metric::DeSitterVacuum;

    fn vacuum_cfg(t_end: f64, cfl: f64) -> SimConfig {
        let mut cfg = SimConfig { t_end, cfl, nr: 8, nw: 17, nf: 4, variables: MetricVariables::Areal, ..SimConfig::default() };
        cfg.init.f0 = 0.0;
        cfg
    }

    fn vacuum_error(cfl: f64) -> f64 {
        let cfg = vacuum_cfg(20.0, cfl);
        let mut sim = Simulation::new(&cfg).unwrap();
        sim.run_until(cfg.t_end, |_| Ok(())).unwrap();
        let exact = DeSitterVacuum::new(3.0, 1.0, 0.0).exp_2mu(cfg.t_end);
        ((2.0 * sim.metric.mu[0]).exp() - exact).abs() / exact
    }

    #[test]
    fn vacuum_follows_de_sitter_at_second_order() {
        let e = [vacuum_error(0.5), vacuum_error(0.25), vacuum_error(0.125)];
        assert!((e[0] / e[1]).log2() > 1.9, "{e:?}");
        assert!((e[1] / e[2]).log2() > 1.9, "{e:?}");
    }

    #[test]
    fn rescaled_variables_keep_de_sitter_exact() {
        let cfg = SimConfig { variables: MetricVariables::Rescaled, ..vacuum_cfg(50.0, 0.5) };
        let mut sim = Simulation::new(&cfg).unwrap();
        sim.run_until(cfg.t_end, |_| Ok(())).unwrap();
        let exact = DeSitterVacuum::new(3.0, 1.0, 0.0);
        let e2 = (2.0 * sim.metric.mu[0]).exp();
        assert!((e2 / exact.exp_2mu(50.0) - 1.0).abs() < 1e-13);
        assert!((sim.metric.lambda[0] - exact.lambda(50.0)).abs() < 1e-13);
    }

    #[test]
    fn zero_step_is_identity() {
        let cfg = SimConfig { nr: 8, nw: 17, nf: 4, ..SimConfig::default() };
        let sim = Simulation::new(&cfg).unwrap();
        let out = step(&sim.model, &sim.grid, &sim.metric, &sim.f, 0.0).unwrap();
        assert_eq!(out.metric, sim.metric);
        assert_eq!(out.f, sim.f);
    }

    #[test]
    fn run_lands_on_end_time() {
        let cfg = vacuum_cfg(3.3, 0.5);
        let mut sim = Simulation::new(&cfg).unwrap();
        let mut last = 0.0;
        sim.run_until(3.3, |s| {
            assert!(s.t() > last);
            last = s.t();
            Ok(())
        })
        .unwrap();
        assert_eq!(sim.t(), 3.3);
    }

    #[test]
    fn homogeneous_data_stays_homogeneous() {
        let mut cfg = SimConfig { nr: 8, nw: 33, nf: 4, ..SimConfig::default() };
        cfg.init.amplitude = 0.0;
        let mut sim = Simulation::new(&cfg).unwrap();
        for _ in 0..100 {
            let dt = sim.suggested_dt();
            sim.advance(dt).unwrap();
        }
        let h = sim.grid.dr();
        assert!(sup_abs(&periodic_first(&sim.metric.lambda, h)) < 1e-12);
        assert!(sup_abs(&periodic_first(&sim.metric.mu, h)) < 1e-12);
        assert!(sup_abs(&sim.metric.mu_prime) < 1e-12);
    }

    #[test]
    fn nonfinite_state_signals_blow_up() {
        let cfg = vacuum_cfg(2.0, 0.5);
        let mut sim = Simulation::new(&cfg).unwrap();
        sim.metric.mu[3] = f64::NAN;
        sim.metric.mu_dot[3] = f64::NAN;
        match sim.advance(0.01) {
            Err(Error::BlowUp { last_good_t }) => assert_eq!(last_good_t, 1.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn time_step_respects_hubble_cap() {
        let cfg = SimConfig { nr: 16, nw: 33, nf: 4, ..SimConfig::default() };
        let sim = Simulation::new(&cfg).unwrap();
        let dt = sim.suggested_dt();
        assert!(dt > 0.0 && dt <= 0.5 * 0.05 * sim.t() + 1e-15);
    }
}
