//! Refinement studies: every level halves `Δr`, `Δw` and `dt`.

use std::path::Path;

use rayon::prelude::*;

use crate::config::{MetricVariables, SimConfig, Violation};
use crate::diagnostics::FitWindow;
use crate::error::{Error, Result};
use crate::harness::evolve::{run, RunOutput};
use crate::harness::io::{self, RunManifest, Termination};
use crate::kinematics::SymmetryClass;
use crate::phase_space::{bump, DistributionFn, PhaseSpaceGrid};
use crate::transport::{advect_flow, PhaseFlow};

pub const REPORT: &str = "convergence.csv";

/// `cfg` with every spacing halved `level` times. `NF` is kept: `F` is conserved along
/// characteristics, so the `F`-slices evolve independently.
pub fn refine(cfg: &SimConfig, level: u32) -> SimConfig {
    let s = 1usize << level;
    SimConfig {
        nr: cfg.nr * s,
        nw: (cfg.nw - 1) * s + 1,
        dt_cap: cfg.dt_cap / s as f64,
        ..cfg.clone()
    }
}

/// Errors per level and the observed orders `log₂(e_k / e_{k+1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct Study {
    pub name: String,
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
}

impl Study {
    pub fn new(name: impl Into<String>, errors: Vec<f64>) -> Self {
        let orders = errors.windows(2).map(|p| (p[0] / p[1]).log2()).collect();
        Self { name: name.into(), errors, orders }
    }

    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn finest_error(&self) -> f64 {
        self.errors.last().copied().unwrap_or(f64::NAN)
    }
}

fn check_levels(levels: usize) -> Result<()> {
    if levels < 3 {
        return Err(Error::Config(vec![Violation::TooFewLevels(levels)]));
    }
    Ok(())
}

fn run_levels(cfg: &SimConfig, levels: usize) -> Result<Vec<RunOutput>> {
    (0..levels as u32).into_par_iter().map(|l| run(&refine(cfg, l))).collect()
}

/// `cfg` without matter.
pub fn vacuum_of(cfg: &SimConfig) -> SimConfig {
    let mut v = cfg.clone();
    v.init.f0 = 0.0;
    v
}

/// `(max_r |e^{2μ} Λ t² / 3 − 1|, max_r |(λ − ln t) − (λ₀ − ln t₀)|)` at the end of a flat vacuum run.
pub fn de_sitter_errors(out: &RunOutput) -> (f64, f64) {
    let m = &out.sim.metric;
    let cfg = &out.config;
    let l0 = cfg.init.lambda0 - cfg.t0.ln();
    let emu = m.mu.iter().map(|mu| ((2.0 * mu).exp() * cfg.cosmological_constant * m.t * m.t / 3.0 - 1.0).abs()).fold(0.0, f64::max);
    let lam = m.lambda.iter().map(|l| (l - m.t.ln() - l0).abs()).fold(0.0, f64::max);
    (emu, lam)
}

/// Vacuum `e^{2μ}` and `λ − ln t` errors at `t_end`.
///
/// Against the closed form for `K = 0`; otherwise successive-level differences.
pub fn vacuum_study(cfg: &SimConfig, levels: usize, variables: MetricVariables) -> Result<[Study; 2]> {
    check_levels(levels)?;
    let base = SimConfig { variables, ..vacuum_of(cfg) };
    let runs = run_levels(&base, levels)?;
    let tag = variables.name();
    if cfg.symmetry == SymmetryClass::Plane {
        let (emu, lam): (Vec<f64>, Vec<f64>) = runs.iter().map(de_sitter_errors).unzip();
        Ok([Study::new(format!("vacuum_e2mu_{tag}"), emu), Study::new(format!("vacuum_lambda_{tag}"), lam)])
    } else {
        let diffs = |g: fn(&RunOutput) -> f64| -> Vec<f64> { runs.windows(2).map(|p| (g(&p[0]) - g(&p[1])).abs()).collect() };
        Ok([
            Study::new(format!("vacuum_e2mu_self_{tag}"), diffs(|o| (2.0 * o.sim.metric.mu[0]).exp())),
            Study::new(format!("vacuum_lambda_self_{tag}"), diffs(|o| o.sim.metric.lambda[0])),
        ])
    }
}

fn window_max(out: &RunOutput, window: FitWindow, column: &str) -> f64 {
    out.recorder.series(column).into_iter().filter(|(t, _)| window.contains(*t)).map(|p| p.1).fold(0.0, f64::max)
}

/// `f` of a level-`level` run on the level-0 nodes.
fn on_coarse_nodes(out: &RunOutput, base: &PhaseSpaceGrid, level: u32) -> Vec<f64> {
    let s = 1usize << level;
    let g = &out.sim.grid;
    let mut v = Vec::with_capacity(base.len());
    for i in 0..base.nr {
        for j in 0..base.nw {
            for k in 0..base.nf {
                v.push(out.sim.f.values[g.idx(i * s, j * s, k)]);
            }
        }
    }
    v
}

/// Constraint residuals (max over `window`) and `f` self-convergence for the configured physics.
pub fn matter_study(cfg: &SimConfig, levels: usize, window: FitWindow) -> Result<[Study; 3]> {
    check_levels(levels)?;
    let runs = run_levels(cfg, levels)?;
    let base = PhaseSpaceGrid::from_config(cfg);
    let eq4 = runs.iter().map(|o| window_max(o, window, "eq4_residual")).collect();
    let eq5 = runs.iter().map(|o| window_max(o, window, "eq5_residual")).collect();
    let coarse: Vec<Vec<f64>> = runs.iter().enumerate().map(|(l, o)| on_coarse_nodes(o, &base, l as u32)).collect();
    let f_self = coarse
        .windows(2)
        .map(|p| p[0].iter().zip(&p[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .collect();
    Ok([Study::new("eq4_residual", eq4), Study::new("eq5_residual", eq5), Study::new("f_self", f_self)])
}

struct Translation {
    r_speed: f64,
    w_speed: f64,
}

impl PhaseFlow for Translation {
    fn velocity(&self, _: f64, _: f64, _: f64, _: f64) -> (f64, f64) {
        (self.r_speed, self.w_speed)
    }
}

/// Max-norm error of transporting a smooth profile by a constant `(dr/dt, dw/dt)` against the exact shift.
pub fn advection_error(nr: usize, nw: usize, steps: usize, cfg: &SimConfig) -> f64 {
    let (t0, t1) = (1.0, 2.0);
    let grid = PhaseSpaceGrid::new(nr, nw, 4, 0.5, 1.0, t0);
    let flow = Translation { r_speed: 0.37, w_speed: 0.05 };
    let profile = |r: f64, w: f64| (1.0 + 0.5 * (std::f64::consts::TAU * r).sin()) * bump(w / 0.15);
    let mut f = DistributionFn::from_fn(&grid, t0, |r, w, _| profile(r, w));
    let dt = (t1 - t0) / steps as f64;
    for n in 1..=steps {
        f = advect_flow(&f, &grid, &flow, t0 + n as f64 * dt, cfg.interpolation);
    }
    let elapsed = t1 - t0;
    let exact = DistributionFn::from_fn(&grid, t1, |r, w, _| {
        profile((r - flow.r_speed * elapsed).rem_euclid(1.0), w - flow.w_speed * elapsed)
    });
    f.values.iter().zip(&exact.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Frozen-flow advection with the configured interpolation, from a 16 × 33 base.
pub fn advection_study(cfg: &SimConfig, levels: usize) -> Result<Study> {
    check_levels(levels)?;
    let errors = (0..levels)
        .into_par_iter()
        .map(|l| {
            let s = 1usize << l;
            advection_error(16 * s, 32 * s + 1, 8 * s, cfg)
        })
        .collect();
    Ok(Study::new("advection", errors))
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub studies: Vec<Study>,
}

impl ConvergenceReport {
    pub fn study(&self, name: &str) -> Option<&Study> {
        self.studies.iter().find(|s| s.name == name)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for st in &self.studies {
            let e: Vec<String> = st.errors.iter().map(|x| format!("{x:.3e}")).collect();
            let o: Vec<String> = st.orders.iter().map(|x| format!("{x:.2}")).collect();
            s += &format!("{:<26} errors [{}]  orders [{}]\n", st.name, e.join(", "), o.join(", "));
        }
        s
    }
}

/// All studies for `cfg`: vacuum in areal and in the configured variables, matter residuals
/// and `f` self-convergence (skipped for vacuum configs), and frozen-flow advection.
pub fn convergence(cfg: &SimConfig, levels: usize) -> Result<ConvergenceReport> {
    check_levels(levels)?;
    let cfg = cfg.clone().validated()?;
    let mut studies = Vec::new();
    studies.extend(vacuum_study(&cfg, levels, MetricVariables::Areal)?);
    if cfg.variables != MetricVariables::Areal {
        studies.extend(vacuum_study(&cfg, levels, cfg.variables)?);
    }
    if cfg.init.f0 > 0.0 {
        let (lo, hi) = cfg.window();
        studies.extend(matter_study(&cfg, levels, FitWindow::new(lo, hi))?);
    }
    studies.push(advection_study(&cfg, levels)?);
    Ok(ConvergenceReport { studies })
}

pub fn write_report(path: &Path, report: &ConvergenceReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["study", "level", "error", "order"]).map_err(|e| Error::csv(path, e))?;
    for st in &report.studies {
        for (l, e) in st.errors.iter().enumerate() {
            let order = l.checked_sub(1).and_then(|k| st.orders.get(k)).map(|o| format!("{o:?}")).unwrap_or_default();
            w.write_record([st.name.clone(), l.to_string(), format!("{e:?}"), order]).map_err(|e| Error::csv(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn cmd_convergence(config: &Path, levels: usize, out: &Path) -> Result<ConvergenceReport> {
    check_levels(levels)?;
    let cfg = SimConfig::from_file(config)?.validated()?;
    io::ensure_dir(out)?;
    let mut manifest = RunManifest::begin(&cfg);
    let result = convergence(&cfg, levels).and_then(|r| {
        write_report(&out.join(REPORT), &r)?;
        manifest.add(REPORT);
        Ok(r)
    });
    manifest.termination = match &result {
        Ok(_) => Termination::Completed,
        Err(Error::BlowUp { .. }) => Termination::BlowUp,
        Err(_) => Termination::Error,
    };
    manifest.message = result.as_ref().err().map(|e| e.to_string());
    manifest.write(out)?;
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refined_levels_nest() {
        let cfg = SimConfig { nr: 8, nw: 17, ..SimConfig::default() };
        let r = refine(&cfg, 2);
        assert_eq!((r.nr, r.nw, r.dt_cap), (32, 65, cfg.dt_cap / 4.0));
        let g0 = PhaseSpaceGrid::from_config(&cfg);
        let g2 = PhaseSpaceGrid::from_config(&r);
        assert_eq!(g0.u(3), g2.u(12));
        assert_eq!(g0.r(5), g2.r(20));
    }

    #[test]
    fn single_level_is_rejected() {
        let err = vacuum_study(&SimConfig::default(), 1, MetricVariables::Areal).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("at least 3 levels"));
    }

    #[test]
    fn areal_vacuum_is_second_order() {
        let cfg = SimConfig { nr: 4, nw: 9, nf: 4, t_end: 10.0, ..SimConfig::default() };
        let [emu, _] = vacuum_study(&cfg, 3, MetricVariables::Areal).unwrap();
        assert!(emu.min_order() > 1.9, "{emu:?}");
    }

    #[test]
    fn frozen_flow_advection_order() {
        let st = advection_study(&SimConfig::default(), 3).unwrap();
        assert!(st.min_order() > 1.9, "{st:?}");
    }

    #[test]
    fn orders_of_exact_halving() {
        let st = Study::new("x", vec![1.0, 0.25, 0.0625]);
        assert_eq!(st.orders, vec![2.0, 2.0]);
        assert_eq!(st.finest_error(), 0.0625);
    }
}
