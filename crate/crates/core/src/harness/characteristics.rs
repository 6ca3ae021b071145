//! Characteristic integration over a stored metric history.

use std::path::{Path, PathBuf};

use crate::characteristics::{integrate_many, state_near, summarize, BoundSummary, CharState, MetricHistory, Rk4Options, Seed};
use crate::config::SimConfig;
use crate::diagnostics::FitWindow;
use crate::error::{Error, Result};
use crate::harness::evolve::RunOutput;
use crate::harness::io::{self, read_metric_history, read_snapshot, write_trajectory, RunManifest, Termination};
use crate::phase_space::{DistributionFn, PhaseSpaceGrid, SUPPORT_THRESHOLD};

/// Default number of seeds when none are given.
pub const DEFAULT_SEEDS: usize = 12;
pub const SUMMARY: &str = "characteristics_summary.csv";

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub seed: Seed,
    pub states: Vec<CharState>,
    /// Over the fit window; absent when the trajectory does not reach it.
    pub bounds: Option<BoundSummary>,
    /// `W·s` at the window edges.
    pub ws_lo: Option<f64>,
    pub ws_hi: Option<f64>,
    pub outside_support: bool,
}

impl Trajectory {
    /// Relative change of `W·s` across the window.
    pub fn ws_drift(&self) -> Option<f64> {
        let (a, b) = (self.ws_lo?, self.ws_hi?);
        Some(((b - a) / a).abs())
    }

    /// `max |∂R/∂r|` and `max s|∂W/∂r|` over the window relative to their window-start values.
    pub fn growth(&self) -> Option<(f64, f64)> {
        let b = self.bounds.as_ref()?;
        let rel = |max: f64, start: f64| if start.abs() > 0.0 { max / start.abs() } else if max == 0.0 { 1.0 } else { f64::INFINITY };
        Some((rel(b.max_d_r, b.start.d_r), rel(b.max_s_d_w, b.start.s_d_w)))
    }
}

fn nearest(n: usize, mut at: impl FnMut(usize) -> f64, x: f64) -> usize {
    (0..n).min_by(|&a, &b| (at(a) - x).abs().total_cmp(&(at(b) - x).abs())).unwrap_or(0)
}

/// True when the nearest node of `f` to the seed carries no mass.
pub fn seed_outside_support(seed: &Seed, f: &DistributionFn, grid: &PhaseSpaceGrid) -> bool {
    let i = nearest(grid.nr, |i| grid.r(i), seed.r.rem_euclid(1.0));
    let j = nearest(grid.nw, |j| grid.w(j, f.t), seed.w);
    let k = nearest(grid.nf, |k| grid.f(k), seed.big_f);
    f.values[grid.idx(i, j, k)] <= SUPPORT_THRESHOLD
}

/// Integrates `seeds` from their start times to the end of `history`, summarising over `window`.
pub fn trace_seeds(
    history: &MetricHistory,
    seeds: &[Seed],
    window: FitWindow,
    support: Option<(&DistributionFn, &PhaseSpaceGrid)>,
    opts: Rk4Options,
) -> Result<Vec<Trajectory>> {
    let s_end = *history.times.last().ok_or_else(|| Error::Domain("empty metric history".into()))?;
    let all = integrate_many(history, seeds, s_end, opts)?;
    Ok(seeds
        .iter()
        .zip(all)
        .map(|(seed, states)| {
            let ws = |s: f64| state_near(&states, s).map(|c| c.ws());
            Trajectory {
                seed: *seed,
                bounds: summarize(&states, window.t_lo, window.t_hi),
                ws_lo: ws(window.t_lo),
                ws_hi: ws(window.t_hi),
                outside_support: support.is_some_and(|(f, g)| seed_outside_support(seed, f, g)),
                states,
            }
        })
        .collect())
}

/// Default seeds: spread over the initial support at `t0`.
pub fn default_seeds(cfg: &SimConfig) -> Vec<Seed> {
    Seed::spread(DEFAULT_SEEDS, cfg.t0, cfg.init.w_sup, cfg.init.f_sup)
}

/// Traces seeds through an in-memory run.
pub fn trace_run(run: &RunOutput, seeds: &[Seed], opts: Rk4Options) -> Result<Vec<Trajectory>> {
    let history = MetricHistory::from_snapshots(run.config.cosmological_constant, &run.recorder.metrics, &run.recorder.q)?;
    let grid = PhaseSpaceGrid::from_config(&run.config);
    let f0 = crate::phase_space::build_initial_data(&run.config, &grid)?;
    trace_seeds(&history, seeds, run.window(), Some((&f0, &grid)), opts)
}

pub fn write_summary(path: &Path, trajs: &[Trajectory]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record([
        "seed", "r", "w", "F", "max_E_ratio", "max_dRdr", "max_s_dWdr", "max_s2_sum_c", "dRdr_start", "s_dWdr_start", "Ws_lo",
        "Ws_hi", "outside_support",
    ])
    .map_err(|e| Error::csv(path, e))?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
    for (n, t) in trajs.iter().enumerate() {
        let b = t.bounds.as_ref();
        w.write_record([
            n.to_string(),
            format!("{:?}", t.seed.r),
            format!("{:?}", t.seed.w),
            format!("{:?}", t.seed.big_f),
            opt(b.map(|b| b.max_e_ratio)),
            opt(b.map(|b| b.max_d_r)),
            opt(b.map(|b| b.max_s_d_w)),
            opt(b.map(|b| b.max_c_sum_s2)),
            opt(b.map(|b| b.start.d_r)),
            opt(b.map(|b| b.start.s_d_w)),
            opt(t.ws_lo),
            opt(t.ws_hi),
            t.outside_support.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a run directory, traces `seeds` (default spread) and writes trajectories plus a summary into `out`.
///
/// Seeds outside the initial support produce a warning on stderr and are still integrated.
pub fn cmd_characteristics(run_dir: &Path, seeds: Option<&str>, window: Option<FitWindow>, out: Option<&Path>) -> Result<Vec<Trajectory>> {
    let cfg = SimConfig::from_file(&run_dir.join(io::CONFIG_COPY))?;
    let history = read_metric_history(&run_dir.join(io::METRIC_HISTORY), cfg.cosmological_constant)?;
    let seeds = match seeds {
        Some(text) => Seed::parse_list(text, cfg.t0)?,
        None => default_seeds(&cfg),
    };
    let grid = PhaseSpaceGrid::from_config(&cfg);
    let first = read_snapshot(&run_dir.join("f_00000.bin"), &run_dir.join("f_00000.txt"))
        .ok()
        .filter(|(_, dims)| *dims == [grid.nr, grid.nw, grid.nf])
        .map(|(f, _)| f);
    let window = window.unwrap_or_else(|| {
        let (lo, hi) = cfg.window();
        FitWindow::new(lo, hi)
    });
    let trajs = trace_seeds(&history, &seeds, window, first.as_ref().map(|f| (f, &grid)), Rk4Options::default())?;
    for (n, t) in trajs.iter().enumerate() {
        if t.outside_support {
            eprintln!("warning: seed {n} ({}, {}, {}) lies outside the stored support", t.seed.r, t.seed.w, t.seed.big_f);
        }
    }
    let out: PathBuf = out.map(Path::to_path_buf).unwrap_or_else(|| run_dir.join("characteristics"));
    io::ensure_dir(&out)?;
    let mut manifest = RunManifest::begin(&cfg);
    for (n, t) in trajs.iter().enumerate() {
        let name = format!("trajectory_{n:03}.csv");
        write_trajectory(&out.join(&name), &t.states)?;
        manifest.add(name);
    }
    write_summary(&out.join(SUMMARY), &trajs)?;
    manifest.add(SUMMARY);
    manifest.termination = Termination::Completed;
    manifest.write(&out)?;
    Ok(trajs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::evolve::evolve_to_dir;

    #[test]
    fn run_dir_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SimConfig { nr: 8, nw: 33, nf: 4, t_end: 6.0, fit_window: Some((2.0, 6.0)), ..SimConfig::default() };
        evolve_to_dir(&cfg, dir.path()).unwrap();
        let trajs = cmd_characteristics(dir.path(), Some("0.5,0.1,0.3;0.5,0.45,0.3"), None, None).unwrap();
        assert_eq!(trajs.len(), 2);
        assert!(!trajs[0].outside_support);
        assert!(trajs[1].outside_support);
        for t in &trajs {
            assert_eq!(t.states.last().unwrap().s, 6.0);
            assert!(t.bounds.as_ref().unwrap().max_d_r.is_finite());
        }
        let mut rdr = csv::Reader::from_path(dir.path().join("characteristics").join(SUMMARY)).unwrap();
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(&rows[1][12], "true");
        assert!(dir.path().join("characteristics/trajectory_001.csv").exists());
    }
}
