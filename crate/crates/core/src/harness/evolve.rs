//! Full runs from `t0` to `t_end`, in memory or into a run directory.

use std::path::Path;

use crate::config::SimConfig;
use crate::diagnostics::{FitWindow, Recorder};
use crate::error::{Error, Result};
use crate::evolution::Simulation;
use crate::harness::io::{self, RunManifest, Termination};
use crate::harness::rates::{rates_for_series, write_rates_report, RATES_SUMMARY};

/// Final state and accumulated records of a run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: SimConfig,
    pub sim: Simulation,
    pub recorder: Recorder,
}

impl RunOutput {
    pub fn window(&self) -> FitWindow {
        let (lo, hi) = self.config.window();
        FitWindow::new(lo, hi)
    }
}

/// Runs `cfg`, recording every `output_every` steps plus the initial and final states.
///
/// `on_record` receives the record index and the state just recorded. On
/// blow-up the partial output is returned together with the error.
pub fn run_with(
    cfg: &SimConfig,
    mut on_record: impl FnMut(usize, &Simulation, &Recorder) -> Result<()>,
) -> std::result::Result<RunOutput, (Option<Box<RunOutput>>, Error)> {
    let cfg = cfg.clone().validated().map_err(|e| (None, e))?;
    let mut sim = Simulation::new(&cfg).map_err(|e| (None, e))?;
    let mut recorder = Recorder::new();
    recorder.observe(&sim);
    if let Err(e) = on_record(0, &sim, &recorder) {
        return Err((None, e));
    }
    let every = cfg.output_every;
    let t_end = cfg.t_end;
    let result = sim.run_until(t_end, |s| {
        if s.steps % every == 0 || s.t() >= t_end {
            recorder.observe(s);
            on_record(recorder.records.len() - 1, s, &recorder)?;
        }
        Ok(())
    });
    recorder.finalize_nohair(&sim.model);
    let out = RunOutput { config: cfg, sim, recorder };
    match result {
        Ok(()) => Ok(out),
        Err(e) => Err((Some(Box::new(out)), e)),
    }
}

/// In-memory run.
pub fn run(cfg: &SimConfig) -> Result<RunOutput> {
    run_with(cfg, |_, _, _| Ok(())).map_err(|(_, e)| e)
}

fn snapshot_due(cfg: &SimConfig, index: usize, is_last: bool) -> bool {
    index == 0 || is_last || (cfg.snapshot_every > 0 && index.is_multiple_of(cfg.snapshot_every))
}

fn write_snapshot_files(dir: &Path, manifest: &mut RunManifest, index: usize, sim: &Simulation) -> Result<()> {
    let stem = format!("f_{index:05}");
    let (bin, txt) = (format!("{stem}.bin"), format!("{stem}.txt"));
    io::write_snapshot(&dir.join(&bin), &dir.join(&txt), &sim.f, &sim.grid)?;
    let mom = format!("moments_{index:05}.csv");
    io::write_moments(&dir.join(&mom), &sim.moments, &sim.grid)?;
    manifest.add(bin);
    manifest.add(txt);
    manifest.add(mom);
    Ok(())
}

/// Runs `cfg` and writes the run directory `out`.
///
/// Emits the config copy, `timeseries.csv`, `metric_history.csv`,
/// `rates.csv`, distribution and moment snapshots and `manifest.json`.
/// The manifest is written on every exit path once `out` exists.
pub fn evolve_to_dir(cfg: &SimConfig, out: &Path) -> Result<RunOutput> {
    io::ensure_dir(out)?;
    let mut manifest = RunManifest::begin(cfg);
    let copy = out.join(io::CONFIG_COPY);
    std::fs::write(&copy, cfg.to_text()).map_err(|e| Error::io(&copy, e))?;
    manifest.add(io::CONFIG_COPY);

    let t_end = cfg.t_end;
    let mut written = Vec::<String>::new();
    let result = run_with(cfg, |index, sim, _| {
        let is_last = sim.t() >= t_end;
        if snapshot_due(cfg, index, is_last) {
            let mut m = RunManifest::begin(cfg);
            write_snapshot_files(out, &mut m, index, sim)?;
            written.extend(m.artifacts);
        }
        Ok(())
    });
    for name in written {
        manifest.add(name);
    }
    let (output, error) = match result {
        Ok(o) => (Some(o), None),
        Err((partial, e)) => (partial.map(|b| *b), Some(e)),
    };
    let finish = |manifest: &mut RunManifest, output: &Option<RunOutput>| -> Result<()> {
        if let Some(o) = output {
            io::write_timeseries(&out.join(io::TIMESERIES), &o.recorder.records)?;
            manifest.add(io::TIMESERIES);
            io::write_metric_history(&out.join(io::METRIC_HISTORY), &o.recorder.metrics, &o.recorder.q)?;
            manifest.add(io::METRIC_HISTORY);
            let report = rates_for_series(|c| o.recorder.series(c), o.window());
            write_rates_report(&out.join(io::RATES), &report)?;
            manifest.add(io::RATES);
            manifest.add(RATES_SUMMARY);
        }
        Ok(())
    };
    let io_result = finish(&mut manifest, &output);
    manifest.termination = match (&error, &io_result) {
        (None, Ok(())) => Termination::Completed,
        (Some(Error::BlowUp { .. }), _) => Termination::BlowUp,
        _ => Termination::Error,
    };
    manifest.message = error.as_ref().map(|e| e.to_string()).or(io_result.as_ref().err().map(|e| e.to_string()));
    manifest.write(out)?;
    match (error, io_result) {
        (Some(e), _) => Err(e),
        (None, Err(e)) => Err(e),
        (None, Ok(())) => Ok(output.expect("completed runs carry output")),
    }
}

/// Loads the config at `config` and runs it into `out`.
pub fn cmd_evolve(config: &Path, out: &Path) -> Result<RunOutput> {
    let cfg = SimConfig::from_file(config);
    match cfg.and_then(|c| c.validated()) {
        Ok(cfg) => evolve_to_dir(&cfg, out),
        Err(e) => {
            // record the failure when the output directory is usable
            if io::ensure_dir(out).is_ok() {
                let mut m = RunManifest::begin(&SimConfig::default());
                m.config = std::fs::read_to_string(config).unwrap_or_default();
                m.termination = Termination::Error;
                m.message = Some(e.to_string());
                let _ = m.write(out);
            }
            Err(e)
        }
    }
}
