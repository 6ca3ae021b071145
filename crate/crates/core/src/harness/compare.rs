//! Distance between two nearby data sets and their common late-time attractor.

use std::path::Path;

use crate::config::SimConfig;
use crate::diagnostics::{FitWindow, Recorder};
use crate::error::{Error, Result};
use crate::evolution::Simulation;
use crate::fd::periodic_first;
use crate::harness::evolve::{evolve_to_dir, run, RunOutput};
use crate::harness::io::{self, RunManifest, Termination};
use crate::harness::rates::{expectation, rates_for_series, RateReport, Verdict};
use crate::metric::MetricState;
use crate::phase_space::weighted_sobolev_distance;

/// Highest `r`-derivative in the metric norms.
pub const METRIC_ORDER: usize = 5;
/// Highest total derivative in the matter norm.
pub const MATTER_ORDER: usize = 4;
pub const REPORT: &str = "compare.csv";

/// Discrete periodic `H^order` norm on `[0, 1)` with spacing `1/n`.
pub fn periodic_sobolev_norm(v: &[f64], order: usize) -> f64 {
    let h = 1.0 / v.len() as f64;
    let mut d = v.to_vec();
    let mut total = 0.0;
    for m in 0..=order {
        total += d.iter().map(|x| x * x).sum::<f64>() * h;
        if m < order {
            d = periodic_first(&d, h);
        }
    }
    total.sqrt()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `ḡ_rr = e^{2λ}`.
fn g_rr(m: &MetricState) -> Vec<f64> {
    m.lambda.iter().map(|l| (2.0 * l).exp()).collect()
}

/// `k̄_rr = e^{2λ−μ} λ̇` and `k̄_θθ / g_K = t e^{−μ}`.
fn k_parts(m: &MetricState) -> (Vec<f64>, Vec<f64>) {
    let rr = (0..m.nr()).map(|i| (2.0 * m.lambda[i] - m.mu[i]).exp() * m.lambda_dot[i]).collect();
    let th = m.mu.iter().map(|mu| m.t * (-mu).exp()).collect();
    (rr, th)
}

/// Distances between two states at a common time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateDistance {
    pub t: f64,
    /// `H⁵` of `ḡ_rr` differences.
    pub metric_g: f64,
    /// `H⁵` of the `k̄_rr` and `k̄_θθ` differences, summed.
    pub metric_k: f64,
    /// `H⁴_z` of the distribution difference.
    pub matter: f64,
}

impl StateDistance {
    pub fn total(&self) -> f64 {
        self.metric_g + self.metric_k + self.matter
    }
}

pub fn ensure_comparable(a: &SimConfig, b: &SimConfig) -> Result<()> {
    let mut why = Vec::new();
    if (a.nr, a.nw, a.nf) != (b.nr, b.nw, b.nf) || a.w_max != b.w_max || a.f_max != b.f_max {
        why.push("grids differ".to_string());
    }
    if a.cosmological_constant != b.cosmological_constant {
        why.push(format!("Λ differs ({} vs {})", a.cosmological_constant, b.cosmological_constant));
    }
    if a.symmetry != b.symmetry {
        why.push(format!("K differs ({} vs {})", a.symmetry.k(), b.symmetry.k()));
    }
    if a.t0 != b.t0 {
        why.push(format!("t0 differs ({} vs {})", a.t0, b.t0));
    }
    if why.is_empty() {
        Ok(())
    } else {
        Err(Error::Incompatible(why.join("; ")))
    }
}

pub fn state_distance(a: &Simulation, b: &Simulation, z: f64) -> Result<StateDistance> {
    if !a.grid.same_shape(&b.grid) {
        return Err(Error::Incompatible("grids differ".into()));
    }
    let (ka, kb) = (k_parts(&a.metric), k_parts(&b.metric));
    Ok(StateDistance {
        t: a.t(),
        metric_g: periodic_sobolev_norm(&diff(&g_rr(&a.metric), &g_rr(&b.metric)), METRIC_ORDER),
        metric_k: periodic_sobolev_norm(&diff(&ka.0, &kb.0), METRIC_ORDER)
            + periodic_sobolev_norm(&diff(&ka.1, &kb.1), METRIC_ORDER),
        matter: weighted_sobolev_distance(&a.f, &b.f, &a.grid, MATTER_ORDER, z)?,
    })
}

/// Distances of the two initial data sets.
pub fn initial_distance(a: &SimConfig, b: &SimConfig) -> Result<StateDistance> {
    let a = a.clone().validated()?;
    let b = b.clone().validated()?;
    ensure_comparable(&a, &b)?;
    state_distance(&Simulation::new(&a)?, &Simulation::new(&b)?, a.sobolev_weight)
}

/// `a` with `f0` scaled by `1 + delta`.
pub fn perturbed(a: &SimConfig, delta: f64) -> SimConfig {
    let mut b = a.clone();
    b.init.f0 *= 1.0 + delta;
    b
}

/// Late-time attractor test on one run.
#[derive(Clone, Debug, PartialEq)]
pub struct AttractorCheck {
    pub nohair_g_exponent: Option<f64>,
    pub fhat_delta_exponent: Option<f64>,
    /// `nohair_k` is finite and non-increasing between consecutive records in the window.
    pub nohair_k_decreasing: bool,
    pub nohair_k_max: f64,
}

impl AttractorCheck {
    pub fn from_run(recorder: &Recorder, report: &RateReport, window: FitWindow) -> Self {
        let k: Vec<f64> = recorder.series("nohair_k").into_iter().filter(|(t, _)| window.contains(*t)).map(|p| p.1).collect();
        Self {
            nohair_g_exponent: report.exponent("nohair_g"),
            fhat_delta_exponent: report.exponent("fhat_delta"),
            nohair_k_decreasing: k.len() >= 2 && k.iter().all(|v| v.is_finite()) && k.windows(2).all(|p| p[1] <= p[0]),
            nohair_k_max: k.iter().copied().fold(0.0, f64::max),
        }
    }

    pub fn passes(&self) -> bool {
        let ok = |col: &str, x: Option<f64>| x.is_some_and(|x| expectation(col).is_some_and(|e| e.admits(x)));
        ok("nohair_g", self.nohair_g_exponent) && ok("fhat_delta", self.fhat_delta_exponent) && self.nohair_k_decreasing
    }
}

#[derive(Clone, Debug)]
pub struct CompareReport {
    pub initial: StateDistance,
    pub final_distance: StateDistance,
    pub rates: [RateReport; 2],
    pub attractor: [AttractorCheck; 2],
    pub runs: [RunOutput; 2],
}

impl CompareReport {
    pub fn verdicts(&self) -> [Verdict; 2] {
        self.attractor.clone().map(|a| if a.passes() { Verdict::Pass } else { Verdict::Fail })
    }

    pub fn summary(&self) -> String {
        let d = |x: &StateDistance| format!("g {:.3e}  k {:.3e}  f {:.3e}  total {:.3e}", x.metric_g, x.metric_k, x.matter, x.total());
        let mut s = format!("t = {:<8} {}\nt = {:<8} {}\n", self.initial.t, d(&self.initial), self.final_distance.t, d(&self.final_distance));
        let e = |x: Option<f64>| x.map(|v| format!("{v:+.3}")).unwrap_or_else(|| "n/a".into());
        for (name, a, v) in [("A", &self.attractor[0], self.verdicts()[0]), ("B", &self.attractor[1], self.verdicts()[1])] {
            s += &format!(
                "run {name}: nohair_g exponent {}  fhat_delta exponent {}  nohair_k decreasing {}  {}\n",
                e(a.nohair_g_exponent),
                e(a.fhat_delta_exponent),
                a.nohair_k_decreasing,
                v
            );
        }
        s
    }
}

fn finish(out: RunOutput) -> (RateReport, AttractorCheck, RunOutput) {
    let window = out.window();
    let rates = rates_for_series(|c| out.recorder.series(c), window);
    let check = AttractorCheck::from_run(&out.recorder, &rates, window);
    (rates, check, out)
}

/// Runs both configs to completion, in memory or below `out/a` and `out/b`.
pub fn compare(a: &SimConfig, b: &SimConfig, out: Option<&Path>) -> Result<CompareReport> {
    let initial = initial_distance(a, b)?;
    let evolve = |cfg: &SimConfig, sub: &str| match out {
        Some(dir) => evolve_to_dir(cfg, &dir.join(sub)),
        None => run(cfg),
    };
    let (ra, rb) = rayon::join(|| evolve(a, "a"), || evolve(b, "b"));
    let (ra, rb) = (ra?, rb?);
    let final_distance = state_distance(&ra.sim, &rb.sim, a.sobolev_weight)?;
    let (rates_a, check_a, ra) = finish(ra);
    let (rates_b, check_b, rb) = finish(rb);
    Ok(CompareReport { initial, final_distance, rates: [rates_a, rates_b], attractor: [check_a, check_b], runs: [ra, rb] })
}

pub fn write_report(path: &Path, r: &CompareReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["quantity", "A", "B"]).map_err(|e| Error::csv(path, e))?;
    let f = |x: f64| format!("{x:?}");
    let o = |x: Option<f64>| x.map(f).unwrap_or_default();
    let rows: Vec<[String; 3]> = vec![
        ["initial_t".into(), f(r.initial.t), String::new()],
        ["initial_metric_g_H5".into(), f(r.initial.metric_g), String::new()],
        ["initial_metric_k_H5".into(), f(r.initial.metric_k), String::new()],
        ["initial_matter_H4z".into(), f(r.initial.matter), String::new()],
        ["initial_total".into(), f(r.initial.total()), String::new()],
        ["final_t".into(), f(r.final_distance.t), String::new()],
        ["final_metric_g_H5".into(), f(r.final_distance.metric_g), String::new()],
        ["final_metric_k_H5".into(), f(r.final_distance.metric_k), String::new()],
        ["final_matter_H4z".into(), f(r.final_distance.matter), String::new()],
        ["final_total".into(), f(r.final_distance.total()), String::new()],
        ["nohair_g_exponent".into(), o(r.attractor[0].nohair_g_exponent), o(r.attractor[1].nohair_g_exponent)],
        ["fhat_delta_exponent".into(), o(r.attractor[0].fhat_delta_exponent), o(r.attractor[1].fhat_delta_exponent)],
        ["nohair_k_max".into(), f(r.attractor[0].nohair_k_max), f(r.attractor[1].nohair_k_max)],
        [
            "nohair_k_decreasing".into(),
            r.attractor[0].nohair_k_decreasing.to_string(),
            r.attractor[1].nohair_k_decreasing.to_string(),
        ],
        ["attractor".into(), r.verdicts()[0].to_string(), r.verdicts()[1].to_string()],
    ];
    for row in rows {
        w.write_record(row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Compares the configs at `a` and `b`, writing both run directories and `compare.csv` into `out`.
pub fn cmd_compare(a: &Path, b: &Path, out: &Path) -> Result<CompareReport> {
    let ca = SimConfig::from_file(a)?.validated()?;
    let cb = SimConfig::from_file(b)?.validated()?;
    compare_into(&ca, &cb, out)
}

/// [`compare`] into `out`, with `compare.csv` and a manifest next to the run directories `a` and `b`.
pub fn compare_into(ca: &SimConfig, cb: &SimConfig, out: &Path) -> Result<CompareReport> {
    ensure_comparable(ca, cb)?;
    io::ensure_dir(out)?;
    let mut manifest = RunManifest::begin(ca);
    let result = compare(ca, cb, Some(out));
    manifest.add("a");
    manifest.add("b");
    let result = result.and_then(|r| {
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
