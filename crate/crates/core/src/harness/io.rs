//! File formats of a run directory.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::characteristics::{CharState, MetricHistory};
use crate::config::SimConfig;
use crate::diagnostics::{DiagnosticsRecord, RateFit, COLUMNS};
use crate::error::{Error, Result};
use crate::metric::MetricState;
use crate::phase_space::{DistributionFn, MomentFields, PhaseSpaceGrid};

pub const TIMESERIES: &str = "timeseries.csv";
pub const RATES: &str = "rates.csv";
pub const METRIC_HISTORY: &str = "metric_history.csv";
pub const MANIFEST: &str = "manifest.json";
pub const CONFIG_COPY: &str = "config.txt";

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `timeseries.csv`; absent values are empty fields.
pub fn write_timeseries(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(COLUMNS).map_err(|e| Error::csv(path, e))?;
    for r in records {
        w.write_record(r.values().iter().map(|v| fmt_opt(*v))).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Column-oriented numeric table with optional entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// `(t, value)` pairs of `name` against the first column, skipping absent entries.
    pub fn series(&self, name: &str) -> Option<Vec<(f64, f64)>> {
        let idx = self.column_index(name)?;
        Some(self.rows.iter().filter_map(|r| Some((r[0]?, r[idx]?))).collect())
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let columns: Vec<String> = rdr.headers().map_err(|e| Error::csv(path, e))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(c, field)| {
                let field = field.trim();
                if field.is_empty() {
                    Ok(None)
                } else {
                    field.parse::<f64>().map(Some).map_err(|_| Error::Format {
                        path: path.to_path_buf(),
                        message: format!("line {}: column `{}`: `{field}` is not a number", n + 2, columns[c]),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

pub fn write_rates(path: &Path, fits: &[(String, RateFit)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["name", "exponent", "intercept", "residual", "t_lo", "t_hi"]).map_err(|e| Error::csv(path, e))?;
    for (name, f) in fits {
        w.write_record([name.clone(), fmt(f.exponent), fmt(f.intercept), fmt(f.residual), fmt(f.t_lo), fmt(f.t_hi)])
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Every record of the run: `t, r_index, lambda, mu, lambda_dot, mu_dot, mu_prime, q`.
pub fn write_metric_history(path: &Path, metrics: &[MetricState], q: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["t", "r_index", "lambda", "mu", "lambda_dot", "mu_dot", "mu_prime", "q"])
        .map_err(|e| Error::csv(path, e))?;
    for (m, qq) in metrics.iter().zip(q) {
        for i in 0..m.nr() {
            w.write_record([
                fmt(m.t),
                i.to_string(),
                fmt(m.lambda[i]),
                fmt(m.mu[i]),
                fmt(m.lambda_dot[i]),
                fmt(m.mu_dot[i]),
                fmt(m.mu_prime[i]),
                fmt(qq[i]),
            ])
            .map_err(|e| Error::csv(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_metric_history(path: &Path, cosmo: f64) -> Result<MetricHistory> {
    let table = read_table(path)?;
    let bad = |m: &str| Error::Format { path: path.to_path_buf(), message: m.to_string() };
    let need = ["t", "r_index", "lambda", "mu", "lambda_dot", "mu_dot", "mu_prime", "q"];
    let idx: Vec<usize> = need
        .iter()
        .map(|n| table.column_index(n).ok_or_else(|| bad(&format!("missing column `{n}`"))))
        .collect::<Result<_>>()?;
    let mut history = MetricHistory::new(cosmo);
    let mut rows = table.rows.iter().peekable();
    while let Some(first) = rows.peek() {
        let t = first[idx[0]].ok_or_else(|| bad("missing t"))?;
        let mut m = MetricState { t, lambda: vec![], mu: vec![], lambda_dot: vec![], mu_dot: vec![], mu_prime: vec![] };
        let mut q = Vec::new();
        while let Some(row) = rows.peek() {
            if row[idx[0]] != Some(t) {
                break;
            }
            let v: Vec<f64> = idx[2..].iter().map(|&c| row[c].ok_or_else(|| bad("missing value"))).collect::<Result<_>>()?;
            m.lambda.push(v[0]);
            m.mu.push(v[1]);
            m.lambda_dot.push(v[2]);
            m.mu_dot.push(v[3]);
            m.mu_prime.push(v[4]);
            q.push(v[5]);
            rows.next();
        }
        history.push(&m, &q)?;
    }
    Ok(history)
}

pub fn write_moments(path: &Path, m: &MomentFields, grid: &PhaseSpaceGrid) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["r", "rho", "p", "j", "q"]).map_err(|e| Error::csv(path, e))?;
    for i in 0..grid.nr {
        w.write_record([fmt(grid.r(i)), fmt(m.rho[i]), fmt(m.p[i]), fmt(m.j[i]), fmt(m.q[i])])
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Raw little-endian `f64` array in `(r, w, F)` order plus a `key = value` sidecar.
pub fn write_snapshot(bin: &Path, sidecar: &Path, f: &DistributionFn, grid: &PhaseSpaceGrid) -> Result<()> {
    let mut out = BufWriter::new(File::create(bin).map_err(|e| Error::io(bin, e))?);
    for v in &f.values {
        out.write_all(&v.to_le_bytes()).map_err(|e| Error::io(bin, e))?;
    }
    out.flush().map_err(|e| Error::io(bin, e))?;
    let text = format!(
        "t = {}\nNr = {}\nNw = {}\nNF = {}\nw_max = {}\nF_max = {}\nu_max = {}\n",
        fmt(f.t),
        grid.nr,
        grid.nw,
        grid.nf,
        fmt(grid.w_extent(f.t)),
        fmt(grid.f_max),
        fmt(grid.u_max())
    );
    fs::write(sidecar, text).map_err(|e| Error::io(sidecar, e))
}

/// Reads a snapshot written by [`write_snapshot`]; returns `f` and its `(Nr, Nw, NF)`.
pub fn read_snapshot(bin: &Path, sidecar: &Path) -> Result<(DistributionFn, [usize; 3])> {
    let text = fs::read_to_string(sidecar).map_err(|e| Error::io(sidecar, e))?;
    let bad = |m: String| Error::Format { path: sidecar.to_path_buf(), message: m };
    let get = |k: &str| -> Result<f64> {
        text.lines()
            .filter_map(|l| l.split_once('='))
            .find(|(a, _)| a.trim() == k)
            .ok_or_else(|| bad(format!("missing `{k}`")))?
            .1
            .trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("bad `{k}`")))
    };
    let dims = [get("Nr")? as usize, get("Nw")? as usize, get("NF")? as usize];
    let t = get("t")?;
    let mut bytes = Vec::new();
    File::open(bin).and_then(|mut h| h.read_to_end(&mut bytes)).map_err(|e| Error::io(bin, e))?;
    let n = dims.iter().product::<usize>();
    if bytes.len() != 8 * n {
        return Err(Error::Format { path: bin.to_path_buf(), message: format!("expected {} bytes, found {}", 8 * n, bytes.len()) });
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
    Ok((DistributionFn { values, t }, dims))
}

pub fn write_trajectory(path: &Path, traj: &[CharState]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["s", "R", "W", "W*s", "xi", "eta_hat", "E", "dRdr", "s*dWdr"]).map_err(|e| Error::csv(path, e))?;
    for c in traj {
        w.write_record([c.s, c.r, c.w, c.ws(), c.xi, c.eta_hat, c.e, c.d_r, c.s_d_w].map(fmt))
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    BlowUp,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: String,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
    pub termination: Termination,
    pub message: Option<String>,
    /// File names relative to the run directory.
    pub artifacts: Vec<String>,
    pub version: String,
}

pub fn wall_clock() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl RunManifest {
    pub fn begin(cfg: &SimConfig) -> Self {
        Self {
            config: cfg.to_text(),
            started: wall_clock(),
            finished: f64::NAN,
            termination: Termination::Error,
            message: None,
            artifacts: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn add(&mut self, name: impl Into<String>) {
        let name = name.into();
        if !self.artifacts.contains(&name) {
            self.artifacts.push(name);
        }
    }

    /// Writes `manifest.json` into `dir`, listing itself.
    pub fn write(&mut self, dir: &Path) -> Result<PathBuf> {
        self.finished = wall_clock();
        self.add(MANIFEST);
        let path = dir.join(MANIFEST);
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Format { path: path.clone(), message: e.to_string() })?;
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format { path: path.to_path_buf(), message: e.to_string() })
}
