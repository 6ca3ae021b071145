//! Run configuration: flat `key = value` text with `#` comments and dotted
//! section prefixes (`grid.Nr`, `init.f0`, `run.t_end`, ...).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kinematics::SymmetryClass;

/// Reconstruction used when sampling `f` at departure points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    /// Tensor-product linear; a convex combination of the four corners.
    Bilinear,
    /// Tensor-product cubic Lagrange clamped to `[0, max f]` of the slice.
    Bicubic,
}

impl Interpolation {
    pub fn name(self) -> &'static str {
        match self {
            Interpolation::Bilinear => "linear",
            Interpolation::Bicubic => "cubic",
        }
    }
}

/// Variables in which the metric ODEs are stepped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricVariables {
    /// λ and μ directly.
    Areal,
    /// `λ − ln t` and `μ + ln t`, both constant on de Sitter.
    Rescaled,
}

impl MetricVariables {
    pub fn name(self) -> &'static str {
        match self {
            MetricVariables::Areal => "areal",
            MetricVariables::Rescaled => "rescaled",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialDataParams {
    /// Overall amplitude `f0 ≥ 0`; zero gives a vacuum run.
    pub f0: f64,
    /// Relative amplitude of the `cos(2πr)` modulation.
    pub amplitude: f64,
    /// Half-width of the momentum bump in `w` at `t0`.
    pub w_sup: f64,
    /// Extent of the bump in `F`.
    pub f_sup: f64,
    /// Constant initial value of λ.
    pub lambda0: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub symmetry: SymmetryClass,
    pub cosmological_constant: f64,
    pub t0: f64,
    pub t_end: f64,
    pub nr: usize,
    pub nw: usize,
    pub nf: usize,
    /// Half-width of the momentum grid at `t0`.
    pub w_max: f64,
    pub f_max: f64,
    pub cfl: f64,
    /// Largest step as a fraction of `t`, before the CFL factor.
    pub dt_cap: f64,
    pub output_every: usize,
    /// Distribution snapshots are written every this many records (0 = first and last only).
    pub snapshot_every: usize,
    pub init: InitialDataParams,
    pub sobolev_weight: f64,
    pub sobolev_order: usize,
    pub interpolation: Interpolation,
    pub variables: MetricVariables,
    /// Time window `(lo, hi)` for decay fits; the last decade when absent.
    pub fit_window: Option<(f64, f64)>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            symmetry: SymmetryClass::Plane,
            cosmological_constant: 3.0,
            t0: 1.0,
            t_end: 100.0,
            nr: 64,
            nw: 128,
            nf: 8,
            w_max: 0.5,
            f_max: 1.0,
            cfl: 0.5,
            dt_cap: 0.05,
            output_every: 1,
            snapshot_every: 0,
            init: InitialDataParams { f0: 0.02, amplitude: 0.3, w_sup: 0.4, f_sup: 0.8, lambda0: 0.0 },
            sobolev_weight: 3.0,
            sobolev_order: 4,
            interpolation: Interpolation::Bicubic,
            variables: MetricVariables::Rescaled,
            fit_window: None,
        }
    }
}

/// One failed invariant of a [`SimConfig`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    SphericalInitialTime { t0: f64, bound: f64 },
    GridTooSmall { axis: &'static str, n: usize },
    NonPositive { key: &'static str, value: f64 },
    EndBeforeStart { t0: f64, t_end: f64 },
    CflOutOfRange(f64),
    SobolevWeight(f64),
    SobolevOrder(usize),
    ModulationTooNegative(f64),
    NegativeAmplitude(f64),
    SupportOutsideGrid { key: &'static str, support: f64, extent: f64 },
    OutputCadence,
    FitWindow { lo: f64, hi: f64 },
    TooFewLevels(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SphericalInitialTime { t0, bound } => {
                write!(f, "spherical requires t0 > Λ^(−1/2) ≈ {bound:.3} (got t0 = {t0})")
            }
            Violation::GridTooSmall { axis, n } => write!(f, "grid too small: {axis} = {n} (need ≥ 4)"),
            Violation::NonPositive { key, value } => write!(f, "{key} must be positive (got {value})"),
            Violation::EndBeforeStart { t0, t_end } => write!(f, "t_end = {t_end} must exceed t0 = {t0}"),
            Violation::CflOutOfRange(c) => write!(f, "cfl must lie in (0, 1] (got {c})"),
            Violation::SobolevWeight(z) => write!(f, "Sobolev weight z must exceed 5/2 (got {z})"),
            Violation::SobolevOrder(l) => write!(f, "Sobolev order l must lie in 0..=4 (got {l})"),
            Violation::ModulationTooNegative(a) => write!(f, "modulation A must exceed −1 (got {a})"),
            Violation::NegativeAmplitude(a) => write!(f, "f0 must be non-negative (got {a})"),
            Violation::SupportOutsideGrid { key, support, extent } => {
                write!(f, "initial support {key} = {support} must lie strictly inside the grid extent {extent}")
            }
            Violation::OutputCadence => write!(f, "output_every must be ≥ 1"),
            Violation::FitWindow { lo, hi } => write!(f, "fit window [{lo}, {hi}] must satisfy 0 < lo < hi"),
            Violation::TooFewLevels(n) => write!(f, "convergence needs at least 3 levels (got {n})"),
        }
    }
}

/// Returns the config iff every invariant holds, otherwise the full list of violations.
pub fn validate_config(cfg: SimConfig) -> std::result::Result<SimConfig, Vec<Violation>> {
    let mut v = Vec::new();
    let lam = cfg.cosmological_constant;
    if !(lam > 0.0) {
        v.push(Violation::NonPositive { key: "geometry.Lambda", value: lam });
    }
    if !(cfg.t0 > 0.0) {
        v.push(Violation::NonPositive { key: "run.t0", value: cfg.t0 });
    }
    if !(cfg.t_end > cfg.t0) {
        v.push(Violation::EndBeforeStart { t0: cfg.t0, t_end: cfg.t_end });
    }
    if cfg.symmetry == SymmetryClass::Spherical && lam > 0.0 {
        let bound = lam.powf(-0.5);
        if !(cfg.t0 > bound) {
            v.push(Violation::SphericalInitialTime { t0: cfg.t0, bound });
        }
    }
    for (axis, n) in [("Nr", cfg.nr), ("Nw", cfg.nw), ("NF", cfg.nf)] {
        if n < 4 {
            v.push(Violation::GridTooSmall { axis, n });
        }
    }
    for (key, value) in [("grid.w_max", cfg.w_max), ("grid.F_max", cfg.f_max)] {
        if !(value > 0.0) {
            v.push(Violation::NonPositive { key, value });
        }
    }
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        v.push(Violation::CflOutOfRange(cfg.cfl));
    }
    if !(cfg.dt_cap > 0.0) {
        v.push(Violation::NonPositive { key: "run.dt_cap", value: cfg.dt_cap });
    }
    if cfg.output_every == 0 {
        v.push(Violation::OutputCadence);
    }
    if let Some((lo, hi)) = cfg.fit_window {
        if !(lo > 0.0 && hi > lo) {
            v.push(Violation::FitWindow { lo, hi });
        }
    }
    if !(cfg.sobolev_weight > 2.5) {
        v.push(Violation::SobolevWeight(cfg.sobolev_weight));
    }
    if cfg.sobolev_order > 4 {
        v.push(Violation::SobolevOrder(cfg.sobolev_order));
    }
    let init = &cfg.init;
    if !(init.f0 >= 0.0) {
        v.push(Violation::NegativeAmplitude(init.f0));
    }
    if !(init.amplitude > -1.0) {
        v.push(Violation::ModulationTooNegative(init.amplitude));
    }
    if !(init.w_sup > 0.0) {
        v.push(Violation::NonPositive { key: "init.w_sup", value: init.w_sup });
    } else if !(init.w_sup < cfg.w_max) {
        v.push(Violation::SupportOutsideGrid { key: "init.w_sup", support: init.w_sup, extent: cfg.w_max });
    }
    if !(init.f_sup > 0.0) {
        v.push(Violation::NonPositive { key: "init.F_sup", value: init.f_sup });
    } else if !(init.f_sup <= cfg.f_max) {
        v.push(Violation::SupportOutsideGrid { key: "init.F_sup", support: init.f_sup, extent: cfg.f_max });
    }
    if v.is_empty() {
        Ok(cfg)
    } else {
        Err(v)
    }
}

impl SimConfig {
    pub fn validated(self) -> Result<Self> {
        validate_config(self).map_err(Error::Config)
    }

    /// Configured fit window, or the last decade of the run.
    pub fn window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or((self.t_end / 10.0, self.t_end))
    }

    pub fn hubble(&self) -> f64 {
        (self.cosmological_constant / 3.0).sqrt()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses the flat `key = value` format. Unknown keys are an error, missing keys keep defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SimConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: line_no, message: format!("expected `key = value`, got `{line}`") })?;
            cfg.set(key.trim(), value.trim()).map_err(|message| Error::Parse { line: line_no, message })?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn real(key: &str, v: &str) -> std::result::Result<f64, String> {
            v.parse::<f64>().map_err(|_| format!("{key}: expected a real number, got `{v}`"))
        }
        fn count(key: &str, v: &str) -> std::result::Result<usize, String> {
            v.parse::<usize>().map_err(|_| format!("{key}: expected a non-negative integer, got `{v}`"))
        }
        match key {
            "geometry.K" => {
                let k = value.parse::<i64>().map_err(|_| format!("geometry.K: expected an integer, got `{value}`"))?;
                self.symmetry =
                    SymmetryClass::from_k(k).ok_or_else(|| format!("geometry.K must be -1, 0 or 1 (got {k})"))?;
            }
            "geometry.Lambda" => self.cosmological_constant = real(key, value)?,
            "run.t0" => self.t0 = real(key, value)?,
            "run.t_end" => self.t_end = real(key, value)?,
            "run.cfl" => self.cfl = real(key, value)?,
            "run.dt_cap" => self.dt_cap = real(key, value)?,
            "run.output_every" => self.output_every = count(key, value)?,
            "run.snapshot_every" => self.snapshot_every = count(key, value)?,
            "grid.Nr" => self.nr = count(key, value)?,
            "grid.Nw" => self.nw = count(key, value)?,
            "grid.NF" => self.nf = count(key, value)?,
            "grid.w_max" => self.w_max = real(key, value)?,
            "grid.F_max" => self.f_max = real(key, value)?,
            "init.f0" => self.init.f0 = real(key, value)?,
            "init.A" => self.init.amplitude = real(key, value)?,
            "init.w_sup" => self.init.w_sup = real(key, value)?,
            "init.F_sup" => self.init.f_sup = real(key, value)?,
            "init.lambda0" => self.init.lambda0 = real(key, value)?,
            "norm.z" => self.sobolev_weight = real(key, value)?,
            "norm.l" => self.sobolev_order = count(key, value)?,
            "transport.interp" => {
                self.interpolation = match value {
                    "linear" => Interpolation::Bilinear,
                    "cubic" => Interpolation::Bicubic,
                    other => return Err(format!("transport.interp must be `linear` or `cubic` (got `{other}`)")),
                }
            }
            "run.fit_window" => {
                let (a, b) = value
                    .split_once(',')
                    .ok_or_else(|| format!("run.fit_window: expected `lo, hi`, got `{value}`"))?;
                self.fit_window = Some((real(key, a.trim())?, real(key, b.trim())?));
            }
            "run.variables" => {
                self.variables = match value {
                    "areal" => MetricVariables::Areal,
                    "rescaled" => MetricVariables::Rescaled,
                    other => return Err(format!("run.variables must be `areal` or `rescaled` (got `{other}`)")),
                }
            }
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Renders the config in the same format `parse` reads back.
    pub fn to_text(&self) -> String {
        let mut m: BTreeMap<&str, String> = BTreeMap::new();
        m.insert("geometry.K", self.symmetry.to_string());
        m.insert("geometry.Lambda", fmt_real(self.cosmological_constant));
        m.insert("run.t0", fmt_real(self.t0));
        m.insert("run.t_end", fmt_real(self.t_end));
        m.insert("run.cfl", fmt_real(self.cfl));
        m.insert("run.dt_cap", fmt_real(self.dt_cap));
        m.insert("run.output_every", self.output_every.to_string());
        m.insert("run.snapshot_every", self.snapshot_every.to_string());
        m.insert("grid.Nr", self.nr.to_string());
        m.insert("grid.Nw", self.nw.to_string());
        m.insert("grid.NF", self.nf.to_string());
        m.insert("grid.w_max", fmt_real(self.w_max));
        m.insert("grid.F_max", fmt_real(self.f_max));
        m.insert("init.f0", fmt_real(self.init.f0));
        m.insert("init.A", fmt_real(self.init.amplitude));
        m.insert("init.w_sup", fmt_real(self.init.w_sup));
        m.insert("init.F_sup", fmt_real(self.init.f_sup));
        m.insert("init.lambda0", fmt_real(self.init.lambda0));
        m.insert("norm.z", fmt_real(self.sobolev_weight));
        m.insert("norm.l", self.sobolev_order.to_string());
        m.insert("transport.interp", self.interpolation.name().to_string());
        m.insert("run.variables", self.variables.name().to_string());
        if let Some((lo, hi)) = self.fit_window {
            m.insert("run.fit_window", format!("{}, {}", fmt_real(lo), fmt_real(hi)));
        }
        m.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn fmt_real(x: f64) -> String {
    // `{:?}` round-trips exactly
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sane() -> SimConfig {
        SimConfig { t0: 1.0, ..SimConfig::default() }
    }

    #[test]
    fn default_is_valid() {
        assert!(validate_config(sane()).is_ok());
    }

    #[test]
    fn spherical_early_time_is_named() {
        let cfg = SimConfig { symmetry: SymmetryClass::Spherical, cosmological_constant: 3.0, t0: 0.5, ..sane() };
        let errs = validate_config(cfg).unwrap_err();
        assert_eq!(errs.len(), 1);
        match errs[0] {
            Violation::SphericalInitialTime { bound, .. } => assert!((bound - 0.577_350_269).abs() < 1e-8),
            ref other => panic!("unexpected {other:?}"),
        }
        let msg = errs[0].to_string();
        assert!(msg.contains("spherical requires t0 > Λ^(−1/2) ≈ 0.577"), "{msg}");
    }

    #[test]
    fn spherical_late_time_accepted() {
        let cfg = SimConfig { symmetry: SymmetryClass::Spherical, t0: 2.0 / 3f64.sqrt(), ..sane() };
        assert!(validate_config(cfg).is_ok());
    }

    #[test]
    fn small_grid_rejected() {
        let errs = validate_config(SimConfig { nr: 2, ..sane() }).unwrap_err();
        assert_eq!(errs, vec![Violation::GridTooSmall { axis: "Nr", n: 2 }]);
        assert!(errs[0].to_string().contains("grid too small"));
    }

    #[test]
    fn all_violations_reported() {
        let cfg = SimConfig {
            nr: 1,
            nw: 3,
            cfl: 1.5,
            sobolev_weight: 2.0,
            sobolev_order: 5,
            t_end: 0.5,
            ..sane()
        };
        let errs = validate_config(cfg).unwrap_err();
        assert_eq!(errs.len(), 6, "{errs:?}");
    }

    #[test]
    fn support_must_fit_grid() {
        let mut cfg = sane();
        cfg.init.w_sup = 0.6;
        let errs = validate_config(cfg).unwrap_err();
        assert!(matches!(errs[0], Violation::SupportOutsideGrid { key: "init.w_sup", .. }));
    }

    #[test]
    fn parse_roundtrip() {
        let mut cfg = sane();
        cfg.symmetry = SymmetryClass::Hyperbolic;
        cfg.init.f0 = 0.0123;
        cfg.interpolation = Interpolation::Bilinear;
        cfg.variables = MetricVariables::Areal;
        cfg.fit_window = Some((10.0, 100.0));
        let back = SimConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn parse_comments_and_errors() {
        let cfg = SimConfig::parse("# header\ngrid.Nr = 32 # inline\n\nrun.t_end=50\n").unwrap();
        assert_eq!(cfg.nr, 32);
        assert_eq!(cfg.t_end, 50.0);
        match SimConfig::parse("grid.Nr = 8\nbogus.key = 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(SimConfig::parse("geometry.K = 2").is_err());
        assert!(SimConfig::parse("grid.Nr 8").is_err());
    }
}
