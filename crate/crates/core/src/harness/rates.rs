//! Decay-rate fits over a time series and the expected-exponent table.

use std::fmt;
use std::path::Path;

use crate::diagnostics::{fit_decay_rate, FitWindow, RateFit, COLUMNS};
use crate::error::{Error, Result};
use crate::harness::io::{self, read_table};

/// Admissible exponent interval for one monitored column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Expectation {
    pub column: &'static str,
    pub target: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Expectation {
    const fn band(column: &'static str, target: f64, tol: f64) -> Self {
        Self { column, target, lo: target - tol, hi: target + tol }
    }

    const fn at_most(column: &'static str, target: f64, hi: f64) -> Self {
        Self { column, target, lo: f64::NEG_INFINITY, hi }
    }

    pub fn admits(&self, exponent: f64) -> bool {
        exponent >= self.lo && exponent <= self.hi
    }
}

pub const EXPECTED: [Expectation; 7] = [
    Expectation::band("sup_rho", -3.0, 0.3),
    Expectation::band("sup_j", -4.0, 0.4),
    Expectation::band("sup_p", -5.0, 0.5),
    Expectation::band("sup_q", -5.0, 0.5),
    Expectation::at_most("sup_mu_prime", -3.0, -2.5),
    Expectation::at_most("nohair_g", -3.0, -2.5),
    Expectation::at_most("fhat_delta", -2.0, -1.5),
];

pub fn expectation(column: &str) -> Option<&'static Expectation> {
    EXPECTED.iter().find(|e| e.column == column)
}

#[derive(Clone, Debug, PartialEq)]
pub enum RateOutcome {
    Fitted(RateFit),
    Skipped(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "skipped",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub window: FitWindow,
    pub entries: Vec<(String, RateOutcome)>,
}

impl RateReport {
    pub fn fit(&self, column: &str) -> Option<&RateFit> {
        self.entries.iter().find_map(|(n, o)| match o {
            RateOutcome::Fitted(f) if n == column => Some(f),
            _ => None,
        })
    }

    pub fn exponent(&self, column: &str) -> Option<f64> {
        self.fit(column).map(|f| f.exponent)
    }

    pub fn fits(&self) -> Vec<(String, RateFit)> {
        self.entries
            .iter()
            .filter_map(|(n, o)| match o {
                RateOutcome::Fitted(f) => Some((n.clone(), f.clone())),
                RateOutcome::Skipped(_) => None,
            })
            .collect()
    }

    pub fn skipped(&self) -> Vec<(&str, &str)> {
        self.entries
            .iter()
            .filter_map(|(n, o)| match o {
                RateOutcome::Skipped(why) => Some((n.as_str(), why.as_str())),
                RateOutcome::Fitted(_) => None,
            })
            .collect()
    }

    pub fn verdict(&self, e: &Expectation) -> Verdict {
        match self.exponent(e.column) {
            Some(x) if e.admits(x) => Verdict::Pass,
            Some(_) => Verdict::Fail,
            None => Verdict::Skipped,
        }
    }

    /// True when no expected column fails. Skipped columns do not count as failures.
    pub fn all_pass(&self) -> bool {
        EXPECTED.iter().all(|e| self.verdict(e) != Verdict::Fail)
    }

    /// Human-readable table against [`EXPECTED`].
    pub fn summary(&self) -> String {
        let mut s = format!("window [{}, {}]\n", self.window.t_lo, self.window.t_hi);
        for e in &EXPECTED {
            let got = self.exponent(e.column).map(|x| format!("{x:+.3}")).unwrap_or_else(|| "n/a".into());
            let range = if e.lo.is_finite() { format!("[{:+.2}, {:+.2}]", e.lo, e.hi) } else { format!("≤ {:+.2}", e.hi) };
            s += &format!("{:<14} target {:+.1} {:<16} got {:<8} {}\n", e.column, e.target, range, got, self.verdict(e));
        }
        for (n, why) in self.skipped() {
            s += &format!("skipped {n}: {why}\n");
        }
        s
    }
}

/// Fits every column except `t` with `series(column)`.
pub fn rates_for_series(series: impl Fn(&str) -> Vec<(f64, f64)>, window: FitWindow) -> RateReport {
    let entries = COLUMNS[1..]
        .iter()
        .map(|&c| {
            let outcome = match fit_decay_rate(&series(c), window) {
                Ok(f) => RateOutcome::Fitted(f),
                Err(e) => RateOutcome::Skipped(match e {
                    Error::Fit(m) => m,
                    other => other.to_string(),
                }),
            };
            (c.to_string(), outcome)
        })
        .collect();
    RateReport { window, entries }
}

/// Writes `rates.csv` and, next to it, `rates_summary.csv` with one verdict per expected column.
pub fn write_rates_report(path: &Path, report: &RateReport) -> Result<()> {
    io::write_rates(path, &report.fits())?;
    let summary = path.with_file_name(RATES_SUMMARY);
    let mut w = csv::Writer::from_path(&summary).map_err(|e| Error::csv(&summary, e))?;
    w.write_record(["name", "target", "lo", "hi", "exponent", "verdict"]).map_err(|e| Error::csv(&summary, e))?;
    for e in &EXPECTED {
        let got = report.exponent(e.column).map(|x| format!("{x:?}")).unwrap_or_default();
        w.write_record([e.column.to_string(), format!("{:?}", e.target), format!("{:?}", e.lo), format!("{:?}", e.hi), got, report.verdict(e).to_string()])
            .map_err(|err| Error::csv(&summary, err))?;
    }
    w.flush().map_err(|e| Error::io(&summary, e))
}

pub const RATES_SUMMARY: &str = "rates_summary.csv";

/// Fits the columns of `timeseries` over `window` (default: last decade) and writes into `out`.
pub fn cmd_rates(timeseries: &Path, window: Option<FitWindow>, out: &Path) -> Result<RateReport> {
    let table = read_table(timeseries)?;
    if table.columns.first().map(String::as_str) != Some("t") {
        return Err(Error::Format { path: timeseries.to_path_buf(), message: "first column must be `t`".into() });
    }
    let t_end = table.rows.iter().filter_map(|r| r[0]).fold(f64::NAN, f64::max);
    if !t_end.is_finite() {
        return Err(Error::Format { path: timeseries.to_path_buf(), message: "no rows".into() });
    }
    let window = window.unwrap_or_else(|| FitWindow::last_decade(t_end));
    let report = rates_for_series(|c| table.series(c).unwrap_or_default(), window);
    io::ensure_dir(out)?;
    write_rates_report(&out.join(io::RATES), &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::DiagnosticsRecord;
    use crate::harness::io::write_timeseries;

    fn synthetic() -> Vec<DiagnosticsRecord> {
        (0..40)
            .map(|i| {
                let t = 10f64.powf(i as f64 / 39.0 * 2.0);
                DiagnosticsRecord {
                    t,
                    sup_rho: 0.5 * t.powi(-3),
                    sup_p: 2.0 * t.powi(-5),
                    sup_j: t.powi(-4),
                    sup_q: 3.0 * t.powi(-5),
                    lambda_dot_dev: t.powi(-3),
                    mu_dot_dev: t.powi(-3),
                    emu_dev: t.powi(-2),
                    sup_mu_prime: 7.0 * t.powi(-3),
                    sup_rho_prime: t.powi(-3),
                    sup_lambda_prime: 0.0,
                    sup_mu_pp: t.powi(-3),
                    support_wt: 0.4,
                    e0: t.powi(-1),
                    t_e0: 1.0,
                    e1: t.powi(-1),
                    t_e1: 1.0,
                    eq4_residual: 1e-3 * t.powi(-1),
                    eq5_residual: (i > 1).then(|| 1e-3 * t.powi(-2)),
                    nohair_g: t.powi(-3),
                    nohair_k: t.powi(-2),
                    fhat_delta: (i > 0).then(|| t.powi(-2)),
                    sup_lambda_dot_prime: t.powi(-4),
                    sup_mu_dot_prime: t.powi(-4),
                }
            })
            .collect()
    }

    #[test]
    fn exact_power_laws_all_pass() {
        let dir = tempfile::tempdir().unwrap();
        let ts = dir.path().join(io::TIMESERIES);
        write_timeseries(&ts, &synthetic()).unwrap();
        let report = cmd_rates(&ts, Some(FitWindow::new(10.0, 100.0)), dir.path()).unwrap();
        for (e, x) in [("sup_rho", -3.0), ("sup_j", -4.0), ("sup_p", -5.0), ("sup_q", -5.0), ("nohair_g", -3.0), ("fhat_delta", -2.0)] {
            assert!((report.exponent(e).unwrap() - x).abs() < 1e-10, "{e}");
        }
        assert!(EXPECTED.iter().all(|e| report.verdict(e) == Verdict::Pass));
        let (name, why) = report.skipped()[0];
        assert_eq!(name, "sup_lambda_prime");
        assert!(why.contains("non-positive"));
        let mut rdr = csv::Reader::from_path(dir.path().join(io::RATES)).unwrap();
        assert_eq!(rdr.headers().unwrap(), vec!["name", "exponent", "intercept", "residual", "t_lo", "t_hi"]);
        assert_eq!(rdr.records().count(), report.fits().len());
        assert!(dir.path().join(RATES_SUMMARY).exists());
    }

    #[test]
    fn failing_exponent_is_flagged() {
        let mut recs = synthetic();
        for r in &mut recs {
            r.sup_rho = r.t.powi(-2);
        }
        let report = rates_for_series(
            |c| {
                let idx = COLUMNS.iter().position(|x| *x == c).unwrap();
                recs.iter().filter_map(|r| r.values()[idx].map(|v| (r.t, v))).collect()
            },
            FitWindow::new(10.0, 100.0),
        );
        assert_eq!(report.verdict(expectation("sup_rho").unwrap()), Verdict::Fail);
        assert!(!report.all_pass());
        assert!(report.summary().contains("FAIL"));
    }

    #[test]
    fn default_window_is_last_decade() {
        let dir = tempfile::tempdir().unwrap();
        let ts = dir.path().join(io::TIMESERIES);
        write_timeseries(&ts, &synthetic()).unwrap();
        let report = cmd_rates(&ts, None, dir.path()).unwrap();
        assert_eq!(report.window, FitWindow::new(10.0, 100.0));
    }
}
