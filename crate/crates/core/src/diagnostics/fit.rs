//! Power-law regression on `(t, value)` series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default minimum number of samples inside the fit window.
pub const MIN_FIT_SAMPLES: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Slope of `ln value` against `ln t`.
    pub exponent: f64,
    pub intercept: f64,
    /// RMS of the log-log residuals.
    pub residual: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub samples: usize,
}

/// Closed interval of times used for a fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitWindow {
    pub t_lo: f64,
    pub t_hi: f64,
}

impl FitWindow {
    pub fn new(t_lo: f64, t_hi: f64) -> Self {
        Self { t_lo, t_hi }
    }

    /// The last decade `[t_end/10, t_end]`.
    pub fn last_decade(t_end: f64) -> Self {
        Self { t_lo: t_end / 10.0, t_hi: t_end }
    }

    pub fn contains(&self, t: f64) -> bool {
        let slack = 1e-9 * self.t_hi.abs().max(1.0);
        t >= self.t_lo - slack && t <= self.t_hi + slack
    }

    /// Parses `lo,hi` or `lo:hi`.
    pub fn parse(text: &str) -> Result<Self> {
        let (a, b) = text
            .split_once([',', ':'])
            .ok_or_else(|| Error::Fit(format!("window `{text}`: expected `lo,hi`")))?;
        let lo = a.trim().parse::<f64>().map_err(|_| Error::Fit(format!("window `{text}`: bad lower bound")))?;
        let hi = b.trim().parse::<f64>().map_err(|_| Error::Fit(format!("window `{text}`: bad upper bound")))?;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Fit(format!("window `{text}`: need 0 < lo < hi")));
        }
        Ok(Self::new(lo, hi))
    }
}

/// Least-squares slope of `ln value` against `ln t` over `window` with at least [`MIN_FIT_SAMPLES`] points.
pub fn fit_decay_rate(series: &[(f64, f64)], window: FitWindow) -> Result<RateFit> {
    fit_decay_rate_with(series, window, MIN_FIT_SAMPLES)
}

pub fn fit_decay_rate_with(series: &[(f64, f64)], window: FitWindow, min_samples: usize) -> Result<RateFit> {
    if !(window.t_lo > 0.0 && window.t_hi > window.t_lo) {
        return Err(Error::Fit(format!("invalid window [{}, {}]", window.t_lo, window.t_hi)));
    }
    let mut pts = Vec::new();
    for &(t, v) in series.iter().filter(|(t, _)| window.contains(*t)) {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Fit(format!("non-positive value {v:e} at t = {t} (log undefined)")));
        }
        pts.push((t.ln(), v.ln()));
    }
    let n = pts.len();
    if n < min_samples.max(2) {
        return Err(Error::Fit(format!("only {n} samples in window (need ≥ {})", min_samples.max(2))));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all samples share one time".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - exponent * p.0).powi(2)).sum::<f64>() / nf).sqrt();
    Ok(RateFit { exponent, intercept, residual, t_lo: window.t_lo, t_hi: window.t_hi, samples: n })
}
