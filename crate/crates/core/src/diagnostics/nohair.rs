//! Distances of the rescaled induced geometry from its de Sitter limit.

use crate::kinematics::{sin_k, SymmetryClass};
use crate::metric::MetricState;

/// Polar angle at which the `φφ` component is sampled.
pub const ANGULAR_SAMPLE_THETA: f64 = 1.0;

/// `λ∞(r) = λ(t, r) − ln t` from a single (late) snapshot.
pub fn lambda_infinity(metric: &MetricState) -> Vec<f64> {
    let lt = metric.t.ln();
    metric.lambda.iter().map(|l| l - lt).collect()
}

/// `(nohair_g, nohair_k)` against the limit `e^{2λ∞} dr² + g_K`.
///
/// `nohair_g = sup_r |e^{2λ}/t² − e^{2λ∞}|`; `nohair_k` is the largest of
/// `|t⁻² k̄_ij − H ḡ∞_ij|` over `rr`, `θθ`, `φφ`, with `k̄ = ½ e^{−μ} ∂_t ḡ`.
pub fn nohair_distances(class: SymmetryClass, cosmo: f64, metric: &MetricState, lambda_inf: &[f64]) -> (f64, f64) {
    let t = metric.t;
    let h = (cosmo / 3.0).sqrt();
    let lt = t.ln();
    let s2 = sin_k(class, ANGULAR_SAMPLE_THETA).powi(2);
    let mut g = 0.0_f64;
    let mut k = 0.0_f64;
    for i in 0..metric.nr() {
        let scaled = (2.0 * (metric.lambda[i] - lt)).exp();
        let limit = (2.0 * lambda_inf[i]).exp();
        g = g.max((scaled - limit).abs());
        let em = (-metric.mu[i]).exp();
        let rr = (em * metric.lambda_dot[i] * scaled - h * limit).abs();
        let th = (em / t - h).abs();
        k = k.max(rr).max(th).max(th * s2);
    }
    (g, k)
}
