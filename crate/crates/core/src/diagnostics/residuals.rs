//! Residuals of the momentum constraint and of the second-order field equation.

use std::f64::consts::PI;

use crate::fd::{periodic_first, periodic_second};
use crate::metric::MetricState;
use crate::phase_space::MomentFields;

/// `sup_r |D_r μ + 4π t e^{λ+μ} j|` with a centred periodic difference.
pub fn eq4_residual(metric: &MetricState, moments: &MomentFields) -> f64 {
    let h = 1.0 / metric.nr() as f64;
    let dmu = periodic_first(&metric.mu, h);
    (0..metric.nr())
        .map(|i| (dmu[i] + 4.0 * PI * metric.t * (metric.lambda[i] + metric.mu[i]).exp() * moments.j[i]).abs())
        .fold(0.0, f64::max)
}

/// `λ̈` at the newest of three levels `(t, λ̇)`, oldest first.
///
/// Differentiates `λ̇ − 1/t` with the second-order backward stencil on the
/// non-uniform times and adds back `−1/t²` exactly.
pub fn lambda_ddot_backward(levels: [(f64, &[f64]); 3]) -> Vec<f64> {
    let [(ta, a), (tb, b), (tc, c)] = levels;
    let h1 = tb - ta;
    let h2 = tc - tb;
    let ca = h2 / (h1 * (h1 + h2));
    let cb = -(h1 + h2) / (h1 * h2);
    let cc = (2.0 * h2 + h1) / (h2 * (h1 + h2));
    (0..c.len())
        .map(|i| {
            let ga = a[i] - 1.0 / ta;
            let gb = b[i] - 1.0 / tb;
            let gc = c[i] - 1.0 / tc;
            ca * ga + cb * gb + cc * gc - 1.0 / (tc * tc)
        })
        .collect()
}

/// `sup_r` of the second-order field equation's left side minus `4πq`.
pub fn eq5_residual(cosmo: f64, metric: &MetricState, moments: &MomentFields, lambda_ddot: &[f64]) -> f64 {
    let n = metric.nr();
    let h = 1.0 / n as f64;
    let t = metric.t;
    let mu_p = periodic_first(&metric.mu, h);
    let mu_pp = periodic_second(&metric.mu, h);
    let lam_p = periodic_first(&metric.lambda, h);
    (0..n)
        .map(|i| {
            let spatial = (-2.0 * metric.lambda[i]).exp() * (mu_pp[i] + mu_p[i] * (mu_p[i] - lam_p[i]));
            let ld = metric.lambda_dot[i];
            let temporal = (-2.0 * metric.mu[i]).exp() * (lambda_ddot[i] + (ld - metric.mu_dot[i]) * (ld + 1.0 / t));
            (spatial - temporal + cosmo - 4.0 * PI * moments.q[i]).abs()
        })
        .fold(0.0, f64::max)
}

/// `(eq4, eq5)`; eq5 is absent without a `λ̈` estimate.
pub fn constraint_residuals(
    cosmo: f64,
    metric: &MetricState,
    moments: &MomentFields,
    lambda_ddot: Option<&[f64]>,
) -> (f64, Option<f64>) {
    (eq4_residual(metric, moments), lambda_ddot.map(|ldd| eq5_residual(cosmo, metric, moments, ldd)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::SymmetryClass;
    use crate::metric::DeSitterVacuum;

    fn de_sitter(t: f64) -> MetricState {
        let v = DeSitterVacuum::new(3.0, 1.0, 0.2);
        MetricState::with_rates(
            SymmetryClass::Plane,
            3.0,
            t,
            vec![v.lambda(t); 8],
            vec![v.mu(t); 8],
            &MomentFields::zeros(8, t),
        )
    }

    #[test]
    fn vacuum_residuals_at_rounding_floor() {
        let ts = [4.0, 4.3, 4.5];
        let ms: Vec<_> = ts.iter().map(|&t| de_sitter(t)).collect();
        let ldd = lambda_ddot_backward([(ts[0], &ms[0].lambda_dot), (ts[1], &ms[1].lambda_dot), (ts[2], &ms[2].lambda_dot)]);
        assert!(ldd.iter().all(|x| (x + 1.0 / (4.5 * 4.5)).abs() < 1e-13));
        let (e4, e5) = constraint_residuals(3.0, &ms[2], &MomentFields::zeros(8, 4.5), Some(&ldd));
        assert!(e4 < 1e-14);
        assert!(e5.unwrap() < 1e-11, "{e5:?}");
        assert_eq!(constraint_residuals(3.0, &ms[2], &MomentFields::zeros(8, 4.5), None).1, None);
    }

    #[test]
    fn backward_stencil_is_second_order() {
        // g(t) = sin t added on top of 1/t
        let err = |h: f64| {
            let t = [1.0, 1.0 + h, 1.0 + 2.5 * h];
            let v: Vec<Vec<f64>> = t.iter().map(|&s| vec![1.0 / s + s.sin()]).collect();
            let ldd = lambda_ddot_backward([(t[0], &v[0]), (t[1], &v[1]), (t[2], &v[2])]);
            (ldd[0] - (t[2].cos() - 1.0 / (t[2] * t[2]))).abs()
        };
        let (a, b) = (err(0.02), err(0.01));
        assert!((a / b).log2() > 1.9, "{a} {b}");
    }

    #[test]
    fn eq4_residual_detects_inconsistent_current() {
        let m = de_sitter(3.0);
        let mut mom = MomentFields::zeros(8, 3.0);
        mom.j[2] = 1e-3;
        let r = eq4_residual(&m, &mom);
        let expected = 4.0 * PI * 3.0 * (m.lambda[2] + m.mu[2]).exp() * 1e-3;
        assert!((r - expected).abs() < 1e-15);
    }
}
