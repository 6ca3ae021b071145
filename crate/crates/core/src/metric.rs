//! Metric functions λ, μ of `g = −e^{2μ}dt² + e^{2λ}dr² + t² g_K` and the
//! pointwise rate laws that evolve them.

use std::f64::consts::PI;

use crate::kinematics::SymmetryClass;
use crate::phase_space::MomentFields;

/// λ̇ from the Hamiltonian-type equation, pointwise in `r`.
pub fn lambda_dot(class: SymmetryClass, cosmo: f64, t: f64, mu: &[f64], rho: &[f64]) -> Vec<f64> {
    let k = class.kf();
    mu.iter()
        .zip(rho)
        .map(|(&m, &r)| ((8.0 * PI * t * t * r - k + cosmo * t * t) * (2.0 * m).exp() - 1.0) / (2.0 * t))
        .collect()
}

/// μ̇ from the radial-pressure equation, pointwise in `r`.
pub fn mu_dot(class: SymmetryClass, cosmo: f64, t: f64, mu: &[f64], p: &[f64]) -> Vec<f64> {
    let k = class.kf();
    mu.iter()
        .zip(p)
        .map(|(&m, &pp)| ((8.0 * PI * t * t * pp + k - cosmo * t * t) * (2.0 * m).exp() + 1.0) / (2.0 * t))
        .collect()
}

/// `μ′ = −4π t e^{λ+μ} j`, evaluated algebraically (no differencing).
pub fn mu_prime(t: f64, lambda: &[f64], mu: &[f64], j: &[f64]) -> Vec<f64> {
    lambda
        .iter()
        .zip(mu)
        .zip(j)
        .map(|((&l, &m), &jj)| -4.0 * PI * t * (l + m).exp() * jj)
        .collect()
}

/// Exact plane-symmetric vacuum solution without the decaying mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeSitterVacuum {
    pub cosmo: f64,
    /// λ at `t_ref`.
    pub lambda_ref: f64,
    pub t_ref: f64,
}

impl DeSitterVacuum {
    pub fn new(cosmo: f64, t_ref: f64, lambda_ref: f64) -> Self {
        Self { cosmo, lambda_ref, t_ref }
    }

    /// `e^{2μ} = 3/(Λ t²)`.
    pub fn exp_2mu(&self, t: f64) -> f64 {
        3.0 / (self.cosmo * t * t)
    }

    pub fn mu(&self, t: f64) -> f64 {
        0.5 * self.exp_2mu(t).ln()
    }

    /// `λ = ln t + const`.
    pub fn lambda(&self, t: f64) -> f64 {
        self.lambda_ref + (t / self.t_ref).ln()
    }

    pub fn lambda_dot(&self, t: f64) -> f64 {
        1.0 / t
    }

    pub fn mu_dot(&self, t: f64) -> f64 {
        -1.0 / t
    }
}

/// `(λ, e^{2μ})` of the vacuum solution with `λ(1) = lambda_at_one`.
pub fn vacuum_de_sitter(cosmo: f64, t: f64, lambda_at_one: f64) -> (f64, f64) {
    let v = DeSitterVacuum::new(cosmo, 1.0, lambda_at_one);
    (v.lambda(t), v.exp_2mu(t))
}

/// λ, μ on the `r`-grid at areal time `t`, with cached rates.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricState {
    pub t: f64,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub lambda_dot: Vec<f64>,
    pub mu_dot: Vec<f64>,
    /// Algebraic μ′ from the momentum constraint.
    pub mu_prime: Vec<f64>,
}

impl MetricState {
    /// Builds a state and fills its rate cache from the given moments.
    pub fn with_rates(
        class: SymmetryClass,
        cosmo: f64,
        t: f64,
        lambda: Vec<f64>,
        mu: Vec<f64>,
        moments: &MomentFields,
    ) -> Self {
        let mut s = Self { t, lambda, mu, lambda_dot: Vec::new(), mu_dot: Vec::new(), mu_prime: Vec::new() };
        s.refresh_rates(class, cosmo, moments);
        s
    }

    pub fn refresh_rates(&mut self, class: SymmetryClass, cosmo: f64, moments: &MomentFields) {
        self.lambda_dot = lambda_dot(class, cosmo, self.t, &self.mu, &moments.rho);
        self.mu_dot = mu_dot(class, cosmo, self.t, &self.mu, &moments.p);
        self.mu_prime = mu_prime(self.t, &self.lambda, &self.mu, &moments.j);
    }

    pub fn nr(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_finite(&self) -> bool {
        [&self.lambda, &self.mu, &self.lambda_dot, &self.mu_dot, &self.mu_prime]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PLANE: SymmetryClass = SymmetryClass::Plane;

    #[test]
    fn lambda_dot_examples() {
        assert!((lambda_dot(PLANE, 3.0, 1.0, &[0.0], &[0.0])[0] - 1.0).abs() < 1e-15);
        assert!((lambda_dot(SymmetryClass::Spherical, 3.0, 1.0, &[0.0], &[0.0])[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mu_dot_examples() {
        assert!((mu_dot(PLANE, 3.0, 1.0, &[0.0], &[0.0])[0] + 1.0).abs() < 1e-15);
        // bracket cancellation: 8πt²p + K − Λt² = 0
        let t = 2.0;
        let p = (3.0 * t * t) / (8.0 * PI * t * t);
        let md = mu_dot(PLANE, 3.0, t, &[0.3], &[p])[0];
        assert!((md - 1.0 / (2.0 * t)).abs() < 1e-15);
    }

    #[test]
    fn mu_prime_examples() {
        assert_eq!(mu_prime(1.0, &[0.0; 3], &[0.0; 3], &[0.0; 3]), vec![0.0; 3]);
        let mp = mu_prime(1.0, &[0.0, 0.0], &[0.0, 0.0], &[0.0, 1.0]);
        assert_eq!(mp[0], 0.0);
        assert!((mp[1] + 4.0 * PI).abs() < 1e-14);
    }

    /// Residuals of the two rate equations written in their original form.
    fn field_equation_residuals(k: f64, cosmo: f64, t: f64, lam_dot: f64, mu: f64, mu_dot: f64) -> (f64, f64) {
        let e = (-2.0 * mu).exp();
        (e * (2.0 * t * lam_dot + 1.0) + k - cosmo * t * t, e * (2.0 * t * mu_dot - 1.0) - k + cosmo * t * t)
    }

    #[test]
    fn de_sitter_solves_vacuum_equations() {
        for (cosmo, t) in [(3.0, 1.0), (3.0, 10.0), (1.0, 2.5), (7.0, 40.0)] {
            let v = DeSitterVacuum::new(cosmo, 1.0, 0.2);
            let mu = v.mu(t);
            let (r2, r3) = field_equation_residuals(0.0, cosmo, t, v.lambda_dot(t), mu, v.mu_dot(t));
            assert!(r2.abs() < 1e-10 * cosmo * t * t && r3.abs() < 1e-10 * cosmo * t * t);
            // the rate laws reproduce the closed-form rates
            let ld = lambda_dot(PLANE, cosmo, t, &[mu], &[0.0])[0];
            let md = mu_dot(PLANE, cosmo, t, &[mu], &[0.0])[0];
            assert!((ld - 1.0 / t).abs() < 1e-14 / t.min(1.0));
            assert!((md + 1.0 / t).abs() < 1e-14 / t.min(1.0));
        }
        let (l, e2m) = vacuum_de_sitter(3.0, 1.0, 0.7);
        assert_eq!((l, e2m), (0.7, 1.0));
        let (_, e2m) = vacuum_de_sitter(3.0, 10.0, 0.0);
        assert!((e2m - 1e-2).abs() < 1e-17);
        // d/dt of e^{2μ}=3/(Λt²) gives μ̇ = −1/t
        let v = DeSitterVacuum::new(3.0, 1.0, 0.0);
        let h = 1e-5;
        let fd = (v.mu(5.0 + h) - v.mu(5.0 - h)) / (2.0 * h);
        assert!((fd + 0.2).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn rate_laws_invert_field_equations(
            k in -1i64..=1, cosmo in 0.1f64..10.0, t in 0.2f64..50.0,
            mu in -5.0f64..2.0, rho in 0.0f64..1.0, p in 0.0f64..1.0,
        ) {
            let class = SymmetryClass::from_k(k).unwrap();
            let ld = lambda_dot(class, cosmo, t, &[mu], &[rho])[0];
            let md = mu_dot(class, cosmo, t, &[mu], &[p])[0];
            let (r2, r3) = field_equation_residuals(k as f64, cosmo, t, ld, mu, md);
            let scale = 1.0 + cosmo * t * t + 8.0 * PI * t * t * (rho + p);
            prop_assert!((r2 - 8.0 * PI * t * t * rho).abs() < 1e-10 * scale);
            prop_assert!((r3 - 8.0 * PI * t * t * p).abs() < 1e-10 * scale);
        }
    }
}
