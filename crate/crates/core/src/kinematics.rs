//! Symmetry classes and mass-shell kinematics shared by every module.
//!
//! Geometrized units (G = c = 1). The distribution function lives on the
//! reduced mass shell parametrised by the radial momentum `w = e^λ p¹` and
//! the conserved angular quantity `F = t⁴((p²)² + sin²_K θ (p³)²)`.

use std::fmt;

use crate::error::{Error, Result};

/// Curvature of the surfaces of symmetry.
///
/// Only the three values −1, 0 and +1 can be constructed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymmetryClass {
    Hyperbolic,
    Plane,
    Spherical,
}

impl SymmetryClass {
    pub fn from_k(k: i64) -> Option<Self> {
        match k {
            -1 => Some(SymmetryClass::Hyperbolic),
            0 => Some(SymmetryClass::Plane),
            1 => Some(SymmetryClass::Spherical),
            _ => None,
        }
    }

    pub fn k(self) -> i32 {
        match self {
            SymmetryClass::Hyperbolic => -1,
            SymmetryClass::Plane => 0,
            SymmetryClass::Spherical => 1,
        }
    }

    pub fn kf(self) -> f64 {
        f64::from(self.k())
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.k())
    }
}

/// `sin θ` for K = 1, `1` for K = 0, `sinh θ` for K = −1.
pub fn sin_k(class: SymmetryClass, theta: f64) -> f64 {
    match class {
        SymmetryClass::Spherical => theta.sin(),
        SymmetryClass::Plane => 1.0,
        SymmetryClass::Hyperbolic => theta.sinh(),
    }
}

/// Energy factor `V = sqrt(1 + w² + F/t²)` without domain checks.
///
/// Hot loops call this directly; callers guarantee `t > 0` and `F ≥ 0`.
#[inline]
pub fn energy_factor_unchecked(t: f64, w: f64, f: f64) -> f64 {
    (1.0 + w * w + f / (t * t)).sqrt()
}

/// Energy factor `V = sqrt(1 + w² + F/t²)`; always ≥ 1.
pub fn energy_factor(t: f64, w: f64, f: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("V requires t > 0, got t = {t}")));
    }
    if !(f >= 0.0) {
        return Err(Error::Domain(format!("V requires F >= 0, got F = {f}")));
    }
    Ok(energy_factor_unchecked(t, w, f))
}

/// A point `(t, w, F)` of the reduced mass shell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassShellPoint {
    t: f64,
    w: f64,
    f: f64,
}

impl MassShellPoint {
    pub fn new(t: f64, w: f64, f: f64) -> Result<Self> {
        // validates the domain once
        energy_factor(t, w, f)?;
        Ok(Self { t, w, f })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn angular(&self) -> f64 {
        self.f
    }

    pub fn energy(&self) -> f64 {
        energy_factor_unchecked(self.t, self.w, self.f)
    }

    /// Comoving momentum `u = t w`, asymptotically constant along characteristics.
    pub fn comoving(&self) -> f64 {
        self.t * self.w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn sin_k_cases() {
        assert_eq!(sin_k(SymmetryClass::Plane, 0.7), 1.0);
        assert!((sin_k(SymmetryClass::Spherical, FRAC_PI_2) - 1.0).abs() < 1e-15);
        assert_eq!(sin_k(SymmetryClass::Hyperbolic, 0.0), 0.0);
    }

    #[test]
    fn symmetry_class_roundtrip() {
        for k in -1..=1 {
            assert_eq!(SymmetryClass::from_k(k).unwrap().k() as i64, k);
        }
        assert!(SymmetryClass::from_k(2).is_none());
        assert!(SymmetryClass::from_k(-2).is_none());
    }

    #[test]
    fn energy_factor_values() {
        assert_eq!(energy_factor(1.0, 0.0, 0.0).unwrap(), 1.0);
        assert!((energy_factor(2.0, 1.0, 4.0).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        // 1 + 0.09 + 2/100 = 1.11
        let v = energy_factor(10.0, 0.3, 2.0).unwrap();
        assert!((v - 1.053_565_375_285_273_6).abs() < 1e-15);
    }

    #[test]
    fn energy_factor_rejects_bad_domain() {
        assert!(energy_factor(0.0, 0.1, 0.1).is_err());
        assert!(energy_factor(-1.0, 0.1, 0.1).is_err());
        assert!(energy_factor(1.0, 0.1, -1e-9).is_err());
        assert!(MassShellPoint::new(1.0, 0.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn energy_factor_bounds_and_monotonicity(
            t in 0.01f64..100.0,
            w in -5.0f64..5.0,
            f in 0.0f64..10.0,
            dw in 0.0f64..1.0,
            df in 0.0f64..1.0,
            dt in 0.0f64..10.0,
        ) {
            let v = energy_factor(t, w, f).unwrap();
            prop_assert!(v >= 1.0);
            let wmag = w.abs();
            prop_assert!(energy_factor(t, wmag + dw, f).unwrap() >= energy_factor(t, wmag, f).unwrap());
            prop_assert!(energy_factor(t, w, f + df).unwrap() >= v);
            if f > 0.0 {
                prop_assert!(energy_factor(t + dt, w, f).unwrap() <= v);
            }
        }

        #[test]
        fn sin_k_plane_is_one(theta in -10.0f64..10.0) {
            prop_assert_eq!(sin_k(SymmetryClass::Plane, theta), 1.0);
        }
    }
}
