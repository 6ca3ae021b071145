//! Second-order finite-difference stencils.
//!
//! Periodic axes use centred differences with wrap-around; bounded axes use
//! centred differences in the interior and second-order one-sided stencils on
//! the two boundary rows.

/// First derivative of a periodic 1D sample.
pub fn periodic_first(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| (v[(i + 1) % n] - v[(i + n - 1) % n]) / (2.0 * h)).collect()
}

/// Second derivative of a periodic 1D sample.
pub fn periodic_second(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| (v[(i + 1) % n] - 2.0 * v[i] + v[(i + n - 1) % n]) / (h * h)).collect()
}

pub fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Shape of a row-major 3D array.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims3 {
    pub n0: usize,
    pub n1: usize,
    pub n2: usize,
}

impl Dims3 {
    pub fn len(&self) -> usize {
        self.n0 * self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n1 + j) * self.n2 + k
    }

    fn extent(&self, axis: usize) -> usize {
        match axis {
            0 => self.n0,
            1 => self.n1,
            2 => self.n2,
            _ => panic!("axis {axis} out of range"),
        }
    }

    fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => self.n1 * self.n2,
            1 => self.n2,
            2 => 1,
            _ => panic!("axis {axis} out of range"),
        }
    }
}

/// First derivative along `axis` of a row-major 3D array.
///
/// Requires at least three points along a non-periodic axis.
pub fn derivative_axis(data: &[f64], dims: Dims3, axis: usize, h: f64, periodic: bool) -> Vec<f64> {
    assert_eq!(data.len(), dims.len());
    let n = dims.extent(axis);
    let stride = dims.stride(axis);
    let mut out = vec![0.0; data.len()];
    for (flat, slot) in out.iter_mut().enumerate() {
        let pos = (flat / stride) % n;
        let base = flat - pos * stride;
        let at = |p: usize| data[base + p * stride];
        *slot = if periodic {
            (at((pos + 1) % n) - at((pos + n - 1) % n)) / (2.0 * h)
        } else if pos == 0 {
            (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
        } else if pos == n - 1 {
            (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
        } else {
            (at(pos + 1) - at(pos - 1)) / (2.0 * h)
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn periodic_stencils_converge_at_second_order() {
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let v: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 * h).sin()).collect();
            let d1 = periodic_first(&v, h);
            let d2 = periodic_second(&v, h);
            let e1 = (0..n)
                .map(|i| (d1[i] - 2.0 * PI * (2.0 * PI * i as f64 * h).cos()).abs())
                .fold(0.0, f64::max);
            let e2 = (0..n)
                .map(|i| (d2[i] + 4.0 * PI * PI * v[i]).abs())
                .fold(0.0, f64::max);
            (e1, e2)
        };
        let (a1, a2) = err(32);
        let (b1, b2) = err(64);
        assert!((a1 / b1).log2() > 1.95);
        assert!((a2 / b2).log2() > 1.95);
    }

    #[test]
    fn bounded_axis_exact_on_quadratics() {
        let dims = Dims3 { n0: 2, n1: 7, n2: 3 };
        let h = 0.25;
        let mut data = vec![0.0; dims.len()];
        for i in 0..2 {
            for j in 0..7 {
                for k in 0..3 {
                    let x = j as f64 * h;
                    data[dims.at(i, j, k)] = 1.0 + 2.0 * x + 3.0 * x * x + k as f64;
                }
            }
        }
        let d = derivative_axis(&data, dims, 1, h, false);
        for i in 0..2 {
            for j in 0..7 {
                for k in 0..3 {
                    let x = j as f64 * h;
                    assert!((d[dims.at(i, j, k)] - (2.0 + 6.0 * x)).abs() < 1e-12);
                }
            }
        }
        // constant along axis 2 derivative is one per index step
        let d2 = derivative_axis(&data, dims, 2, 1.0, false);
        assert!(d2.iter().all(|x| (x - 1.0).abs() < 1e-12));
    }
}
