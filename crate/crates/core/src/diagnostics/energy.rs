//! Weighted L² energies of the distribution function.

use crate::fd::derivative_axis;
use crate::phase_space::{DistributionFn, PhaseSpaceGrid};

fn weighted_square_sum(data: &[f64], grid: &PhaseSpaceGrid, t: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..grid.nr {
        for j in 0..grid.nw {
            let c = grid.w_weight(j);
            let base = grid.idx(i, j, 0);
            acc += c * data[base..base + grid.nf].iter().map(|v| v * v).sum::<f64>();
        }
    }
    acc * grid.dr() * grid.dw(t) * grid.df()
}

/// `(ℰ₀, ℰ₁)` with `ℰ₀ = ∭ f²` and `ℰ₁ = ℰ₀ + ∭ f_r² + t⁻² ∭ f_w²`.
pub fn energy_functionals(f: &DistributionFn, grid: &PhaseSpaceGrid) -> (f64, f64) {
    if f.is_vacuum() {
        return (0.0, 0.0);
    }
    let t = f.t;
    let e0 = weighted_square_sum(&f.values, grid, t);
    let fr = derivative_axis(&f.values, grid.dims(), 0, grid.dr(), true);
    let fw = derivative_axis(&f.values, grid.dims(), 1, grid.dw(t), false);
    let e1 = e0 + weighted_square_sum(&fr, grid, t) + weighted_square_sum(&fw, grid, t) / (t * t);
    (e0, e1)
}
