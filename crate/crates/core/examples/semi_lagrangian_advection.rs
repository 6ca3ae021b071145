//! Translation of a smooth profile by the semi-Lagrangian step, error against the exact shift.

use ssev::config::Interpolation;
use ssev::harness::convergence::advection_error;
use ssev::SimConfig;

fn main() {
    for interpolation in [Interpolation::Bilinear, Interpolation::Bicubic] {
        let cfg = SimConfig { interpolation, ..SimConfig::default() };
        let mut prev = None;
        for l in 0..4u32 {
            let s = 1usize << l;
            let e = advection_error(16 * s, 32 * s + 1, 8 * s, &cfg);
            let order = prev.map(|p: f64| format!("{:.3}", (p / e).log2())).unwrap_or_default();
            println!("{:<9} Nr {:<4} max error {e:.3e}  {order}", interpolation.name(), 16 * s);
            prev = Some(e);
        }
    }
}
