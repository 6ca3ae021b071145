//! Initial distribution on the comoving grid, its moments and energies.

use ssev::diagnostics::energy_functionals;
use ssev::phase_space::{build_initial_data, compute_moments, support_radius_w, PhaseSpaceGrid};
use ssev::SimConfig;

fn main() {
    let cfg = SimConfig::default();
    let grid = PhaseSpaceGrid::from_config(&cfg);
    let f = build_initial_data(&cfg, &grid).expect("initial data");
    let m = compute_moments(&f, &grid);
    let (e0, e1) = energy_functionals(&f, &grid);
    let sup = |v: &[f64]| v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    println!("grid {}×{}×{}  Δr {:.4}  Δw(t0) {:.4}  dF {:.4}", grid.nr, grid.nw, grid.nf, grid.dr(), grid.dw(cfg.t0), grid.df());
    println!("sup f {:.4}  support radius in w {:.4}", f.sup(), support_radius_w(&f, &grid));
    println!("sup ρ {:.4e}  sup p {:.4e}  sup |j| {:.4e}  sup q {:.4e}", sup(&m.rho), sup(&m.p), sup(&m.j), sup(&m.q));
    println!("E0 {e0:.4e}  E1 {e1:.4e}");
    println!("\n   r        ρ          p");
    for i in (0..grid.nr).step_by(grid.nr / 8) {
        println!("{:.3}  {:.4e}  {:.4e}", grid.r(i), m.rho[i], m.p[i]);
    }
}
