//! Characteristics and their r-variations through a hyperbolic run.

use ssev::characteristics::{Rk4Options, Seed};
use ssev::harness::characteristics::trace_run;
use ssev::harness::run;
use ssev::kinematics::SymmetryClass;
use ssev::SimConfig;

fn main() {
    let cfg = SimConfig { symmetry: SymmetryClass::Hyperbolic, nr: 32, nw: 64, nf: 4, dt_cap: 0.0125, fit_window: Some((10.0, 100.0)), ..SimConfig::default() };
    let out = run(&cfg).expect("run");
    let seeds = Seed::spread(10, cfg.t0, cfg.init.w_sup, cfg.init.f_sup);
    let trajs = trace_run(&out, &seeds, Rk4Options::default()).expect("characteristics");

    println!("{:>6} {:>7} {:>6} {:>11} {:>11} {:>11} {:>11}", "r", "w", "F", "|∂R/∂r|", "s|∂W/∂r|", "s²Σ|c|", "W·s drift");
    for t in &trajs {
        let b = t.bounds.expect("trajectory reaches the window");
        println!(
            "{:>6.3} {:>+7.3} {:>6.3} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.3e}",
            t.seed.r,
            t.seed.w,
            t.seed.big_f,
            b.max_d_r,
            b.max_s_d_w,
            b.max_c_sum_s2,
            t.ws_drift().unwrap_or(f64::NAN)
        );
    }
}
