//! The spherical case needs t0 > Λ^(−1/2); shows the rejection and a run from just above the bound.

use ssev::config::validate_config;
use ssev::harness::run;
use ssev::kinematics::SymmetryClass;
use ssev::SimConfig;

fn main() {
    let base = SimConfig { symmetry: SymmetryClass::Spherical, nr: 32, nw: 64, nf: 4, w_max: 0.6, dt_cap: 0.0125, ..SimConfig::default() };
    let bound = 1.0 / base.cosmological_constant.sqrt();
    for factor in [0.5, 0.9, 1.2, 2.0] {
        let cfg = SimConfig { t0: factor * bound, ..base.clone() };
        match validate_config(cfg.clone()) {
            Err(v) => println!("t0 = {factor}Λ^(-1/2): rejected ({})", v[0]),
            Ok(_) => {
                let out = run(&cfg).expect("run");
                let rec = out.recorder.records.last().expect("records");
                println!(
                    "t0 = {factor}Λ^(-1/2): reached t = {:.1}, |λ̇t − 1| = {:.2e}, |e^μ t√(Λ/3) − 1| = {:.2e}",
                    rec.t, rec.lambda_dot_dev, rec.emu_dev
                );
            }
        }
    }
}
