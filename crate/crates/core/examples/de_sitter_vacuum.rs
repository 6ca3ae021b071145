//! Flat vacuum from t = 1 to 100 in both metric variable sets, against the de Sitter closed form.

use std::path::Path;

use ssev::config::MetricVariables;
use ssev::harness::convergence::de_sitter_errors;
use ssev::harness::run;
use ssev::SimConfig;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/vacuum-K0.txt");
    let base = SimConfig::from_file(&path).expect("vacuum config");
    for variables in [MetricVariables::Areal, MetricVariables::Rescaled] {
        let out = run(&SimConfig { variables, ..base.clone() }).expect("vacuum run");
        let (emu, lambda) = de_sitter_errors(&out);
        println!(
            "{:<9} t = {:<6} steps {:<5} |e^2mu Λt²/3 − 1| = {emu:.3e}   |λ − ln t − const| = {lambda:.3e}",
            variables.name(),
            out.sim.t(),
            out.sim.steps
        );
    }
}
