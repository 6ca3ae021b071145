//! Observed orders under joint halving of Δr, Δw and dt.

use ssev::config::MetricVariables;
use ssev::diagnostics::FitWindow;
use ssev::harness::convergence::{advection_study, matter_study, vacuum_study};
use ssev::SimConfig;

fn main() {
    let cfg = SimConfig { nr: 16, nw: 33, nf: 4, ..SimConfig::default() };
    let mut studies = vacuum_study(&cfg, 3, MetricVariables::Areal).expect("vacuum").to_vec();
    studies.extend(matter_study(&cfg, 3, FitWindow::new(10.0, 100.0)).expect("matter"));
    studies.push(advection_study(&cfg, 4).expect("advection"));
    for s in studies {
        let errors: Vec<String> = s.errors.iter().map(|e| format!("{e:.3e}")).collect();
        let orders: Vec<String> = s.orders.iter().map(|o| format!("{o:.3}")).collect();
        println!("{:<22} errors [{}]  orders [{}]", s.name, errors.join(", "), orders.join(", "));
    }
}
