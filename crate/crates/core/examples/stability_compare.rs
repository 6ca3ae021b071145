//! Two nearby data sets: initial Sobolev distances and both late-time attractor fits.

use ssev::harness::compare::{compare, initial_distance, perturbed};
use ssev::SimConfig;

fn main() {
    let a = SimConfig { nr: 32, nw: 64, nf: 4, t_end: 300.0, fit_window: Some((10.0, 100.0)), ..SimConfig::default() };
    for delta in [0.025, 0.05, 0.1] {
        let d = initial_distance(&a, &perturbed(&a, delta)).expect("distance");
        println!("δ = {delta:<6} H⁵ g {:.3e}  H⁵ k {:.4e}  H⁴_z f {:.4e}", d.metric_g, d.metric_k, d.matter);
    }
    let report = compare(&a, &perturbed(&a, 0.1), None).expect("compare");
    println!();
    print!("{}", report.summary());
}
