//! Log-log decay fits on a stored time series, or on a short fresh run when no directory is given.

use std::path::PathBuf;

use ssev::diagnostics::FitWindow;
use ssev::harness::{cmd_rates, evolve_to_dir, io};
use ssev::SimConfig;

fn main() {
    let dir = match std::env::args().nth(1) {
        Some(d) => PathBuf::from(d),
        None => {
            let dir = std::env::temp_dir().join("ssev-decay-rates");
            let cfg = SimConfig { nr: 32, nw: 64, nf: 4, t_end: 200.0, ..SimConfig::default() };
            evolve_to_dir(&cfg, &dir).expect("run");
            dir
        }
    };
    let report = cmd_rates(&dir.join(io::TIMESERIES), Some(FitWindow::new(10.0, 100.0)), &dir).expect("fit");
    for (name, fit) in report.fits() {
        println!("{name:<22} {:+.4}  (log-residual {:.2e})", fit.exponent, fit.residual);
    }
    println!();
    print!("{}", report.summary());
}
