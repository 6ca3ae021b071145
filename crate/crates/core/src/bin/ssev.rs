use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ssev::config::SimConfig;
use ssev::diagnostics::FitWindow;
use ssev::harness::{characteristics, compare, convergence, evolve, io, rates};

#[derive(Parser)]
#[command(name = "ssev", version, about = "Surface-symmetric Einstein–Vlasov runs with Λ > 0")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one config from t0 to t_end into a run directory.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit decay exponents of a run's time series.
    Rates {
        /// Run directory holding timeseries.csv, or the CSV itself.
        #[arg(long)]
        out: PathBuf,
        /// `lo,hi`; defaults to the last decade.
        #[arg(long)]
        window: Option<String>,
    },
    /// Integrate characteristics and their variations over a stored run.
    Characteristics {
        /// Run directory.
        #[arg(long)]
        out: PathBuf,
        /// `r,w,F;r,w,F;...` at t0; defaults to a spread over the initial support.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        window: Option<String>,
    },
    /// Distances between two data sets and both late-time no-hair fits.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Second config; defaults to the first with f0 scaled by 1 + perturb.
        #[arg(long)]
        other: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        perturb: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Refinement studies with halved spacings per level.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn window(text: Option<&str>) -> ssev::Result<Option<FitWindow>> {
    text.map(FitWindow::parse).transpose()
}

fn dispatch(cmd: Command) -> ssev::Result<()> {
    match cmd {
        Command::Evolve { config, out } => {
            let run = evolve::cmd_evolve(&config, &out)?;
            let report = rates::rates_for_series(|c| run.recorder.series(c), run.window());
            println!("completed t = {} after {} steps; {} records in {}", run.sim.t(), run.sim.steps, run.recorder.records.len(), out.display());
            print!("{}", report.summary());
        }
        Command::Rates { out, window: w } => {
            let (ts, dir) = if out.is_dir() { (out.join(io::TIMESERIES), out.clone()) } else { (out.clone(), out.parent().map(PathBuf::from).unwrap_or_default()) };
            let report = rates::cmd_rates(&ts, window(w.as_deref())?, &dir)?;
            print!("{}", report.summary());
        }
        Command::Characteristics { out, seeds, window: w } => {
            let trajs = characteristics::cmd_characteristics(&out, seeds.as_deref(), window(w.as_deref())?, None)?;
            println!("{:>4} {:>12} {:>12} {:>12} {:>10}", "seed", "max E ratio", "max|dR/dr|", "max s|dW/dr|", "W·s drift");
            for (n, t) in trajs.iter().enumerate() {
                let b = t.bounds.as_ref();
                let f = |v: Option<f64>| v.map(|x| format!("{x:.4e}")).unwrap_or_else(|| "n/a".into());
                println!(
                    "{n:>4} {:>12} {:>12} {:>12} {:>10}",
                    f(b.map(|b| b.max_e_ratio)),
                    f(b.map(|b| b.max_d_r)),
                    f(b.map(|b| b.max_s_d_w)),
                    f(t.ws_drift())
                );
            }
        }
        Command::Compare { config, other, perturb, out } => {
            let report = match other {
                Some(b) => compare::cmd_compare(&config, &b, &out)?,
                None => {
                    let a = SimConfig::from_file(&config)?.validated()?;
                    compare::compare_into(&a, &compare::perturbed(&a, perturb), &out)?
                }
            };
            print!("{}", report.summary());
        }
        Command::Convergence { config, levels, out } => {
            let report = convergence::cmd_convergence(&config, levels, &out)?;
            print!("{}", report.summary());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
