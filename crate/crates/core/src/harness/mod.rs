//! Run orchestration behind the command line subcommands.

pub mod characteristics;
pub mod compare;
pub mod convergence;
pub mod evolve;
pub mod io;
pub mod rates;

pub use evolve::{cmd_evolve, evolve_to_dir, run, RunOutput};
pub use rates::{cmd_rates, RateReport};
