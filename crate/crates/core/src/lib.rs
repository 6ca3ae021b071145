//! Surface-symmetric Einstein–Vlasov evolution with a positive cosmological
//! constant in areal coordinates, with asymptotic diagnostics.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristics;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod fd;
pub mod harness;
pub mod kinematics;
pub mod metric;
pub mod phase_space;
pub mod transport;

pub use config::SimConfig;
pub use error::{Error, Result};
pub use evolution::Simulation;
