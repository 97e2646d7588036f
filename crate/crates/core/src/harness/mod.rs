//! Echo experiments: model Hamiltonians, run configuration and the C-TDVP
//! driver loop.

mod config;
mod models;
mod run;

pub use config::{OverlapMethod, RunConfig, MAX_CHI_P};
pub use models::{build_hamiltonian, diagonal_order, ModelKind, ModelSpec};
pub use run::{rescale_echo, run_echo, run_echo_with, write_csv, EchoRow, EchoTrace, StepRecord, CSV_HEADER};
