//! Clifford-dressed matrix product states for Loschmidt echoes.
//!
//! The state `C|φ⟩` is kept as a Clifford circuit `C` (tracked on a
//! stabilizer tableau) and an MPS `φ` evolved with 1-site TDVP under the
//! dressed Hamiltonian `C H C†`. Echo amplitudes reduce to stabilizer/MPS
//! overlaps.

pub mod clifford;
pub mod dense;
pub mod disentangler;
pub mod error;
pub mod exec;
pub mod harness;
pub mod krylov;
pub mod linalg;
pub mod mps;
pub mod overlap;
pub mod pauli;
pub mod stabilizer;
pub mod tdvp;

pub use clifford::{candidate_gate_set, CliffordCircuit, CliffordGate, Sites};
pub use error::{Error, Result};
pub use exec::Execution;
pub use mps::{Mpo, Mps, SvdTruncation};
pub use pauli::{PauliString, PauliSum};
pub use stabilizer::{Bitstring, StabilizerTableau};
