//! Tripartite entanglement measures `g = 2E_P − I` and `h = S_R − I`.
//!
//! Dense states and their entropies live in [`qstate`], the entanglement of
//! purification optimiser in [`ep`], exactly characterised states in [`zoo`],
//! uniform MPS coarse-graining in [`mps`], spin-chain ground states in
//! [`models`] and the end-to-end experiments in [`harness`].

pub mod check;
pub mod ep;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod models;
pub mod mps;
pub mod qstate;
pub mod zoo;

pub use error::{Error, Result};
