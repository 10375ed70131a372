//! Exact truncated Fock-space engine for the lossless four-wave-mixing
//! Hamiltonian `H = g sum a_r^dag a_s^dag a_p a_q` (`r + s = p + q`).
//!
//! Per-mode cutoffs keep the weighted number `C = sum_k k n_k` diagonal, so
//! projection onto the truncated space commutes with it exactly.

mod evolve;
mod operators;
mod space;
mod sparse;
mod states;
mod suite;

pub use evolve::{evolve, evolve_with, EvolveOptions};
pub use operators::{
    build_carlos, build_fwm_hamiltonian, build_number, build_pair_hamiltonian,
    build_weighted_number, phase_shift_unitary, truncation_outflow,
};
pub use space::{FockSpace, DEFAULT_DIM_LIMIT};
pub use sparse::{commutator_norm, FockOperator};
pub use states::{decomposition_check, moments, FockState, Moments};
pub use suite::{run_invariant_suite, OracleConfig, OracleReport};
