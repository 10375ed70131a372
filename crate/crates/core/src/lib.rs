//! Simulation and analysis toolkit for quantum-correlated bright Kerr
//! microcombs operating above their parametric oscillation threshold.
//!
//! The crate is split along the physics pipeline:
//!
//! * [`model`]: mode bookkeeping, system parameters and the classical
//!   coupled-mode equations of a single-family Kerr resonator.
//! * [`steady`]: pump-only roots, oscillation threshold, Newton solver for
//!   comb steady states, linear stability and pump-power sweeps.
//! * [`fluct`]: linearized quantum fluctuations, output noise spectra and
//!   intensity observables (pair differences and the weighted invariant
//!   `C = sum_k k n_k`).
//! * [`fock`]: exact truncated Fock-space engine used as an algebraic oracle.
//! * [`dsp`]: photocurrent processing chain (synthesis, filtering, segmented
//!   FFT estimation, balancing fits and shot-noise calibration).
//! * [`config`]: the TOML run configuration shared with the command-line tool.
//!
//! Data-parallel loops (sweeps, segment FFTs, operator construction) run on
//! rayon when the default `parallel` feature is enabled and fall back to
//! plain iterators otherwise.

pub mod config;
pub mod dsp;
pub mod error;
pub mod fluct;
pub mod fock;
pub mod model;
pub mod par;
pub mod steady;

pub use error::{Error, Result};
pub use model::{ClassicalState, CouplingQuadruple, ModeIndex, SystemParams};
