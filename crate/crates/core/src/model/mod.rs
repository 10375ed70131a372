//! Mode structure, parameters and the classical coupled-mode equations.

mod modes;
mod params;
mod rhs;

pub use modes::{energy_conserving_quadruples, CouplingQuadruple, ModeIndex};
pub use params::{photon_energy_at, SystemParams, DEFAULT_FSR_HZ, HBAR, SPEED_OF_LIGHT};
pub use rhs::{
    coupled_mode_rhs, holomorphic_jacobian, real_jacobian, weighted_photon_rate, ClassicalState,
};
