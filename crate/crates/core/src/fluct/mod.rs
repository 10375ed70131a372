//! Linearized quantum fluctuations around a classical steady state.
//!
//! Fluctuation quadratures are `x = da + da^dag`, `p = -i (da - da^dag)`,
//! interleaved per mode in slot order, so vacuum has unit symmetrized
//! spectral covariance.

mod detection;
mod observables;
mod spectrum;
mod sweep;

pub use detection::{apply_detection_chain, remove_electronic_noise};
pub use observables::{
    amplitude_selector, carlos_noise, decompose_number_covariance, intensity_diff_noise,
    number_covariance, output_amplitudes, variance_decomposition, Decomposition, NoiseReport,
};
pub use spectrum::{drift_matrix, output_spectrum, output_transfer, NoiseSpectrum};
pub use sweep::{noise_along_branches, NoiseRow, PointNoise};
