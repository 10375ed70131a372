//! Photocurrent processing chain: synthetic trace generation, low-pass
//! filtering, segmented FFT estimation, balancing fits, shot-noise
//! calibration and normalized variance reports.
//!
//! Spectra are taken over disjoint acquisitions. For the delayed channel
//! `I_-k(t) = I_k(t - tau)` the fitted balancing phase is
//! `arg alpha_k = +2 pi f tau / f_s` with the forward-FFT sign convention
//! used here.

mod balance;
mod calibration;
mod filter;
mod pipeline;
mod spectra;
mod synth;
mod targets;
mod trace;

pub use balance::{
    balance, band_power, channel_band, combine, combined_variance, fit_alpha, fit_alpha_free,
    fit_beta, minimize_phase, AlphaFit, Balanced, BetaFit, CombinedVariance,
};
pub use calibration::{
    carlos_snl, fit_calibration, fit_calibration_with, normalize_to_snl, pair_snl,
    CalibrationCurve, MAX_RESIDUAL, MIN_LEVELS,
};
pub use filter::{design_lowpass, lowpass, Fir};
pub use pipeline::{
    process, shot_noise_calibration, DspReport, FrequencyRow, Measured, ProcessOptions, PAIRS,
};
pub use spectra::{segment_spectra, SpectralEstimate, Window};
pub use synth::{synthesize_traces, CrossSpectrum, SynthSpec};
pub use targets::{expected_noise, target_from_simulation, two_pair_target, white_target};
pub use trace::{Acquisition, TraceSet, DEFAULT_LABELS};
