//! Classical steady states: pump-only roots, oscillation threshold, comb
//! solutions, linear stability and pump-power continuation.

mod newton;
mod pump;
mod relax;
mod stability;
mod sweep;
mod threshold;

pub use newton::{residual_norm, solve_comb, solve_comb_with, NewtonOptions};
pub use pump::{pump_cubic_roots, pump_only_roots};
pub use relax::relax;
pub use stability::{goldstone_overlap, stability_eigenvalues, Stability};
pub use sweep::{seed_comb, sweep_pump, sweep_pump_with, Branch, BranchPoint, SweepOptions};
pub use threshold::{sideband_growth, threshold, threshold_with, Threshold, ThresholdOptions};
