use crate::error::{Error, Result};

/// Beam-splitter loss plus additive electronic noise on a variance in
/// shot-noise units: `eta V + 1 - eta + e`.
pub fn apply_detection_chain(v: f64, eta: f64, electronic_noise_rel: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::param(
            "eta",
            format!("efficiency {eta} outside (0, 1]"),
        ));
    }
    if !(electronic_noise_rel >= 0.0) {
        return Err(Error::param("electronic_noise_rel", "must be >= 0"));
    }
    Ok(eta * v + 1.0 - eta + electronic_noise_rel)
}

/// Removes the electronic floor only; optical losses stay in.
pub fn remove_electronic_noise(v_meas: f64, electronic_noise_rel: f64) -> f64 {
    v_meas - electronic_noise_rel
}
