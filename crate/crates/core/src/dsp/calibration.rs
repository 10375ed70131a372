use crate::error::{Error, Result};
use crate::fluct::NoiseReport;

/// Minimum number of power levels per detector.
pub const MIN_LEVELS: usize = 4;
/// Largest accepted relative residual RMS of the linear fit.
pub const MAX_RESIDUAL: f64 = 0.05;

/// Shot-noise variance versus DC level for one detector: a line through
/// the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationCurve {
    pub detector: String,
    pub slope: f64,
    /// RMS of `(v - slope dc) / (slope dc)` over the levels.
    pub residual_rms: f64,
    /// `(dc level, variance)` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
}

impl CalibrationCurve {
    /// Shot-noise variance at a DC level.
    pub fn snl(&self, dc: f64) -> f64 {
        self.slope * dc
    }
}

/// Least-squares line through the origin with contamination checks.
pub fn fit_calibration(detector: &str, points: &[(f64, f64)]) -> Result<CalibrationCurve> {
    fit_calibration_with(detector, points, MAX_RESIDUAL)
}

/// As [`fit_calibration`], accepting residuals up to `max_residual`.
/// Estimates with relative standard error `r` cannot resolve deviations
/// much below `r`, so callers pass `max(MAX_RESIDUAL, 3 r)`.
pub fn fit_calibration_with(
    detector: &str,
    points: &[(f64, f64)],
    max_residual: f64,
) -> Result<CalibrationCurve> {
    if points.len() < MIN_LEVELS {
        return Err(Error::TooFewLevels {
            needed: MIN_LEVELS,
            got: points.len(),
        });
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) || points[0].0 <= 0.0 {
        return Err(Error::param(
            "calibration levels",
            "DC levels must be positive and strictly increasing",
        ));
    }
    let reject = |reason: String| Error::CalibrationRejected {
        detector: detector.to_string(),
        reason,
    };
    if points.windows(2).any(|w| !(w[1].1 > w[0].1)) {
        return Err(reject("variance is not monotone in optical power".into()));
    }
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let slope = sxy / sxx;
    if !(slope > 0.0) {
        return Err(reject(format!("non-positive slope {slope:e}")));
    }
    let residual_rms = (points
        .iter()
        .map(|(x, y)| ((y - slope * x) / (slope * x)).powi(2))
        .sum::<f64>()
        / points.len() as f64)
        .sqrt();
    if residual_rms > max_residual {
        return Err(reject(format!(
            "relative residual RMS {:.1}% exceeds {:.1}% (classical noise?)",
            100.0 * residual_rms,
            100.0 * max_residual
        )));
    }
    Ok(CalibrationCurve {
        detector: detector.to_string(),
        slope,
        residual_rms,
        points: points.to_vec(),
    })
}

/// Shot-noise level of `I_k - alpha I_-k`.
pub fn pair_snl(
    cal_k: &CalibrationCurve,
    cal_mk: &CalibrationCurve,
    dc_k: f64,
    dc_mk: f64,
    alpha_abs: f64,
) -> f64 {
    cal_k.snl(dc_k) + alpha_abs * alpha_abs * cal_mk.snl(dc_mk)
}

/// Shot-noise level of `w1 Delta_1 + w2 beta Delta_2`.
pub fn carlos_snl(pair_snls: [f64; 2], beta_abs: f64, weights: (f64, f64)) -> f64 {
    weights.0 * weights.0 * pair_snls[0] + (weights.1 * beta_abs).powi(2) * pair_snls[1]
}

pub fn normalize_to_snl(
    label: &str,
    variance: f64,
    snl: f64,
    definition: &str,
) -> Result<NoiseReport> {
    if !(snl > 0.0) {
        return Err(Error::param("snl", "shot-noise level must be positive"));
    }
    Ok(NoiseReport {
        label: label.to_string(),
        variance,
        snl,
        snl_definition: definition.to_string(),
    })
}
