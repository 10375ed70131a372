use num_complex::Complex64;

use crate::dsp::balance::{
    balance, band_power, channel_band, combine, combined_variance, fit_alpha, fit_alpha_free,
    fit_beta, AlphaFit, BetaFit,
};
use crate::dsp::calibration::{
    carlos_snl, fit_calibration_with, normalize_to_snl, pair_snl, CalibrationCurve, MAX_RESIDUAL,
};
use crate::dsp::{lowpass, segment_spectra, SpectralEstimate, TraceSet, Window};
use crate::error::{Error, Result};
use crate::fluct::NoiseReport;

/// Channel labels of the two detector pairs.
pub const PAIRS: [(&str, &str); 2] = [("+1", "-1"), ("+2", "-2")];

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessOptions {
    /// Analysis frequency, Hz.
    pub omega_hz: f64,
    /// Band half-width in bins around the analysis bin.
    pub half_width: usize,
    pub window: Window,
    pub lowpass_hz: Option<f64>,
    /// Highest frequency kept from each segment FFT.
    pub max_freq_hz: f64,
    pub weights: (f64, f64),
    /// Fit `|beta|` as well as its phase.
    pub free_beta: bool,
    /// Fit `|alpha|` instead of pinning it to the DC ratio.
    pub free_alpha: bool,
    /// Refit `alpha`, `beta` at every bin of the frequency table.
    pub per_frequency: bool,
}

impl Default for ProcessOptions {
    fn default() -> Self {
        Self {
            omega_hz: 4e6,
            half_width: 3,
            window: Window::Rectangular,
            lowpass_hz: Some(20e6),
            max_freq_hz: 50e6,
            weights: (1.0, 2.0),
            free_beta: false,
            free_alpha: false,
            per_frequency: false,
        }
    }
}

/// A measured variance with its standard error, normalized to shot noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Measured {
    pub report: NoiseReport,
    /// Standard error of the variance.
    pub std_error: f64,
}

impl Measured {
    /// Standard error propagated to dB.
    pub fn db_error(&self) -> f64 {
        10.0 / std::f64::consts::LN_10 * self.std_error / self.report.variance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRow {
    pub freq_hz: f64,
    pub delta: [f64; 2],
    pub carlos: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DspReport {
    pub alpha: [AlphaFit; 2],
    pub beta: BetaFit,
    pub delta: [Measured; 2],
    pub carlos: Measured,
    pub group_delay: Option<usize>,
    pub parseval_error: f64,
    /// Normalized variances per bin (shot-noise units).
    pub rows: Vec<FrequencyRow>,
}

fn estimate(traces: &TraceSet, opts: &ProcessOptions) -> Result<(SpectralEstimate, Option<usize>)> {
    let (filtered, delay) = match opts.lowpass_hz {
        Some(fc) => {
            let (t, d) = lowpass(traces, fc)?;
            (t, Some(d))
        }
        None => (traces.clone(), None),
    };
    Ok((
        segment_spectra(&filtered, opts.window, opts.max_freq_hz)?,
        delay,
    ))
}

/// Fits shot-noise curves from calibration runs at several power levels.
/// Every channel of every run is treated as one detector.
pub fn shot_noise_calibration(
    runs: &[TraceSet],
    opts: &ProcessOptions,
) -> Result<Vec<CalibrationCurve>> {
    let Some(first) = runs.first() else {
        return Err(Error::TooFewLevels {
            needed: super::calibration::MIN_LEVELS,
            got: 0,
        });
    };
    let mut points: Vec<Vec<(f64, f64)>> = vec![Vec::new(); first.labels.len()];
    let mut rel_se: Vec<f64> = vec![0.0; first.labels.len()];
    for run in runs {
        if run.labels != first.labels {
            return Err(Error::Trace(
                "calibration runs must share channel labels".into(),
            ));
        }
        let (est, _) = estimate(run, opts)?;
        let band = est.band(opts.omega_hz, opts.half_width)?;
        for (c, pts) in points.iter_mut().enumerate() {
            let (v, se) = band_power(&channel_band(&est, c, &band));
            pts.push((run.dc_levels[c], v));
            rel_se[c] += (se / v).powi(2) / runs.len() as f64;
        }
    }
    first
        .labels
        .iter()
        .zip(points)
        .zip(rel_se)
        .map(|((label, mut pts), r2)| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            fit_calibration_with(label, &pts, MAX_RESIDUAL.max(3.0 * r2.sqrt()))
        })
        .collect()
}

fn find<'a>(cal: &'a [CalibrationCurve], label: &str) -> Result<&'a CalibrationCurve> {
    cal.iter()
        .find(|c| c.detector == label)
        .ok_or_else(|| Error::MissingCalibration(label.to_string()))
}

/// Full processing chain: optional low-pass, segment FFTs, `alpha_1,2` and
/// `beta` fits at the analysis band, combined variance and shot-noise
/// normalization.
pub fn process(
    traces: &TraceSet,
    calibration: &[CalibrationCurve],
    opts: &ProcessOptions,
) -> Result<DspReport> {
    let idx: Vec<(usize, usize)> = PAIRS
        .iter()
        .map(|(a, b)| Ok((traces.channel_index(a)?, traces.channel_index(b)?)))
        .collect::<Result<_>>()?;
    let cals: Vec<(&CalibrationCurve, &CalibrationCurve)> = PAIRS
        .iter()
        .map(|(a, b)| Ok((find(calibration, a)?, find(calibration, b)?)))
        .collect::<Result<_>>()?;
    let (est, group_delay) = estimate(traces, opts)?;
    let band = est.band(opts.omega_hz, opts.half_width)?;
    let dc = &traces.dc_levels;

    let fit_pair = |band: &[usize], p: usize| -> Result<(AlphaFit, Vec<Vec<Complex64>>)> {
        let (a, b) = idx[p];
        let (ia, ib) = (channel_band(&est, a, band), channel_band(&est, b, band));
        let mut fit = fit_alpha(&ia, &ib, dc[a], dc[b], PAIRS[p].1)?;
        if opts.free_alpha {
            fit.alpha = fit_alpha_free(&ia, &ib);
        }
        let d = balance(&ia, &ib, fit.alpha);
        Ok((fit, d))
    };
    let (a1, d1) = fit_pair(&band, 0)?;
    let (a2, d2) = fit_pair(&band, 1)?;
    let beta = fit_beta(&d1, &d2, opts.weights, opts.free_beta);
    let cv = combined_variance(&d1, &d2, beta.beta, opts.weights);

    let snl_pairs = [
        pair_snl(
            cals[0].0,
            cals[0].1,
            dc[idx[0].0],
            dc[idx[0].1],
            a1.alpha.norm(),
        ),
        pair_snl(
            cals[1].0,
            cals[1].1,
            dc[idx[1].0],
            dc[idx[1].1],
            a2.alpha.norm(),
        ),
    ];
    let snl_c = carlos_snl(snl_pairs, beta.beta.norm(), opts.weights);
    let measured = |label: &str, (v, se): (f64, f64), snl: f64, def: &str| -> Result<Measured> {
        Ok(Measured {
            report: normalize_to_snl(label, v, snl, def)?,
            std_error: se,
        })
    };
    let delta = [
        measured(
            "Delta_1",
            cv.delta[0],
            snl_pairs[0],
            "SNL_+1 + |alpha_1|^2 SNL_-1",
        )?,
        measured(
            "Delta_2",
            cv.delta[1],
            snl_pairs[1],
            "SNL_+2 + |alpha_2|^2 SNL_-2",
        )?,
    ];
    let carlos = measured("C", cv.carlos, snl_c, "w1^2 SNL_D1 + |w2 beta|^2 SNL_D2")?;

    let mut rows = Vec::with_capacity(est.n_bins());
    for k in 1..est.n_bins() {
        let single = [k];
        let (fits, beta_k) = if opts.per_frequency {
            let (f1, e1) = fit_pair(&single, 0)?;
            let (f2, e2) = fit_pair(&single, 1)?;
            let b = fit_beta(&e1, &e2, opts.weights, opts.free_beta).beta;
            ([f1.alpha, f2.alpha], b)
        } else {
            ([a1.alpha, a2.alpha], beta.beta)
        };
        let e: Vec<_> = (0..2)
            .map(|p| {
                let (a, b) = idx[p];
                balance(
                    &channel_band(&est, a, &single),
                    &channel_band(&est, b, &single),
                    fits[p],
                )
            })
            .collect();
        let c = combine(&e[0], &e[1], beta_k, opts.weights);
        rows.push(FrequencyRow {
            freq_hz: k as f64 * est.bin_hz,
            delta: [
                band_power(&e[0]).0 / snl_pairs[0],
                band_power(&e[1]).0 / snl_pairs[1],
            ],
            carlos: band_power(&c).0 / snl_c,
        });
    }

    Ok(DspReport {
        alpha: [a1, a2],
        beta,
        delta,
        carlos,
        group_delay,
        parseval_error: est.parseval_error,
        rows,
    })
}
