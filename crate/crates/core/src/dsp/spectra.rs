use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::dsp::TraceSet;
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Rectangular,
    /// Hann, scaled to unit mean power.
    Hann,
}

impl Window {
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => {
                let w: Vec<f64> = (0..n)
                    .map(|i| (PI * i as f64 / n as f64).sin().powi(2))
                    .collect();
                let p = (w.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
                w.into_iter().map(|v| v / p).collect()
            }
        }
    }
}

/// Segment-wise spectra of a record, kept up to a maximum frequency.
///
/// Bins are normalized as `Y_k = X_k / sqrt(N)` of the mean-removed,
/// windowed segment, so white noise of per-sample variance `s^2` has
/// `E |Y_k|^2 = s^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEstimate {
    pub labels: Vec<String>,
    pub bin_hz: f64,
    /// `spectra[segment][channel][bin]` for bins `0..n_bins`.
    pub spectra: Vec<Vec<Vec<Complex64>>>,
    /// Segment average of `|Y|^2` per channel and bin.
    pub mean_power: Vec<Vec<f64>>,
    /// Standard error of `mean_power` (sample std / sqrt(n_segments)).
    pub std_error: Vec<Vec<f64>>,
    /// Largest relative mismatch between time-domain and full-spectrum
    /// variance over all segments and channels.
    pub parseval_error: f64,
}

impl SpectralEstimate {
    pub fn n_segments(&self) -> usize {
        self.spectra.len()
    }

    pub fn n_bins(&self) -> usize {
        self.mean_power.first().map_or(0, Vec::len)
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.n_bins()).map(|k| k as f64 * self.bin_hz).collect()
    }

    /// Index of the bin closest to `freq_hz`.
    pub fn bin_of(&self, freq_hz: f64) -> Result<usize> {
        let k = (freq_hz / self.bin_hz).round();
        if !(k >= 1.0 && (k as usize) < self.n_bins()) {
            return Err(Error::param(
                "omega_hz",
                format!("{freq_hz:e} Hz outside the retained band"),
            ));
        }
        Ok(k as usize)
    }

    /// Bins `centre - half_width ..= centre + half_width`, clipped to the
    /// retained positive-frequency range.
    pub fn band(&self, freq_hz: f64, half_width: usize) -> Result<Vec<usize>> {
        let c = self.bin_of(freq_hz)?;
        let lo = c.saturating_sub(half_width).max(1);
        let hi = (c + half_width).min(self.n_bins() - 1);
        Ok((lo..=hi).collect())
    }
}

/// Disjoint-segment FFTs of every channel, keeping bins up to `max_freq_hz`.
pub fn segment_spectra(
    traces: &TraceSet,
    window: Window,
    max_freq_hz: f64,
) -> Result<SpectralEstimate> {
    traces.validate()?;
    let acq = traces.acquisition;
    let n = acq.segment_length;
    let n_bins = ((max_freq_hz / acq.bin_hz()).floor() as usize + 1)
        .min(n / 2 + 1)
        .max(2);
    let w = window.coefficients(n);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let nch = traces.channels.len();
    let norm = 1.0 / (n as f64).sqrt();
    let per_segment = par::map_range(acq.n_segments, |s| {
        let mut out = Vec::with_capacity(nch);
        let mut worst: f64 = 0.0;
        for c in 0..nch {
            let seg = traces.segment(c, s);
            let mean = super::trace::mean(seg);
            let mut buf: Vec<Complex64> = seg
                .iter()
                .zip(&w)
                .map(|(&v, &wi)| Complex64::new((v as f64 - mean) * wi, 0.0))
                .collect();
            let time_var = buf.iter().map(|x| x.norm_sqr()).sum::<f64>() / n as f64;
            fft.process(&mut buf);
            let spec_var = buf.iter().map(|x| x.norm_sqr()).sum::<f64>() / (n as f64 * n as f64);
            if time_var > 0.0 {
                worst = worst.max((spec_var - time_var).abs() / time_var);
            }
            out.push(buf[..n_bins].iter().map(|x| x * norm).collect::<Vec<_>>());
        }
        (out, worst)
    });
    let parseval_error = per_segment.iter().map(|p| p.1).fold(0.0, f64::max);
    let spectra: Vec<Vec<Vec<Complex64>>> = per_segment.into_iter().map(|p| p.0).collect();
    let mut mean_power = vec![vec![0.0; n_bins]; nch];
    let mut std_error = vec![vec![0.0; n_bins]; nch];
    for c in 0..nch {
        for k in 0..n_bins {
            let vals: Vec<f64> = spectra.iter().map(|s| s[c][k].norm_sqr()).collect();
            let (m, se) = mean_and_stderr(&vals);
            mean_power[c][k] = m;
            std_error[c][k] = se;
        }
    }
    Ok(SpectralEstimate {
        labels: traces.labels.clone(),
        bin_hz: acq.bin_hz(),
        spectra,
        mean_power,
        std_error,
        parseval_error,
    })
}

/// Sample mean and its standard error.
pub(crate) fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}
