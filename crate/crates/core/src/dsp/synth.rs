use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use crate::dsp::{Acquisition, TraceSet};
use crate::error::{Error, Result};
use crate::par;

/// Per-bin Hermitian cross-spectral target, `f -> S(f)`. `S` is the
/// per-sample two-sided density: white noise of variance `s^2` per sample
/// has `S = s^2`.
pub type CrossSpectrum<'a> = dyn Fn(f64) -> DMatrix<Complex64> + Sync + 'a;

/// Hermitian square root of a PSD matrix; fails with the most negative
/// eigenvalue when the matrix is not PSD.
pub(crate) fn psd_sqrt(s: &DMatrix<Complex64>) -> std::result::Result<DMatrix<Complex64>, f64> {
    let herm = (s + s.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let scale = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let min = eig.eigenvalues.min();
    if min < -1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(min);
    }
    let v = &eig.eigenvectors;
    let d = DMatrix::from_fn(v.ncols(), v.ncols(), |i, j| {
        if i == j {
            Complex64::new(eig.eigenvalues[i].max(0.0).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(v * d * v.adjoint())
}

/// Synthesis request besides the target spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub labels: Vec<String>,
    pub dc_levels: Vec<f64>,
    pub acquisition: Acquisition,
    /// Circular delay of each channel, in samples (may be fractional).
    pub delays: Vec<f64>,
    pub seed: u64,
}

/// Stationary Gaussian channels with cross-spectrum `target`, offset by
/// `dc_levels`.
///
/// Each positive-frequency bin is colored by the Hermitian square root of
/// the target; the DC bin carries no fluctuation. Segment `s` draws from
/// stream `s` of a ChaCha generator keyed by `seed`, so output does not
/// depend on scheduling.
pub fn synthesize_traces(target: &CrossSpectrum<'_>, spec: &SynthSpec) -> Result<TraceSet> {
    let acq = spec.acquisition;
    acq.check()?;
    let nch = spec.labels.len();
    if spec.dc_levels.len() != nch || spec.delays.len() != nch {
        return Err(Error::Trace(
            "labels, DC levels and delays must have equal length".into(),
        ));
    }
    let n = acq.segment_length;
    let half = n / 2;
    let roots = par::map_range(half + 1, |k| {
        let f = k as f64 * acq.bin_hz();
        let s = target(f);
        if s.nrows() != nch || s.ncols() != nch {
            return Err(Error::Trace(format!("target must be {nch}x{nch}")));
        }
        psd_sqrt(&s).map_err(|min_eig| Error::NotPsd {
            freq_hz: f,
            min_eig,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let scale = (n as f64).sqrt() / n as f64;
    let segments: Vec<Vec<Vec<f32>>> = par::map_range(acq.n_segments, |seg| {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(seg as u64);
        let mut spectra = vec![vec![Complex64::new(0.0, 0.0); n]; nch];
        for (k, root) in roots.iter().enumerate().skip(1) {
            let real_bin = 2 * k == n;
            let z: Vec<Complex64> = (0..nch)
                .map(|_| {
                    if real_bin {
                        Complex64::new(rng.sample(StandardNormal), 0.0)
                    } else {
                        let (a, b): (f64, f64) =
                            (rng.sample(StandardNormal), rng.sample(StandardNormal));
                        Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
                    }
                })
                .collect();
            for c in 0..nch {
                let mut y: Complex64 = (0..nch).map(|j| root[(c, j)] * z[j]).sum();
                if real_bin {
                    y = Complex64::new(y.re, 0.0);
                }
                let phase =
                    Complex64::from_polar(1.0, -2.0 * PI * k as f64 * spec.delays[c] / n as f64);
                let x = y * phase;
                spectra[c][k] = x;
                if !real_bin {
                    spectra[c][n - k] = x.conj();
                }
            }
        }
        spectra
            .into_iter()
            .enumerate()
            .map(|(c, mut buf)| {
                fft.process(&mut buf);
                buf.iter()
                    .map(|x| (x.re * scale + spec.dc_levels[c]) as f32)
                    .collect()
            })
            .collect()
    });
    let mut channels = vec![Vec::with_capacity(acq.total_len()); nch];
    for seg in segments {
        for (c, data) in seg.into_iter().enumerate() {
            channels[c].extend(data);
        }
    }
    TraceSet::new(spec.labels.clone(), channels, acq)
}
