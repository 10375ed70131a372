use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::dsp::TraceSet;
use crate::error::{Error, Result};
use crate::par;

/// Stop-band attenuation of the Kaiser design, dB.
const ATTENUATION_DB: f64 = 50.0;
/// Passband edge and stop-band edge as fractions of the nominal cutoff.
const PASS_EDGE: f64 = 0.8;
const STOP_EDGE: f64 = 1.5;

/// Linear-phase FIR low-pass filter.
#[derive(Debug, Clone, PartialEq)]
pub struct Fir {
    pub taps: Vec<f64>,
    /// Group delay in samples, `(len - 1) / 2`.
    pub group_delay: usize,
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = 0.25 * x * x;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Kaiser-windowed sinc with its transition band between `0.8 cutoff` and
/// `1.5 cutoff`.
pub fn design_lowpass(cutoff_hz: f64, sample_rate: f64) -> Result<Fir> {
    let nyquist = 0.5 * sample_rate;
    if !(cutoff_hz > 0.0 && cutoff_hz < nyquist) {
        return Err(Error::param(
            "cutoff_hz",
            format!("must lie in (0, {nyquist:e}) Hz"),
        ));
    }
    let f_pass = PASS_EDGE * cutoff_hz;
    let f_stop = (STOP_EDGE * cutoff_hz).min(nyquist);
    let f_c = 0.5 * (f_pass + f_stop) / sample_rate;
    let dw = 2.0 * PI * (f_stop - f_pass) / sample_rate;
    let beta = 0.1102 * (ATTENUATION_DB - 8.7);
    let mut len = ((ATTENUATION_DB - 8.0) / (2.285 * dw)).ceil() as usize + 1;
    if len % 2 == 0 {
        len += 1;
    }
    let mid = (len - 1) as f64 / 2.0;
    let i0b = bessel_i0(beta);
    let mut taps: Vec<f64> = (0..len)
        .map(|i| {
            let t = i as f64 - mid;
            let sinc = if t == 0.0 {
                2.0 * f_c
            } else {
                (2.0 * PI * f_c * t).sin() / (PI * t)
            };
            let r = t / mid;
            sinc * bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / i0b
        })
        .collect();
    let dc: f64 = taps.iter().sum();
    for t in taps.iter_mut() {
        *t /= dc;
    }
    Ok(Fir {
        group_delay: (len - 1) / 2,
        taps,
    })
}

impl Fir {
    /// Magnitude response at frequency `f` (Hz).
    pub fn response(&self, f: f64, sample_rate: f64) -> f64 {
        let w = 2.0 * PI * f / sample_rate;
        self.taps
            .iter()
            .enumerate()
            .map(|(n, &h)| Complex64::from_polar(h, -w * n as f64))
            .sum::<Complex64>()
            .norm()
    }

    /// Filters `x` and advances the output by the group delay, so the
    /// result is aligned with the input. Samples outside `x` count as zero.
    pub fn apply_aligned(&self, x: &[f64]) -> Vec<f64> {
        Convolver::new(&self.taps, x.len()).aligned(x, self.group_delay)
    }
}

/// FFT linear convolution with a fixed kernel and input length.
struct Convolver {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    kernel: Vec<Complex64>,
    taps: usize,
}

impl Convolver {
    fn new(h: &[f64], input_len: usize) -> Self {
        let n = (input_len + h.len() - 1).next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut kernel: Vec<Complex64> = h
            .iter()
            .map(|&v| Complex64::new(v / n as f64, 0.0))
            .collect();
        kernel.resize(n, Complex64::new(0.0, 0.0));
        fwd.process(&mut kernel);
        Self {
            fwd,
            inv,
            kernel,
            taps: h.len(),
        }
    }

    /// `(x * h)[delay .. delay + x.len()]`.
    fn aligned(&self, x: &[f64], delay: usize) -> Vec<f64> {
        let mut a: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        a.resize(self.kernel.len(), Complex64::new(0.0, 0.0));
        self.fwd.process(&mut a);
        for (u, v) in a.iter_mut().zip(&self.kernel) {
            *u *= v;
        }
        self.inv.process(&mut a);
        debug_assert!(delay + x.len() <= x.len() + self.taps - 1);
        a[delay..delay + x.len()].iter().map(|c| c.re).collect()
    }
}

/// Low-passes every channel segment by segment (each acquisition is
/// filtered on its own) with delay compensation. DC levels are unchanged.
/// Returns the filtered record and the compensated group delay in samples.
pub fn lowpass(trace: &TraceSet, cutoff_hz: f64) -> Result<(TraceSet, usize)> {
    let fir = design_lowpass(cutoff_hz, trace.acquisition.sample_rate)?;
    let acq = trace.acquisition;
    let conv = Convolver::new(&fir.taps, acq.segment_length);
    let jobs: Vec<(usize, usize)> = (0..trace.channels.len())
        .flat_map(|c| (0..acq.n_segments).map(move |s| (c, s)))
        .collect();
    let filtered = par::map(&jobs, |&(c, s)| {
        let seg = trace.segment(c, s);
        let dc = trace.dc_levels[c];
        let x: Vec<f64> = seg.iter().map(|&v| v as f64 - dc).collect();
        conv.aligned(&x, fir.group_delay)
            .into_iter()
            .map(|v| (v + dc) as f32)
            .collect::<Vec<f32>>()
    });
    let mut out = trace.clone();
    for ((c, s), data) in jobs.into_iter().zip(filtered) {
        let n = acq.segment_length;
        out.channels[c][s * n..(s + 1) * n].copy_from_slice(&data);
    }
    Ok((out, fir.group_delay))
}
