use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fluct::{number_covariance, output_amplitudes, NoiseSpectrum};
use crate::model::{ClassicalState, SystemParams};

/// Frequency-flat target from a real symmetric matrix.
pub fn white_target(matrix: DMatrix<f64>) -> impl Fn(f64) -> DMatrix<Complex64> + Sync {
    let c = matrix.map(|x| Complex64::new(x, 0.0));
    move |_f| c.clone()
}

/// Four unit-shot-noise channels `(+1, -1, +2, -2)` whose pair differences
/// sit at `delta_db` and whose weighted sum `w1 Delta_1 + w2 Delta_2` sits at
/// `carlos_db`, all relative to shot noise `shot` per channel.
///
/// Pair correlations enter as `Cov(I_k, I_-k)`; the inter-pair covariance
/// is spread evenly so that `Cov(Delta_1, Delta_2) = x` with
/// `Cov(I_1, I_2) = Cov(I_-1, I_-2) = x/4` and
/// `Cov(I_1, I_-2) = Cov(I_-1, I_2) = -x/4`.
pub fn two_pair_target(
    delta_db: [f64; 2],
    carlos_db: f64,
    shot: f64,
    weights: (f64, f64),
) -> Result<DMatrix<f64>> {
    let (w1, w2) = weights;
    let lin = |db: f64| 10f64.powf(db / 10.0);
    let v1 = 2.0 * shot * lin(delta_db[0]);
    let v2 = 2.0 * shot * lin(delta_db[1]);
    let snl_c = 2.0 * shot * (w1 * w1 + w2 * w2);
    let vc = snl_c * lin(carlos_db);
    if w1 == 0.0 || w2 == 0.0 {
        return Err(Error::param("weights", "both weights must be nonzero"));
    }
    let x = (vc - w1 * w1 * v1 - w2 * w2 * v2) / (2.0 * w1 * w2);
    let r1 = shot - 0.5 * v1;
    let r2 = shot - 0.5 * v2;
    let q = 0.25 * x;
    Ok(DMatrix::from_row_slice(
        4,
        4,
        &[
            shot, r1, q, -q, //
            r1, shot, -q, q, //
            q, -q, shot, r2, //
            -q, q, r2, shot,
        ],
    ))
}

/// Photocurrent statistics of a simulated comb on detectors `+1, -1, +2, -2`.
///
/// Returns the 4x4 covariance target and DC levels. Each detector sees the
/// output flux through efficiency `eta` (beam-splitter model); fluxes are
/// scaled so the brightest channel has DC level 1 and shot-noise variance
/// per sample `slope * dc`.
pub fn target_from_simulation(
    params: &SystemParams,
    state: &ClassicalState,
    spectrum: &NoiseSpectrum,
    eta: f64,
    slope: f64,
) -> Result<(DMatrix<f64>, Vec<f64>)> {
    if params.m < 2 {
        return Err(Error::param("M", "need modes up to ±2"));
    }
    let cov = number_covariance(params, state, spectrum);
    let out = output_amplitudes(params, state);
    let modes = [1, -1, 2, -2];
    let slots: Vec<usize> = modes.iter().map(|&k| params.slot(k)).collect();
    let flux: Vec<f64> = slots.iter().map(|&s| eta * out[s].norm_sqr()).collect();
    let f_max = flux.iter().cloned().fold(0.0, f64::max);
    if !(f_max > 0.0) {
        return Err(Error::DarkMode { mode: 1, flux: 0.0 });
    }
    let target = DMatrix::from_fn(4, 4, |i, j| {
        let mut v = eta * eta * cov[(slots[i], slots[j])];
        if i == j {
            v += (1.0 - eta) * flux[i];
        }
        slope * v / f_max
    });
    let dc = flux.iter().map(|f| f / f_max).collect();
    Ok((target, dc))
}

/// Noise a flat real target should yield through the pipeline with
/// delay-free balancing: `alpha_k = dc_k / dc_-k`, `beta = 1`. Channel
/// order `+1, -1, +2, -2`; returns `(Delta_1, Delta_2, C)` in shot-noise
/// units.
pub fn expected_noise(
    target: &DMatrix<f64>,
    dc: &[f64],
    slope: f64,
    weights: (f64, f64),
) -> (f64, f64, f64) {
    let (w1, w2) = weights;
    let a1 = dc[0] / dc[1];
    let a2 = dc[2] / dc[3];
    let quad = |u: [f64; 4]| -> f64 {
        (0..4)
            .flat_map(|i| (0..4).map(move |j| u[i] * u[j] * target[(i, j)]))
            .sum()
    };
    let snl1 = slope * (dc[0] + a1 * a1 * dc[1]);
    let snl2 = slope * (dc[2] + a2 * a2 * dc[3]);
    let v1 = quad([1.0, -a1, 0.0, 0.0]);
    let v2 = quad([0.0, 0.0, 1.0, -a2]);
    let vc = quad([w1, -w1 * a1, w2, -w2 * a2]);
    (v1 / snl1, v2 / snl2, vc / (w1 * w1 * snl1 + w2 * w2 * snl2))
}
