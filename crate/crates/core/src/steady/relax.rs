use num_complex::Complex64;

use crate::model::{coupled_mode_rhs, ClassicalState, SystemParams};

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates the lab-frame coupled-mode equations for `duration` seconds
/// (adaptive Dormand-Prince), stopping early once the state is stationary
/// to `1e-7` relative. Used to let a perturbed state fall onto an attractor
/// before Newton polishing.
pub fn relax(params: &SystemParams, start: &ClassicalState, duration: f64) -> ClassicalState {
    integrate(params, start, duration, true)
}

/// Fixed-duration integration; `early_stop` ends it once stationary.
pub(crate) fn integrate(
    params: &SystemParams,
    start: &ClassicalState,
    duration: f64,
    early_stop: bool,
) -> ClassicalState {
    let n = start.amplitudes.len();
    let mut st = ClassicalState {
        comb_offset: 0.0,
        pump_power: params.pump_power,
        ..start.clone()
    };
    let kappa = params.mean_kappa();
    let rtol = 1e-8;
    let mut t = 0.0;
    let mut h = 0.05 / kappa;
    let mut k: Vec<Vec<Complex64>> = vec![Vec::new(); 7];
    let mut scratch = st.clone();
    while t < duration {
        h = h.min(duration - t);
        k[0] = coupled_mode_rhs(params, &st);
        let scale = st.max_abs().max(1e-300);
        if early_stop && k[0].iter().map(|x| x.norm()).fold(0.0, f64::max) <= 1e-7 * kappa * scale {
            break;
        }
        for stage in 1..7 {
            for i in 0..n {
                let mut acc = st.amplitudes[i];
                for (j, kj) in k.iter().enumerate().take(stage) {
                    acc += h * A[stage][j] * kj[i];
                }
                scratch.amplitudes[i] = acc;
            }
            k[stage] = coupled_mode_rhs(params, &scratch);
        }
        let mut err: f64 = 0.0;
        let mut next = st.amplitudes.clone();
        for i in 0..n {
            let mut y5 = st.amplitudes[i];
            let mut y4 = st.amplitudes[i];
            for s in 0..7 {
                y5 += h * B5[s] * k[s][i];
                y4 += h * B4[s] * k[s][i];
            }
            next[i] = y5;
            err = err.max((y5 - y4).norm() / (rtol * scale));
        }
        if err <= 1.0 || h < 1e-6 / kappa {
            st.amplitudes = next;
            t += h;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    st
}
