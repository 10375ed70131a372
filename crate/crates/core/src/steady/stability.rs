use nalgebra::DVector;
use num_complex::Complex64;

use crate::model::{real_jacobian, ClassicalState, SystemParams};

/// Relative tolerance (in units of the mean linewidth) for marginal modes.
const GOLDSTONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Stability {
    /// Drift-matrix eigenvalues, sorted by decreasing real part.
    pub eigenvalues: Vec<Complex64>,
    /// Index into `eigenvalues` of the phase-symmetry zero mode, if any.
    pub goldstone: Option<usize>,
    /// Largest real part among the non-Goldstone eigenvalues.
    pub max_growth: f64,
    pub stable: bool,
}

/// Eigen-analysis of the drift matrix at a stationary state.
///
/// For states with lit sidebands the `A_k -> A_k e^{i k theta}` symmetry
/// produces one exact zero eigenvalue; it is flagged rather than counted as
/// an instability. Pump-only states carry no such mode.
pub fn stability_eigenvalues(params: &SystemParams, state: &ClassicalState) -> Stability {
    let jac = real_jacobian(params, state);
    let kappa = params.mean_kappa();
    let mut eigenvalues: Vec<Complex64> = jac.complex_eigenvalues().iter().cloned().collect();
    eigenvalues.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap_or(std::cmp::Ordering::Equal));
    let goldstone = if state.is_pump_only(1e-12) {
        None
    } else {
        eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .filter(|(_, l)| l.norm() <= GOLDSTONE_TOL * kappa)
            .map(|(i, _)| i)
    };
    let max_growth = eigenvalues
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != goldstone)
        .map(|(_, l)| l.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Stability {
        stable: max_growth <= GOLDSTONE_TOL * kappa,
        eigenvalues,
        goldstone,
        max_growth,
    }
}

/// `|<v, u>|` between the drift-matrix null vector `v` (smallest singular
/// value) and the normalized symmetry generator `u = i k A_k`, both in the
/// interleaved quadrature layout.
pub fn goldstone_overlap(params: &SystemParams, state: &ClassicalState) -> f64 {
    let jac = real_jacobian(params, state);
    let n = params.n_modes();
    let svd = jac.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let imin = svd.singular_values.imin();
    let null = v_t.row(imin).transpose();
    let mut gen = DVector::zeros(2 * n);
    for (j, a) in state.amplitudes.iter().enumerate() {
        let k = j as f64 - params.m as f64;
        gen[2 * j] = -k * a.im;
        gen[2 * j + 1] = k * a.re;
    }
    let norm = gen.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (null.dot(&gen) / norm).abs()
}
