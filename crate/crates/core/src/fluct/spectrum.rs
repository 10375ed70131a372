use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{real_jacobian, ClassicalState, SystemParams};
use crate::steady::stability_eigenvalues;

/// Drift matrix of the quadrature fluctuations. The quadratures are twice
/// the real and imaginary parts of `da`, so this is exactly the real
/// Jacobian of the coupled-mode equations.
pub fn drift_matrix(params: &SystemParams, state: &ClassicalState) -> DMatrix<f64> {
    real_jacobian(params, state)
}

/// Symmetrized output quadrature spectrum at one analysis frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpectrum {
    /// Angular analysis frequency, rad/s.
    pub omega: f64,
    /// Real symmetric `2(2M+1)` square matrix; vacuum is the identity.
    pub matrix: DMatrix<f64>,
}

impl NoiseSpectrum {
    pub fn m(&self) -> usize {
        (self.matrix.nrows() / 2 - 1) / 2
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.clone().symmetric_eigenvalues().min()
    }
}

/// Output fluctuation transfer `[K_ext T K_ext - I, K_ext T K_int]` with
/// `T = (i omega - A)^-1`, mapping input and loss-port vacua to the output.
pub fn output_transfer(
    params: &SystemParams,
    drift: &DMatrix<f64>,
    omega: f64,
) -> Result<DMatrix<Complex64>> {
    let dim = drift.nrows();
    let mut lhs = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(-drift[(i, j)], 0.0));
    for i in 0..dim {
        lhs[(i, i)] += Complex64::new(0.0, omega);
    }
    let t = lhs
        .try_inverse()
        .ok_or(Error::Singular("output transfer"))?;
    let k_ext: Vec<f64> = (0..dim).map(|i| params.kappa_ext[i / 2].sqrt()).collect();
    let k_int: Vec<f64> = (0..dim)
        .map(|i| {
            (params.kappa_total[i / 2] - params.kappa_ext[i / 2])
                .max(0.0)
                .sqrt()
        })
        .collect();
    let mut phi = DMatrix::from_element(dim, 2 * dim, Complex64::new(0.0, 0.0));
    for i in 0..dim {
        for j in 0..dim {
            phi[(i, j)] = k_ext[i] * t[(i, j)] * k_ext[j];
            phi[(i, dim + j)] = k_ext[i] * t[(i, j)] * k_int[j];
        }
        phi[(i, i)] -= 1.0;
    }
    Ok(phi)
}

/// Output spectrum of a stable state at `omega > 0` (rad/s).
///
/// The positive- and negative-frequency contributions are averaged, which
/// leaves `S = Re(Phi Phi^dag)` for the transfer `Phi` of
/// [`output_transfer`].
pub fn output_spectrum(
    params: &SystemParams,
    state: &ClassicalState,
    omega: f64,
) -> Result<NoiseSpectrum> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::NonPositiveFrequency(omega));
    }
    let stab = stability_eigenvalues(params, state);
    if !stab.stable {
        return Err(Error::UnstableState {
            growth: stab.max_growth,
        });
    }
    let drift = drift_matrix(params, state);
    let phi = output_transfer(params, &drift, omega)?;
    let prod = &phi * phi.adjoint();
    let dim = drift.nrows();
    let matrix = DMatrix::from_fn(dim, dim, |i, j| 0.5 * (prod[(i, j)].re + prod[(j, i)].re));
    Ok(NoiseSpectrum { omega, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::pump_only_roots;

    fn params(g: f64) -> SystemParams {
        let mut p = SystemParams::flat(2, 1.0, 0.6, 0.1, 2.0, g, 0.0);
        p.photon_energy = 1.0;
        p.kappa_total[4] = 1.3;
        p
    }

    #[test]
    fn empty_cavity_drift_blocks() {
        let p = params(0.0);
        let st = pump_only_roots(&p, 5.0).remove(0);
        let a = drift_matrix(&p, &st);
        for j in 0..p.n_modes() {
            let (kap, det) = (p.kappa_total[j], p.detuning[j]);
            assert_eq!(a[(2 * j, 2 * j)], -kap / 2.0);
            assert_eq!(a[(2 * j + 1, 2 * j + 1)], -kap / 2.0);
            assert_eq!(a[(2 * j, 2 * j + 1)], det);
            assert_eq!(a[(2 * j + 1, 2 * j)], -det);
        }
    }

    #[test]
    fn pairing_term_on_pump_only_state() {
        let p = params(0.01);
        let st = pump_only_roots(&p, 10.0).remove(0);
        let a = drift_matrix(&p, &st);
        let gain = p.g * st.amp(0).norm_sqr();
        let (s1, sm1) = (p.slot(1), p.slot(-1));
        let block = a.view((2 * s1, 2 * sm1), (2, 2));
        assert!((block.norm() - 2f64.sqrt() * gain).abs() < 1e-12 * gain);
    }

    #[test]
    fn passive_cavity_keeps_vacuum() {
        let p = params(0.0);
        let st = pump_only_roots(&p, 5.0).remove(0);
        for omega in [0.01, 0.4, 3.0, 50.0] {
            let s = output_spectrum(&p, &st, omega).unwrap();
            let err = (&s.matrix - DMatrix::identity(10, 10)).amax();
            assert!(err < 1e-12, "omega {omega}: {err}");
        }
    }

    #[test]
    fn fast_fluctuations_are_unfiltered() {
        let p = params(0.01);
        let st = pump_only_roots(&p, 20.0).remove(0);
        let s = output_spectrum(&p, &st, 1e7).unwrap();
        assert!((&s.matrix - DMatrix::identity(10, 10)).amax() < 1e-6);
        assert_eq!(s.m(), 2);
    }

    #[test]
    fn rejects_zero_frequency() {
        let p = params(0.0);
        let st = pump_only_roots(&p, 5.0).remove(0);
        assert!(matches!(
            output_spectrum(&p, &st, 0.0),
            Err(Error::NonPositiveFrequency(_))
        ));
    }
}
