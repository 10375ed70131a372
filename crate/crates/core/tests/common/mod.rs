//! Independent reference computations shared by the integration tests and
//! the acceptance harness.
#![allow(dead_code)]

use kcomb::model::coupled_mode_rhs;
use kcomb::{ClassicalState, SystemParams};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

/// Dimensionless device: `kappa = 1`, photon energy 1, so power equals
/// photon flux.
pub fn unit_device(m: usize, escape: f64, delta0: f64, d2: f64, g: f64) -> SystemParams {
    let mut p = SystemParams::flat(m, 1.0, escape, delta0, d2, g, 0.0);
    p.photon_energy = 1.0;
    p
}

/// Number of distinct positive real roots of
/// `x [(k/2)^2 + (d - g x)^2] - drive` from the sign of the discriminant.
pub fn cubic_root_count(kappa: f64, delta: f64, g: f64, drive: f64) -> usize {
    // g^2 x^3 - 2 d g x^2 + (k^2/4 + d^2) x - drive
    let a = g * g;
    let b = -2.0 * delta * g;
    let c = 0.25 * kappa * kappa + delta * delta;
    let d = -drive;
    let disc = 18.0 * a * b * c * d - 4.0 * b.powi(3) * d + b * b * c * c
        - 4.0 * a * c.powi(3)
        - 27.0 * a * a * d * d;
    if disc > 0.0 {
        3
    } else {
        1
    }
}

/// `dF/d(Re A, Im A)` by central differences of the right-hand side.
pub fn finite_difference_jacobian(
    params: &SystemParams,
    state: &ClassicalState,
    h: f64,
) -> DMatrix<f64> {
    let n = params.n_modes();
    let mut jac = DMatrix::zeros(2 * n, 2 * n);
    for m in 0..n {
        for part in 0..2 {
            let dir = if part == 0 {
                Complex64::new(h, 0.0)
            } else {
                Complex64::new(0.0, h)
            };
            let mut plus = state.clone();
            plus.amplitudes[m] += dir;
            let mut minus = state.clone();
            minus.amplitudes[m] -= dir;
            let fp = coupled_mode_rhs(params, &plus);
            let fm = coupled_mode_rhs(params, &minus);
            for j in 0..n {
                let d = (fp[j] - fm[j]) / (2.0 * h);
                jac[(2 * j, 2 * m + part)] = d.re;
                jac[(2 * j + 1, 2 * m + part)] = d.im;
            }
        }
    }
    jac
}

/// Output quadrature spectra of a phase-matched nondegenerate parametric
/// amplifier with pair gain `gain`: squeezed and anti-squeezed.
pub fn two_mode_quadrature_spectra(
    kappa: f64,
    kappa_ext: f64,
    gain: f64,
    omega: f64,
) -> (f64, f64) {
    let sq = 1.0 - 2.0 * kappa_ext * gain / ((0.5 * kappa + gain).powi(2) + omega * omega);
    let anti = 1.0 + 2.0 * kappa_ext * gain / ((0.5 * kappa - gain).powi(2) + omega * omega);
    (sq, anti)
}

/// Intensity-difference spectrum of an above-threshold two-mode oscillator
/// in shot-noise units.
pub fn twin_beam_spectrum(kappa: f64, kappa_ext: f64, omega: f64) -> f64 {
    1.0 - kappa_ext * kappa / (kappa * kappa + omega * omega)
}

/// `exp(-i H t) psi` by dense Hermitian eigendecomposition.
pub fn dense_evolution(h: &DMatrix<Complex64>, psi: &[Complex64], t: f64) -> Vec<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let coeffs = v.adjoint() * nalgebra::DVector::from_column_slice(psi);
    let phased = nalgebra::DVector::from_fn(coeffs.len(), |i, _| {
        coeffs[i] * Complex64::from_polar(1.0, -eig.eigenvalues[i] * t)
    });
    (v * phased).iter().copied().collect()
}

/// Random real symmetric positive-definite matrix with entries of order 1.
pub fn random_psd<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    &b * b.transpose() + DMatrix::identity(dim, dim) * 0.1
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Hermitian dense copy of a sparse operator.
pub fn dense(op: &kcomb::fock::FockOperator) -> DMatrix<Complex64> {
    let d = op.dim();
    let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for i in 0..d {
        for (j, v) in op.row(i) {
            m[(i, j)] = v;
        }
    }
    m
}
