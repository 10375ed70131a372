use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockOperator;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Krylov dimension per substep.
    pub krylov_dim: usize,
    /// Local error bound per substep.
    pub tol: f64,
    pub max_substeps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 30,
            tol: 1e-13,
            max_substeps: 100_000,
        }
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn evolve(h: &FockOperator, psi0: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    evolve_with(h, psi0, t, &EvolveOptions::default())
}

/// `exp(-i H t) psi0` for Hermitian `H` by Lanczos projection with
/// adaptive substeps.
///
/// Each substep builds an orthonormal Krylov basis (fully
/// reorthogonalized), exponentiates the tridiagonal projection exactly and
/// accepts the step when the residual estimate
/// `beta_m |e_m^T exp(-i T tau) e_1|` is below `tol`.
pub fn evolve_with(
    h: &FockOperator,
    psi0: &[Complex64],
    t: f64,
    opts: &EvolveOptions,
) -> Result<Vec<Complex64>> {
    if psi0.len() != h.dim() {
        return Err(Error::param("psi0", "length does not match the operator"));
    }
    let mut psi = psi0.to_vec();
    if t == 0.0 {
        return Ok(psi);
    }
    let mut tau = t;
    let mut done = 0.0;
    let mut steps = 0;
    while (t - done).abs() > 1e-15 * t.abs() {
        steps += 1;
        if steps > opts.max_substeps {
            return Err(Error::ExpmNoConvergence(format!(
                "more than {} substeps at t = {t}",
                opts.max_substeps
            )));
        }
        if (done + tau - t) * t.signum() > 0.0 {
            tau = t - done;
        }
        let beta0 = norm(&psi);
        if beta0 == 0.0 {
            return Ok(psi);
        }
        let (basis, alpha, beta, breakdown) = lanczos(h, &psi, beta0, opts.krylov_dim);
        let k = basis.len();
        let tri = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(tri);
        loop {
            // c = exp(-i T tau) e_1
            let c: Vec<Complex64> = (0..k)
                .map(|i| {
                    (0..k)
                        .map(|j| {
                            eig.eigenvectors[(i, j)]
                                * eig.eigenvectors[(0, j)]
                                * Complex64::from_polar(1.0, -eig.eigenvalues[j] * tau)
                        })
                        .sum()
                })
                .collect();
            let err = if breakdown {
                0.0
            } else {
                beta[k - 1] * c[k - 1].norm()
            };
            if err <= opts.tol || tau.abs() < 1e-300 {
                let mut next = vec![ZERO; psi.len()];
                for (v, ci) in basis.iter().zip(&c) {
                    let s = ci * beta0;
                    for (n, x) in next.iter_mut().zip(v) {
                        *n += s * x;
                    }
                }
                psi = next;
                done += tau;
                if err < 0.01 * opts.tol {
                    tau *= 2.0;
                }
                break;
            }
            tau *= 0.5;
        }
    }
    Ok(psi)
}

/// Returns the Krylov basis, diagonal `alpha`, off-diagonal `beta` (with
/// `beta[k-1]` the residual coupling) and whether the space closed early.
fn lanczos(
    h: &FockOperator,
    psi: &[Complex64],
    beta0: f64,
    kmax: usize,
) -> (Vec<Vec<Complex64>>, Vec<f64>, Vec<f64>, bool) {
    let mut basis: Vec<Vec<Complex64>> = vec![psi.iter().map(|x| x / beta0).collect()];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let hnorm = h.max_abs().max(f64::MIN_POSITIVE);
    loop {
        let v = basis.last().unwrap();
        let mut w = h.apply(v);
        let a = dot(v, &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for u in &basis {
                let proj = dot(u, &w);
                for (x, y) in w.iter_mut().zip(u) {
                    *x -= proj * y;
                }
            }
        }
        let b = norm(&w);
        beta.push(b);
        if b <= 1e-13 * hnorm {
            return (basis, alpha, beta, true);
        }
        if basis.len() == kmax {
            return (basis, alpha, beta, false);
        }
        basis.push(w.iter().map(|x| x / b).collect());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_level_rabi() {
        let one = Complex64::new(1.0, 0.0);
        let h = FockOperator::from_rows(2, vec![vec![(1, one)], vec![(0, one)]]);
        let t = 0.7;
        let psi = evolve(&h, &[one, ZERO], t).unwrap();
        assert!((psi[0] - Complex64::new(t.cos(), 0.0)).norm() < 1e-12);
        assert!((psi[1] - Complex64::new(0.0, -t.sin())).norm() < 1e-12);
    }

    #[test]
    fn zero_time_is_identity() {
        let one = Complex64::new(1.0, 0.0);
        let h = FockOperator::from_rows(2, vec![vec![(1, one)], vec![(0, one)]]);
        assert_eq!(evolve(&h, &[one, ZERO], 0.0).unwrap(), vec![one, ZERO]);
    }

    #[test]
    fn long_diagonal_evolution() {
        let d: Vec<Complex64> = (0..50)
            .map(|i| Complex64::new(i as f64 * 0.37, 0.0))
            .collect();
        let h = FockOperator::diagonal(&d);
        let psi0: Vec<Complex64> = (0..50)
            .map(|_| Complex64::new(1.0 / 50f64.sqrt(), 0.0))
            .collect();
        let t = 12.5;
        let psi = evolve(&h, &psi0, t).unwrap();
        for (i, x) in psi.iter().enumerate() {
            let e = Complex64::from_polar(1.0 / 50f64.sqrt(), -d[i].re * t);
            assert!((x - e).norm() < 1e-10, "{i}: {x} vs {e}");
        }
    }
}
