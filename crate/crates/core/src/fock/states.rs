use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fluct::{decompose_number_covariance, Decomposition};
use crate::fock::{FockOperator, FockSpace};

/// Normalized state vector on a [`FockSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub amplitudes: Vec<Complex64>,
}

impl FockState {
    pub fn vacuum(space: &FockSpace) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); space.dim()];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn basis(space: &FockSpace, occ: &[usize]) -> Result<Self> {
        let i = space
            .index(occ)
            .ok_or_else(|| Error::param("occupation", "beyond cutoff"))?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); space.dim()];
        amplitudes[i] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    /// Tensor product of single-mode coherent states `|alpha_k>`, each
    /// truncated at its cutoff, renormalized as a whole.
    pub fn coherent(space: &FockSpace, alphas: &[Complex64]) -> Result<Self> {
        if alphas.len() != space.n_modes() {
            return Err(Error::param(
                "alphas",
                format!("expected {} entries", space.n_modes()),
            ));
        }
        let factors: Vec<Vec<Complex64>> = alphas
            .iter()
            .zip(space.cutoffs())
            .map(|(&a, &c)| {
                let mut v = Vec::with_capacity(c + 1);
                let mut term = Complex64::new((-0.5 * a.norm_sqr()).exp(), 0.0);
                for n in 0..=c {
                    if n > 0 {
                        term *= a / (n as f64).sqrt();
                    }
                    v.push(term);
                }
                v
            })
            .collect();
        let amplitudes = (0..space.dim())
            .map(|i| {
                space
                    .occupation(i)
                    .iter()
                    .zip(&factors)
                    .map(|(&n, f)| f[n])
                    .product()
            })
            .collect();
        Ok(Self { amplitudes }.normalized())
    }

    /// Gaussian random amplitudes, normalized.
    pub fn random<R: Rng>(space: &FockSpace, rng: &mut R) -> Self {
        let amplitudes = (0..space.dim())
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self { amplitudes }.normalized()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self {
            amplitudes: self.amplitudes.into_iter().map(|a| a / n).collect(),
        }
    }

    pub fn overlap(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Total population on basis states with some mode at its cutoff.
    pub fn boundary_population(&self, space: &FockSpace) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| space.on_boundary(*i))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// Means and symmetrized covariance matrix of a list of Hermitian
/// observables.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub means: Vec<f64>,
    pub covariance: DMatrix<f64>,
}

pub fn moments(psi: &FockState, observables: &[&FockOperator]) -> Moments {
    let x = &psi.amplitudes;
    let applied: Vec<Vec<Complex64>> = observables.iter().map(|o| o.apply(x)).collect();
    let dotc = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(p, q)| p.conj() * q).sum()
    };
    let means: Vec<f64> = applied.iter().map(|ax| dotc(x, ax).re).collect();
    let n = observables.len();
    let covariance = DMatrix::from_fn(n, n, |i, j| {
        dotc(&applied[i], &applied[j]).re - means[i] * means[j]
    });
    Moments { means, covariance }
}

/// Exact `Var(C)`, `Var_BP` and `Cov_MP` of a state, with `|k| <= m_meas`.
///
/// `Var(C)` and the pair variances `Var(n_k - n_-k)` are evaluated directly
/// from their own operators; `Cov_MP` from the number covariance matrix.
/// The identity `Var_C = Var_BP + Cov_MP` is therefore checked, not
/// assumed. `snl` is `sum k^2 <n_k>`.
pub fn decomposition_check(
    space: &FockSpace,
    psi: &FockState,
    m_meas: usize,
) -> Result<Decomposition> {
    let m = space.m();
    if m_meas == 0 || m_meas > m {
        return Err(Error::param("M_meas", format!("must lie in 1..={m}")));
    }
    let mm = m_meas as i32;
    let probs: Vec<f64> = psi.amplitudes.iter().map(|a| a.norm_sqr()).collect();
    let occs: Vec<Vec<usize>> = (0..space.dim()).map(|i| space.occupation(i)).collect();
    let variance = |f: &dyn Fn(&[usize]) -> f64| -> f64 {
        let mut mean = 0.0;
        let mut sq = 0.0;
        for (p, o) in probs.iter().zip(&occs) {
            let v = f(o);
            mean += p * v;
            sq += p * v * v;
        }
        sq - mean * mean
    };
    let sl = |k: i32| (k + m as i32) as usize;
    let var_c = variance(&|o| (-mm..=mm).map(|k| k as f64 * o[sl(k)] as f64).sum());
    let var_bp: f64 = (1..=mm)
        .map(|k| (k * k) as f64 * variance(&|o| o[sl(k)] as f64 - o[sl(-k)] as f64))
        .sum();
    let numbers: Vec<FockOperator> = (-(m as i32)..=m as i32)
        .map(|k| crate::fock::build_number(space, k))
        .collect();
    let refs: Vec<&FockOperator> = numbers.iter().collect();
    let mom = moments(psi, &refs);
    let snl = (-mm..=mm).map(|k| (k * k) as f64 * mom.means[sl(k)]).sum();
    let pairs = decompose_number_covariance(&mom.covariance, m_meas, snl);
    Ok(Decomposition {
        var_c,
        var_bp,
        ..pairs
    })
}
