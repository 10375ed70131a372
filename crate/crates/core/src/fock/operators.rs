use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockOperator, FockSpace};
use crate::model::{energy_conserving_quadruples, CouplingQuadruple};
use crate::par;

/// Applies `a_{k}` (`create = false`) or `a_k^dag` to an occupation vector,
/// multiplying the integer matrix-element factor into `weight`. `None` if
/// the result vanishes; cutoffs are not checked here.
fn ladder(occ: &mut [usize], slot: usize, create: bool, weight: &mut u64) -> Option<()> {
    if create {
        occ[slot] += 1;
        *weight *= occ[slot] as u64;
    } else {
        if occ[slot] == 0 {
            return None;
        }
        *weight *= occ[slot] as u64;
        occ[slot] -= 1;
    }
    Some(())
}

/// `a_r^dag a_s^dag a_p a_q |occ>` as (target occupation, squared matrix
/// element), or `None` when an annihilator hits zero.
pub(crate) fn apply_quadruple(
    occ: &[usize],
    quad: CouplingQuadruple,
    m: usize,
) -> Option<(Vec<usize>, u64)> {
    let slot = |k: i32| (k + m as i32) as usize;
    let mut out = occ.to_vec();
    let mut w = 1u64;
    ladder(&mut out, slot(quad.q), false, &mut w)?;
    ladder(&mut out, slot(quad.p), false, &mut w)?;
    ladder(&mut out, slot(quad.s), true, &mut w)?;
    ladder(&mut out, slot(quad.r), true, &mut w)?;
    Some((out, w))
}

/// `sum_terms coeff * term` assembled row by row: row `i` of `X` is the
/// conjugate of `X^dag |i>`. Terms reaching beyond a cutoff are projected
/// out.
fn assemble(space: &FockSpace, terms: &[(Complex64, CouplingQuadruple)]) -> FockOperator {
    let m = space.m();
    let rows = par::map_range(space.dim(), |i| {
        let occ = space.occupation(i);
        let mut row = Vec::new();
        for &(c, quad) in terms {
            if let Some((target, w)) = apply_quadruple(&occ, quad.adjoint(), m) {
                if let Some(j) = space.index(&target) {
                    row.push((j, c * (w as f64).sqrt()));
                }
            }
        }
        row
    });
    FockOperator::from_rows(space.dim(), rows)
}

/// `g sum a_r^dag a_s^dag a_p a_q` over every energy-conserving quadruple.
pub fn build_fwm_hamiltonian(space: &FockSpace, g: f64) -> FockOperator {
    let c = Complex64::new(g, 0.0);
    let terms: Vec<_> = energy_conserving_quadruples(space.m())
        .into_iter()
        .map(|q| (c, q))
        .collect();
    assemble(space, &terms)
}

/// Two-mode squeezing Hamiltonian with a classical pump:
/// `sum_{k>=1} couplings[k-1] (a_k^dag a_-k^dag + a_k a_-k)`.
/// The pump mode is left untouched.
pub fn build_pair_hamiltonian(space: &FockSpace, couplings: &[f64]) -> Result<FockOperator> {
    if couplings.len() != space.m() {
        return Err(Error::param(
            "couplings",
            format!("expected {} entries", space.m()),
        ));
    }
    let m = space.m();
    let slot = |k: i32| (k + m as i32) as usize;
    let rows = par::map_range(space.dim(), |i| {
        let occ = space.occupation(i);
        let mut row = Vec::new();
        for (kk, &c) in couplings.iter().enumerate() {
            let k = kk as i32 + 1;
            let (a, b) = (slot(k), slot(-k));
            // <i| a_k^dag a_-k^dag: i loses a pair.
            if occ[a] > 0 && occ[b] > 0 {
                let mut t = occ.clone();
                t[a] -= 1;
                t[b] -= 1;
                if let Some(j) = space.index(&t) {
                    row.push((
                        j,
                        Complex64::new(c * ((occ[a] * occ[b]) as f64).sqrt(), 0.0),
                    ));
                }
            }
            // <i| a_k a_-k: i gains a pair.
            let mut t = occ.clone();
            t[a] += 1;
            t[b] += 1;
            if let Some(j) = space.index(&t) {
                row.push((j, Complex64::new(c * ((t[a] * t[b]) as f64).sqrt(), 0.0)));
            }
        }
        row
    });
    Ok(FockOperator::from_rows(space.dim(), rows))
}

/// Diagonal operator `sum_k w_k n_k`; weights in slot order.
pub fn build_weighted_number(space: &FockSpace, weights: &[f64]) -> Result<FockOperator> {
    if weights.len() != space.n_modes() {
        return Err(Error::param(
            "weights",
            format!("expected {} entries", space.n_modes()),
        ));
    }
    let diag: Vec<Complex64> = (0..space.dim())
        .map(|i| {
            let occ = space.occupation(i);
            Complex64::new(
                occ.iter().zip(weights).map(|(&n, w)| n as f64 * w).sum(),
                0.0,
            )
        })
        .collect();
    Ok(FockOperator::diagonal(&diag))
}

/// `C = sum_k k n_k`.
pub fn build_carlos(space: &FockSpace) -> FockOperator {
    let m = space.m() as i32;
    let w: Vec<f64> = (-m..=m).map(f64::from).collect();
    build_weighted_number(space, &w).expect("weights sized from the space")
}

pub fn build_number(space: &FockSpace, k: i32) -> FockOperator {
    let mut w = vec![0.0; space.n_modes()];
    w[space.slot(k)] = 1.0;
    build_weighted_number(space, &w).expect("weights sized from the space")
}

/// `U(theta) = exp(i theta sum_k k n_k)`.
pub fn phase_shift_unitary(space: &FockSpace, theta: f64) -> FockOperator {
    let m = space.m() as i64;
    let diag: Vec<Complex64> = (0..space.dim())
        .map(|i| {
            let c: i64 = space
                .occupation(i)
                .iter()
                .zip(-m..=m)
                .map(|(&n, k)| n as i64 * k)
                .sum();
            Complex64::from_polar(1.0, theta * c as f64)
        })
        .collect();
    FockOperator::diagonal(&diag)
}

/// Norm of the part of `H_FWM psi` (untruncated `H`, unit `g`) that leaves
/// the truncated space, relative to `||H_FWM psi||`. Zero when the
/// truncated space is dynamically closed.
pub fn truncation_outflow(space: &FockSpace, psi: &[Complex64]) -> f64 {
    let m = space.m();
    let quads = energy_conserving_quadruples(m);
    let mut inside = vec![Complex64::new(0.0, 0.0); space.dim()];
    let mut outside = std::collections::HashMap::<Vec<usize>, Complex64>::new();
    for (i, &amp) in psi.iter().enumerate() {
        if amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        let occ = space.occupation(i);
        for &q in &quads {
            if let Some((target, w)) = apply_quadruple(&occ, q, m) {
                let v = amp * (w as f64).sqrt();
                match space.index(&target) {
                    Some(j) => inside[j] += v,
                    None => *outside.entry(target).or_default() += v,
                }
            }
        }
    }
    let out = outside.values().fold(0.0, |s, v| s + v.norm_sqr());
    let all: f64 = out + inside.iter().map(|v| v.norm_sqr()).sum::<f64>();
    if all == 0.0 {
        0.0
    } else {
        (out / all).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::commutator_norm;

    #[test]
    fn zero_coupling_gives_zero_matrix() {
        let s = FockSpace::uniform(1, 2).unwrap();
        assert_eq!(build_fwm_hamiltonian(&s, 0.0).nnz(), 0);
    }

    #[test]
    fn carlos_eigenvalues() {
        let s = FockSpace::uniform(2, 2).unwrap();
        let c = build_carlos(&s);
        let vac = s.index(&[0, 0, 0, 0, 0]).unwrap();
        assert_eq!(c.get(vac, vac).re, 0.0);
        let pair = s.index(&[0, 1, 0, 1, 0]).unwrap();
        assert_eq!(c.get(pair, pair).re, 0.0);
        let odd = s.index(&[0, 1, 0, 0, 1]).unwrap();
        assert_eq!(c.get(odd, odd).re, 1.0);
    }

    #[test]
    fn phase_shift_limits() {
        let s = FockSpace::uniform(2, 2).unwrap();
        let id = FockOperator::diagonal(&vec![Complex64::new(1.0, 0.0); s.dim()]);
        assert_eq!(phase_shift_unitary(&s, 0.0).max_abs_diff(&id), 0.0);
        assert!(phase_shift_unitary(&s, 2.0 * std::f64::consts::PI).max_abs_diff(&id) < 1e-12);
    }

    #[test]
    fn single_mode_number_is_not_conserved() {
        let s = FockSpace::uniform(2, 3).unwrap();
        let h = build_fwm_hamiltonian(&s, 1.0);
        assert!(commutator_norm(&build_number(&s, 1), &h) > 0.1);
        let c = build_carlos(&s);
        assert_eq!(commutator_norm(&c, &c.matmul(&c)), 0.0);
    }

    #[test]
    fn pair_hamiltonian_is_hermitian() {
        let s = FockSpace::uniform(2, 2).unwrap();
        let h = build_pair_hamiltonian(&s, &[0.3, 0.7]).unwrap();
        assert_eq!(h.hermiticity_error(), 0.0);
        assert_eq!(commutator_norm(&build_carlos(&s), &h), 0.0);
    }
}
