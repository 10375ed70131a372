use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{coupled_mode_rhs, real_jacobian, ClassicalState, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Bound on [`residual_norm`].
    pub tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            max_halvings: 8,
            tol: 1e-10,
        }
    }
}

/// `||F||_inf / (mean kappa * max(1, ||A||_inf))`: the stationarity residual
/// made dimensionless by the cavity decay rate.
pub fn residual_norm(params: &SystemParams, state: &ClassicalState) -> f64 {
    let f = coupled_mode_rhs(params, state);
    let fmax = f.iter().map(|x| x.norm()).fold(0.0, f64::max);
    fmax / (params.mean_kappa() * state.max_abs().max(1.0))
}

pub fn solve_comb(
    params: &SystemParams,
    power: f64,
    guess: &ClassicalState,
) -> Result<ClassicalState> {
    solve_comb_with(params, power, guess, &NewtonOptions::default())
}

/// Damped Newton iteration for a stationary state at pump power `power`.
///
/// Pump-only guesses are solved on the plain real/imaginary split. Guesses
/// with bright sidebands are first rotated so the brightest sideband
/// `k_ref` is real; the constraint `Im A_{k_ref} = 0` removes the `k theta`
/// null direction and the repetition-rate offset `nu` is added as the
/// matching unknown.
pub fn solve_comb_with(
    params: &SystemParams,
    power: f64,
    guess: &ClassicalState,
    opts: &NewtonOptions,
) -> Result<ClassicalState> {
    let p = params.with_pump(power);
    p.check()?;
    if guess.amplitudes.len() != p.n_modes() {
        return Err(Error::param("guess", "length does not match 2M+1"));
    }
    let mut st = ClassicalState {
        pump_power: power,
        ..guess.clone()
    };
    if st.is_pump_only(1e-14) {
        zero_sidebands(&mut st);
        return newton(&p, st, None, opts);
    }
    let k_ref = brightest_sideband(&st);
    let theta = -st.amp(k_ref).arg() / k_ref as f64;
    st = st.rotated(theta);
    st.amp_mut(k_ref).im = 0.0;
    let sol = newton(&p, st, Some(k_ref), opts)?;
    if sol.amp(k_ref).norm() > 1e-8 * sol.max_abs() {
        return Ok(sol);
    }
    if sol.is_pump_only(1e-8) {
        let mut flat = sol;
        zero_sidebands(&mut flat);
        flat.comb_offset = 0.0;
        return newton(&p, flat, None, opts);
    }
    Err(Error::GaugeInactive { mode: k_ref })
}

fn zero_sidebands(st: &mut ClassicalState) {
    let m = st.m() as i32;
    for k in (-m..=m).filter(|&k| k != 0) {
        *st.amp_mut(k) = Complex64::new(0.0, 0.0);
    }
}

fn brightest_sideband(st: &ClassicalState) -> i32 {
    let m = st.m() as i32;
    let mut best = 1;
    for k in (-m..=m).filter(|&k| k != 0) {
        if st.amp(k).norm() > st.amp(best).norm() * (1.0 + 1e-12) {
            best = k;
        }
    }
    best
}

fn merit(params: &SystemParams, st: &ClassicalState) -> f64 {
    coupled_mode_rhs(params, st)
        .iter()
        .map(|x| x.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn newton(
    params: &SystemParams,
    mut st: ClassicalState,
    gauge: Option<i32>,
    opts: &NewtonOptions,
) -> Result<ClassicalState> {
    let n = params.n_modes();
    let dim = 2 * n + usize::from(gauge.is_some());
    let mut current = merit(params, &st);
    for _ in 0..opts.max_iter {
        if !st.is_finite() {
            break;
        }
        if residual_norm(params, &st) <= opts.tol {
            return Ok(st);
        }
        let f = coupled_mode_rhs(params, &st);
        let jac = real_jacobian(params, &st);
        let mut mat = DMatrix::zeros(dim, dim);
        mat.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&jac);
        let mut rhs = DVector::zeros(dim);
        for j in 0..n {
            rhs[2 * j] = -f[j].re;
            rhs[2 * j + 1] = -f[j].im;
        }
        if let Some(k_ref) = gauge {
            // dF_j/dnu = i j A_j
            for j in 0..n {
                let k = j as f64 - params.m as f64;
                let a = st.amplitudes[j];
                mat[(2 * j, 2 * n)] = -k * a.im;
                mat[(2 * j + 1, 2 * n)] = k * a.re;
            }
            mat[(2 * n, 2 * params.slot(k_ref) + 1)] = 1.0;
            rhs[2 * n] = -st.amp(k_ref).im;
        }
        let step = solve_linear(mat, rhs)?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = apply_step(&st, &step, lambda, gauge.is_some());
            let m = merit(params, &trial);
            if trial.is_finite() && m < current {
                accepted = Some((trial, m));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, m)) => {
                st = trial;
                current = m;
            }
            None => {
                if residual_norm(params, &st) <= opts.tol {
                    return Ok(st);
                }
                return Err(Error::NoConvergence {
                    iterations: opts.max_iter,
                    residual: residual_norm(params, &st),
                });
            }
        }
    }
    let residual = residual_norm(params, &st);
    if residual <= opts.tol {
        return Ok(st);
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual,
    })
}

fn apply_step(
    st: &ClassicalState,
    step: &DVector<f64>,
    lambda: f64,
    with_nu: bool,
) -> ClassicalState {
    let mut out = st.clone();
    for (j, a) in out.amplitudes.iter_mut().enumerate() {
        *a += lambda * Complex64::new(step[2 * j], step[2 * j + 1]);
    }
    if with_nu {
        out.comb_offset += lambda * step[step.len() - 1];
    }
    out
}

/// LU solve with an SVD least-squares fallback for (near-)singular systems.
fn solve_linear(mat: DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>> {
    if let Some(x) = mat.clone().lu().solve(&rhs) {
        if x.iter().all(|v| v.is_finite()) {
            return Ok(x);
        }
    }
    let svd = mat.svd(true, true);
    let smax = svd.singular_values.max();
    svd.solve(&rhs, 1e-13 * smax)
        .map_err(|_| Error::Singular("Newton step"))
        .and_then(|x| {
            if x.iter().all(|v| v.is_finite()) {
                Ok(x)
            } else {
                Err(Error::Singular("Newton step"))
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::{pump_only_roots, relax, threshold};

    fn unit_params(m: usize) -> SystemParams {
        let mut p = SystemParams::flat(m, 1.0, 0.5, 0.0, 2.0, 0.01, 0.0);
        p.photon_energy = 1.0;
        p
    }

    #[test]
    fn pump_only_root_is_fixed_point() {
        let p = unit_params(1);
        let root = pump_only_roots(&p, 20.0).remove(0);
        let sol = solve_comb(&p, 20.0, &root).unwrap();
        assert!(sol.relative_distance(&root) < 1e-12);
        assert_eq!(sol.pump_power, 20.0);
    }

    #[test]
    fn converges_from_perturbed_pump_only_guess() {
        let p = unit_params(2);
        let root = pump_only_roots(&p, 30.0).remove(0);
        let mut guess = root.clone();
        *guess.amp_mut(0) *= 1.05;
        let sol = solve_comb(&p, 30.0, &guess).unwrap();
        assert!(sol.relative_distance(&root) < 1e-10);
    }

    #[test]
    fn symmetric_comb_above_threshold() {
        let p = unit_params(1);
        let pth = threshold(&p).unwrap().power;
        let power = 1.13 * pth;
        let mut seed = pump_only_roots(&p, power).remove(0);
        let a0 = seed.amp(0).norm();
        *seed.amp_mut(1) = Complex64::new(1e-3 * a0, 0.0);
        *seed.amp_mut(-1) = Complex64::new(1e-3 * a0, 0.0);
        let relaxed = relax(&p.with_pump(power), &seed, 2000.0);
        let sol = solve_comb(&p, power, &relaxed).unwrap();
        let (a1, am1) = (sol.amp(1).norm(), sol.amp(-1).norm());
        assert!(a1 > 1e-2 * a0);
        assert!((a1 - am1).abs() <= 1e-8 * a1);
        assert!(residual_norm(&p.with_pump(power), &sol) <= 1e-10);
        assert!(sol.comb_offset.abs() < 1e-8);
    }

    #[test]
    fn rejects_wrong_length() {
        let p = unit_params(2);
        assert!(solve_comb(&p, 1.0, &ClassicalState::zeros(1)).is_err());
    }
}
