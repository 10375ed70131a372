use nalgebra::DMatrix;
use num_complex::Complex64;

use super::SystemParams;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Complex intracavity amplitudes of a comb, `|A_k|^2` in photons.
///
/// `comb_offset` is the repetition-rate offset `nu` of the frame in which the
/// state is stationary: the lab-frame field of mode `k` is
/// `A_k exp(-i k nu t)`. It is zero for every symmetric configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalState {
    pub amplitudes: Vec<Complex64>,
    pub pump_power: f64,
    pub comb_offset: f64,
}

impl ClassicalState {
    pub fn zeros(m: usize) -> Self {
        Self {
            amplitudes: vec![Complex64::new(0.0, 0.0); 2 * m + 1],
            pump_power: 0.0,
            comb_offset: 0.0,
        }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>, pump_power: f64) -> Self {
        assert!(amplitudes.len() % 2 == 1, "need an odd number of modes");
        Self {
            amplitudes,
            pump_power,
            comb_offset: 0.0,
        }
    }

    pub fn m(&self) -> usize {
        self.amplitudes.len() / 2
    }

    pub fn amp(&self, k: i32) -> Complex64 {
        self.amplitudes[(k + self.m() as i32) as usize]
    }

    pub fn amp_mut(&mut self, k: i32) -> &mut Complex64 {
        let m = self.m() as i32;
        &mut self.amplitudes[(k + m) as usize]
    }

    pub fn photon_numbers(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes
            .iter()
            .all(|a| a.re.is_finite() && a.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest sideband amplitude relative to the pump.
    pub fn sideband_fraction(&self) -> f64 {
        let pump = self.amp(0).norm();
        let m = self.m() as i32;
        let side = (-m..=m)
            .filter(|&k| k != 0)
            .map(|k| self.amp(k).norm())
            .fold(0.0, f64::max);
        if pump == 0.0 {
            if side == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            side / pump
        }
    }

    pub fn is_pump_only(&self, rel_tol: f64) -> bool {
        self.sideband_fraction() <= rel_tol
    }

    /// Applies the symmetry `A_k -> A_k exp(i k theta)`.
    pub fn rotated(&self, theta: f64) -> Self {
        let m = self.m() as i32;
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(-m..=m)
            .map(|(a, k)| a * Complex64::from_polar(1.0, k as f64 * theta))
            .collect();
        Self {
            amplitudes,
            ..self.clone()
        }
    }

    /// Euclidean distance relative to the larger of the two norms.
    pub fn relative_distance(&self, other: &Self) -> f64 {
        let num: f64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den = norm2(&self.amplitudes)
            .max(norm2(&other.amplitudes))
            .max(f64::MIN_POSITIVE);
        num / den
    }

    /// Distance modulo the `k theta` phase symmetry, relative. Compares
    /// `|A_k|` and the gauge-invariant products `A_k A_{-k}`.
    pub fn invariant_distance(&self, other: &Self) -> f64 {
        let m = self.m() as i32;
        let mut num = 0.0;
        let mut den: f64 = 0.0;
        for k in 0..=m {
            let (a, b) = (self.amp(k) * self.amp(-k), other.amp(k) * other.amp(-k));
            num += (a - b).norm_sqr();
            den = den.max(a.norm_sqr()).max(b.norm_sqr());
            let (x, y) = (self.amp(k).norm_sqr(), other.amp(k).norm_sqr());
            let (xm, ym) = (self.amp(-k).norm_sqr(), other.amp(-k).norm_sqr());
            num += (x - y).powi(2) + (xm - ym).powi(2);
            den = den.max(x * x).max(y * y);
        }
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    }
}

pub(crate) fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Linear coefficient `-(kappa_k/2 + i (Delta_k - k nu))` of mode `k`.
fn linear_coefficient(params: &SystemParams, slot: usize, nu: f64) -> Complex64 {
    let k = slot as f64 - params.m as f64;
    Complex64::new(
        -0.5 * params.kappa_total[slot],
        -(params.detuning[slot] - k * nu),
    )
}

/// Time derivative `dA/dt` of the classical coupled-mode equations:
///
/// `F_j = -(kappa_j/2 + i Delta_j) A_j + i g sum_{p+q-r=j} A_p A_q conj(A_r)
///        + delta_{j0} sqrt(kappa_ext_0) s_in`
///
/// with `s_in = sqrt(P / hbar omega_0)` real. When the state carries a
/// nonzero `comb_offset`, the derivative is taken in its co-rotating frame.
pub fn coupled_mode_rhs(params: &SystemParams, state: &ClassicalState) -> Vec<Complex64> {
    let n = params.n_modes();
    assert_eq!(
        state.amplitudes.len(),
        n,
        "state length does not match 2M+1"
    );
    let a = &state.amplitudes;
    let mut f: Vec<Complex64> = (0..n)
        .map(|j| linear_coefficient(params, j, state.comb_offset) * a[j])
        .collect();
    if params.g != 0.0 {
        let ig = I * params.g;
        for (j, fj) in f.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..n {
                for q in 0..n {
                    // r = p + q - j in slot arithmetic
                    let r = p as isize + q as isize - j as isize;
                    if r < 0 || r >= n as isize {
                        continue;
                    }
                    acc += a[p] * a[q] * a[r as usize].conj();
                }
            }
            *fj += ig * acc;
        }
    }
    let pump = params.slot(0);
    f[pump] += params.kappa_ext[pump].sqrt() * params.drive_amplitude();
    f
}

/// Holomorphic split of the linearization: `dF = P dA + Q conj(dA)`.
pub fn holomorphic_jacobian(
    params: &SystemParams,
    state: &ClassicalState,
) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let n = params.n_modes();
    let a = &state.amplitudes;
    let ig = I * params.g;
    let mut p_mat = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let mut q_mat = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for j in 0..n {
        p_mat[(j, j)] = linear_coefficient(params, j, state.comb_offset);
    }
    if params.g == 0.0 {
        return (p_mat, q_mat);
    }
    for j in 0..n {
        for m in 0..n {
            // dF_j/dA_m = 2 i g sum_q A_q conj(A_{m+q-j})
            let mut sp = Complex64::new(0.0, 0.0);
            let mut sq = Complex64::new(0.0, 0.0);
            for q in 0..n {
                let r = m as isize + q as isize - j as isize;
                if (0..n as isize).contains(&r) {
                    sp += a[q] * a[r as usize].conj();
                }
                // dF_j/dconj(A_m) = i g sum_p A_p A_{j+m-p}
                let s = j as isize + m as isize - q as isize;
                if (0..n as isize).contains(&s) {
                    sq += a[q] * a[s as usize];
                }
            }
            p_mat[(j, m)] += 2.0 * ig * sp;
            q_mat[(j, m)] = ig * sq;
        }
    }
    (p_mat, q_mat)
}

/// Real Jacobian of `(Re F_j, Im F_j)` with respect to `(Re A_m, Im A_m)`,
/// interleaved per mode in slot order.
pub fn real_jacobian(params: &SystemParams, state: &ClassicalState) -> DMatrix<f64> {
    let (p, q) = holomorphic_jacobian(params, state);
    let n = params.n_modes();
    let mut jac = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for m in 0..n {
            let plus = p[(j, m)] + q[(j, m)];
            let minus = p[(j, m)] - q[(j, m)];
            jac[(2 * j, 2 * m)] = plus.re;
            jac[(2 * j, 2 * m + 1)] = -minus.im;
            jac[(2 * j + 1, 2 * m)] = plus.im;
            jac[(2 * j + 1, 2 * m + 1)] = minus.re;
        }
    }
    jac
}

/// `d/dt sum_k w_k |A_k|^2 = 2 sum_k w_k Re(conj(A_k) F_k)` for a given
/// derivative vector.
pub fn weighted_photon_rate(weights: &[f64], state: &ClassicalState, deriv: &[Complex64]) -> f64 {
    weights
        .iter()
        .zip(&state.amplitudes)
        .zip(deriv)
        .map(|((w, a), f)| 2.0 * w * (a.conj() * f).re)
        .sum()
}
