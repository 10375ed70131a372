use std::f64::consts::PI;

use num_complex::Complex64;

use crate::model::{ClassicalState, SystemParams};

/// Real roots `x = |A0|^2` of `x [(kappa/2)^2 + (delta - g x)^2] = kappa_ext * flux`,
/// ascending.
pub fn pump_cubic_roots(kappa: f64, kappa_ext: f64, delta: f64, g: f64, flux: f64) -> Vec<f64> {
    let drive = kappa_ext * flux;
    if drive <= 0.0 {
        return vec![0.0];
    }
    let c1 = 0.25 * kappa * kappa + delta * delta;
    if g == 0.0 {
        return vec![drive / c1];
    }
    // In y = g x: y^3 - 2 delta y^2 + c1 y - g drive = 0.
    let c0 = g * drive;
    let b = -2.0 * delta;
    let shift = -b / 3.0;
    let p = c1 - b * b / 3.0;
    let q = 2.0 * b.powi(3) / 27.0 - b * c1 / 3.0 - c0;
    let disc = -(4.0 * p.powi(3) + 27.0 * q * q);
    let mut ys: Vec<f64> = if disc > 0.0 && p < 0.0 {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| r * (phi - 2.0 * PI * k as f64 / 3.0).cos() + shift)
            .collect()
    } else {
        let s = (q * q / 4.0 + p.powi(3) / 27.0).max(0.0).sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() + shift]
    };
    let cubic = |y: f64| ((y + b) * y + c1) * y - c0;
    let dcubic = |y: f64| (3.0 * y + 2.0 * b) * y + c1;
    for y in ys.iter_mut() {
        for _ in 0..8 {
            let d = dcubic(*y);
            if d == 0.0 {
                break;
            }
            let step = cubic(*y) / d;
            *y -= step;
            if step.abs() <= 1e-15 * y.abs() {
                break;
            }
        }
    }
    ys.retain(|y| *y > 0.0 && y.is_finite());
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());
    ys.into_iter().map(|y| y / g).collect()
}

/// All pump-only stationary states at pump power `power`, ordered by
/// intracavity photon number. Sidebands are exactly zero; the pump phase
/// follows from the linear response to the real drive.
pub fn pump_only_roots(params: &SystemParams, power: f64) -> Vec<ClassicalState> {
    let s0 = params.slot(0);
    let kappa = params.kappa_total[s0];
    let kappa_ext = params.kappa_ext[s0];
    let delta = params.detuning[s0];
    let flux = params.photon_flux(power);
    let drive = kappa_ext.sqrt() * flux.sqrt();
    pump_cubic_roots(kappa, kappa_ext, delta, params.g, flux)
        .into_iter()
        .map(|x| {
            let mut st = ClassicalState::zeros(params.m);
            st.pump_power = power;
            if x > 0.0 {
                *st.amp_mut(0) = drive / Complex64::new(0.5 * kappa, delta - params.g * x);
            }
            st
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::coupled_mode_rhs;

    /// Discriminant of a x^3 + b x^2 + c x + d.
    fn discriminant(a: f64, b: f64, c: f64, d: f64) -> f64 {
        18.0 * a * b * c * d - 4.0 * b.powi(3) * d + b * b * c * c
            - 4.0 * a * c.powi(3)
            - 27.0 * a * a * d * d
    }

    fn params(delta0: f64) -> SystemParams {
        let mut p = SystemParams::flat(1, 1.0, 0.6, delta0, 40.0, 0.01, 0.0);
        p.photon_energy = 1.0;
        p
    }

    #[test]
    fn zero_drive_gives_single_zero_state() {
        let roots = pump_only_roots(&params(2.0), 0.0);
        assert_eq!(roots.len(), 1);
        assert!(roots[0].amplitudes.iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn linear_cavity_single_root() {
        let mut p = params(0.7);
        p.g = 0.0;
        let roots = pump_only_roots(&p, 5.0);
        assert_eq!(roots.len(), 1);
        let expect = 0.6 * 5.0 / (0.25 + 0.49);
        assert!((roots[0].amp(0).norm_sqr() - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn root_count_follows_discriminant() {
        // delta0 = sqrt(3) kappa is past the bistability knee at sqrt(3)/2 kappa.
        let delta = 3f64.sqrt();
        let p = params(delta);
        let mut saw_three = false;
        for i in 1..400 {
            let power = 10.0 * i as f64;
            let roots = pump_only_roots(&p.with_pump(power), power);
            // x cubic: g^2 x^3 - 2 delta g x^2 + (1/4 + delta^2) x - kext P
            let d = discriminant(
                p.g * p.g,
                -2.0 * delta * p.g,
                0.25 + delta * delta,
                -0.6 * power,
            );
            if d.abs() < 1e-6 * (0.6 * power).powi(2) * p.g.powi(4) {
                continue; // too close to a fold to classify
            }
            let expected = if d > 0.0 { 3 } else { 1 };
            assert_eq!(roots.len(), expected, "P = {power}, disc = {d}");
            saw_three |= expected == 3;
            for r in &roots {
                let f = coupled_mode_rhs(&p.with_pump(power), r);
                assert!(f.iter().all(|x| x.norm() <= 1e-9 * r.max_abs()), "{f:?}");
            }
        }
        assert!(saw_three);
    }
}
