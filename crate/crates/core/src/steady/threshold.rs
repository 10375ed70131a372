use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::model::{real_jacobian, ClassicalState, SystemParams};
use crate::steady::pump_only_roots;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOptions {
    /// Upper end of the search. Defaults to 100 times the gain lower bound.
    pub p_max: Option<f64>,
    pub scan_points: usize,
    pub rel_tol: f64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            p_max: None,
            scan_points: 512,
            rel_tol: 1e-9,
        }
    }
}

/// Oscillation threshold of the pump-only state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub power: f64,
    /// Sideband pair `±mode` that destabilizes first.
    pub mode: i32,
    /// Intracavity pump photon number `|A0|^2` at threshold.
    pub pump_photons: f64,
}

/// Largest real part of the eigenvalues of the `±k` sideband block of the
/// drift matrix at a pump-only state. At such states the block decouples
/// exactly from every other mode.
pub fn sideband_growth(params: &SystemParams, state: &ClassicalState, k: i32) -> f64 {
    let jac = real_jacobian(params, state);
    let idx = [
        2 * params.slot(k),
        2 * params.slot(k) + 1,
        2 * params.slot(-k),
        2 * params.slot(-k) + 1,
    ];
    let block = Matrix4::from_fn(|i, j| jac[(idx[i], idx[j])]);
    block
        .complex_eigenvalues()
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Growth rate and mode of the most unstable sideband pair on the lowest
/// pump-only root at power `p`.
fn growth_at(params: &SystemParams, p: f64) -> (f64, i32, f64) {
    let roots = pump_only_roots(params, p);
    let state = &roots[0];
    let pr = params.with_pump(p);
    let mut best = (f64::NEG_INFINITY, 1, state.amp(0).norm_sqr());
    for k in 1..=params.m as i32 {
        let gk = sideband_growth(&pr, state, k);
        if gk > best.0 {
            best = (gk, k, best.2);
        }
    }
    best
}

pub fn threshold(params: &SystemParams) -> Result<Threshold> {
    threshold_with(params, &ThresholdOptions::default())
}

/// Smallest pump power at which the lowest pump-only root becomes unstable
/// toward a sideband pair: geometric scan followed by bisection.
pub fn threshold_with(params: &SystemParams, opts: &ThresholdOptions) -> Result<Threshold> {
    params.check()?;
    let lower = params.threshold_lower_bound();
    if !lower.is_finite() {
        return Err(Error::NoThreshold {
            p_max: opts.p_max.unwrap_or(f64::INFINITY),
        });
    }
    let p_max = opts.p_max.unwrap_or(100.0 * lower);
    if !(p_max > 0.0) {
        return Err(Error::param("p_max", "must be positive"));
    }
    let start = (0.5 * lower).min(0.5 * p_max);
    let n = opts.scan_points.max(2);
    let ratio = (p_max / start).powf(1.0 / (n - 1) as f64);
    let mut prev = 0.0;
    let mut hi = None;
    for i in 0..n {
        let p = start * ratio.powi(i as i32);
        if growth_at(params, p).0 > 0.0 {
            hi = Some(p);
            break;
        }
        prev = p;
    }
    let Some(mut hi) = hi else {
        return Err(Error::NoThreshold { p_max });
    };
    let mut lo = prev;
    while hi - lo > opts.rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if growth_at(params, mid).0 > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (_, mode, pump_photons) = growth_at(params, hi);
    Ok(Threshold {
        power: hi,
        mode,
        pump_photons,
    })
}
