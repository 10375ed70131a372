use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ClassicalState, SystemParams};
use crate::par;
use crate::steady::{
    pump_only_roots, relax, relax::integrate, sideband_growth, solve_comb_with,
    stability_eigenvalues, threshold, NewtonOptions,
};

/// Relative size of the sideband seed placed on an unstable pump-only state.
const SEED_FRACTION: f64 = 1e-3;
/// Growth e-folding times allowed for a seeded sideband to saturate.
const GROWTH_TIMES: f64 = 40.0;
const MAX_GROW_TIME: f64 = 1e7;

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub power: f64,
    pub state: ClassicalState,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub label: String,
    /// Ordered by increasing pump power.
    pub points: Vec<BranchPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub newton: NewtonOptions,
    /// Longest relaxation integration, in units of `1 / mean kappa`.
    pub relax_time: f64,
    /// States closer than this (modulo phase symmetry) count as identical.
    pub merge_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            relax_time: 1e4,
            merge_tol: 1e-6,
        }
    }
}

/// Comb state at `power` grown from the pump-only state along the most
/// unstable sideband pair reported by [`threshold`].
pub fn seed_comb(params: &SystemParams, power: f64) -> Result<ClassicalState> {
    let th = threshold(params)?;
    let p = params.with_pump(power);
    let base = pump_only_roots(&p, power).remove(0);
    let grown = grow(&p, &base, th.mode, &SweepOptions::default());
    solve_comb_with(params, power, &grown, &NewtonOptions::default())
}

fn grow(p: &SystemParams, base: &ClassicalState, k: i32, opts: &SweepOptions) -> ClassicalState {
    let mut seeded = base.clone();
    let a0 = base.amp(0).norm();
    *seeded.amp_mut(k) += Complex64::new(SEED_FRACTION * a0, 0.0);
    *seeded.amp_mut(-k) += Complex64::new(SEED_FRACTION * a0, 0.0);
    let rate = sideband_growth(p, base, k).max(f64::MIN_POSITIVE);
    let t = (opts.relax_time / p.mean_kappa()).max(GROWTH_TIMES / rate);
    let grown = integrate(p, &seeded, t.min(MAX_GROW_TIME / p.mean_kappa()), false);
    relax(p, &grown, opts.relax_time / p.mean_kappa())
}

pub fn sweep_pump(
    params: &SystemParams,
    powers: &[f64],
    seeds: Option<&[ClassicalState]>,
) -> Result<Vec<Branch>> {
    sweep_pump_with(params, powers, seeds, &SweepOptions::default())
}

/// Natural-parameter continuation over an ascending power grid.
///
/// Every start state (the lowest pump-only root when `seeds` is `None`) is
/// swept up, then back down from the top state. Solver failures truncate a
/// branch. Up and down sweeps that agree wherever both exist are merged;
/// otherwise both are returned, which is how bistable intervals show up.
pub fn sweep_pump_with(
    params: &SystemParams,
    powers: &[f64],
    seeds: Option<&[ClassicalState]>,
    opts: &SweepOptions,
) -> Result<Vec<Branch>> {
    params.check()?;
    if powers.is_empty() {
        return Ok(Vec::new());
    }
    if powers.windows(2).any(|w| !(w[1] > w[0])) || powers[0] < 0.0 {
        return Err(Error::param(
            "powers",
            "must be non-negative and strictly ascending",
        ));
    }
    let starts: Vec<ClassicalState> = match seeds {
        Some(s) => s.to_vec(),
        None => vec![pump_only_roots(params, powers[0]).remove(0)],
    };
    let labelled = seeds.is_some();
    let runs = par::map(&starts, |start| sweep_one(params, powers, start, opts));
    let mut out = Vec::new();
    for (i, (up, down)) in runs.into_iter().enumerate() {
        let prefix = if labelled {
            format!("seed{i}-")
        } else {
            String::new()
        };
        if branches_agree(&up, &down, opts.merge_tol) {
            out.push(Branch {
                label: format!("{prefix}sweep"),
                points: up,
            });
        } else {
            out.push(Branch {
                label: format!("{prefix}up"),
                points: up,
            });
            out.push(Branch {
                label: format!("{prefix}down"),
                points: down,
            });
        }
    }
    Ok(out)
}

fn branches_agree(up: &[BranchPoint], down: &[BranchPoint], tol: f64) -> bool {
    down.iter().all(|d| {
        up.iter()
            .find(|u| u.power == d.power)
            .is_some_and(|u| u.state.invariant_distance(&d.state) <= tol)
    }) && up.len() >= down.len()
}

fn sweep_one(
    params: &SystemParams,
    powers: &[f64],
    start: &ClassicalState,
    opts: &SweepOptions,
) -> (Vec<BranchPoint>, Vec<BranchPoint>) {
    let mut up = Vec::with_capacity(powers.len());
    let mut guess = start.clone();
    for &power in powers {
        match continue_to(params, power, &guess, opts) {
            Some(pt) => {
                guess = pt.state.clone();
                up.push(pt);
            }
            None => break,
        }
    }
    let mut down = Vec::with_capacity(up.len());
    if let Some(top) = up.last() {
        let mut guess = top.state.clone();
        let top_index = up.len() - 1;
        for &power in powers[..=top_index].iter().rev() {
            match continue_to(params, power, &guess, opts) {
                Some(pt) => {
                    guess = pt.state.clone();
                    down.push(pt);
                }
                None => break,
            }
        }
        down.reverse();
    }
    (up, down)
}

/// One continuation step. A Newton failure falls back to relaxing the
/// previous state at the new power; an unstable result is replaced by the
/// attractor reached from a small perturbation when that converges.
fn continue_to(
    params: &SystemParams,
    power: f64,
    guess: &ClassicalState,
    opts: &SweepOptions,
) -> Option<BranchPoint> {
    let p = params.with_pump(power);
    let t_max = opts.relax_time / p.mean_kappa();
    let solved = solve_comb_with(params, power, guess, &opts.newton).or_else(|_| {
        let relaxed = relax(&p, guess, t_max);
        solve_comb_with(params, power, &relaxed, &opts.newton)
    });
    let state = solved.ok()?;
    let stab = stability_eigenvalues(&p, &state);
    if stab.stable {
        return Some(BranchPoint {
            power,
            state,
            stable: true,
        });
    }
    let perturbed = if state.is_pump_only(1e-12) {
        let k = (1..=params.m as i32)
            .max_by(|&a, &b| {
                sideband_growth(&p, &state, a)
                    .partial_cmp(&sideband_growth(&p, &state, b))
                    .unwrap()
            })
            .unwrap_or(1);
        grow(&p, &state, k, opts)
    } else {
        let mut kicked = state.clone();
        let m = kicked.m() as i32;
        for k in -m..=m {
            let scale = SEED_FRACTION * kicked.max_abs();
            *kicked.amp_mut(k) += Complex64::new(scale * (1.0 + 0.1 * k as f64), 0.0);
        }
        relax(&p, &kicked, t_max)
    };
    match solve_comb_with(params, power, &perturbed, &opts.newton) {
        Ok(s) => {
            let stable = stability_eigenvalues(&p, &s).stable;
            Some(BranchPoint {
                power,
                state: s,
                stable,
            })
        }
        Err(_) => Some(BranchPoint {
            power,
            state,
            stable: false,
        }),
    }
}
