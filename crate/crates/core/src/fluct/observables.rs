use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fluct::NoiseSpectrum;
use crate::model::{ClassicalState, SystemParams};

/// Output fluxes below this fraction of the pump flux count as dark.
const DARK_FRACTION: f64 = 1e-12;

/// Noise of one intensity observable relative to its shot-noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseReport {
    pub label: String,
    /// Photocurrent variance, photons/s units of the output flux.
    pub variance: f64,
    /// Shot-noise variance of coherent beams with the same mean fluxes.
    pub snl: f64,
    pub snl_definition: String,
}

impl NoiseReport {
    /// Variance in shot-noise units.
    pub fn normalized(&self) -> f64 {
        self.variance / self.snl
    }

    pub fn db(&self) -> f64 {
        10.0 * self.normalized().log10()
    }

    /// The same observable after the loss and electronic-noise model.
    pub fn detected(&self, eta: f64, electronic_noise_rel: f64) -> Result<NoiseReport> {
        let v = super::apply_detection_chain(self.normalized(), eta, electronic_noise_rel)?;
        Ok(NoiseReport {
            label: format!("{} (detected)", self.label),
            variance: v * self.snl,
            ..self.clone()
        })
    }
}

/// Output field amplitudes `sqrt(kappa_ext_k) A_k`, minus the drive for the
/// pump. `|A_out|^2` is the outgoing photon flux.
pub fn output_amplitudes(params: &SystemParams, state: &ClassicalState) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = state
        .amplitudes
        .iter()
        .zip(&params.kappa_ext)
        .map(|(a, ke)| ke.sqrt() * a)
        .collect();
    out[params.slot(0)] -= params.photon_flux(state.pump_power).sqrt();
    out
}

/// Quadrature-space vector `|A_out,k| (cos th, sin th)` on mode `k`, with
/// `th = arg A_out,k`: the linearized photocurrent `dn_k = u . v`.
pub fn amplitude_selector(params: &SystemParams, out: &[Complex64], k: i32) -> DVector<f64> {
    let mut u = DVector::zeros(2 * params.n_modes());
    let s = params.slot(k);
    u[2 * s] = out[s].re;
    u[2 * s + 1] = out[s].im;
    u
}

fn check_bright(params: &SystemParams, out: &[Complex64], k: i32, pump_power: f64) -> Result<()> {
    let flux = out[params.slot(k)].norm_sqr();
    let floor = DARK_FRACTION * params.photon_flux(pump_power);
    if flux <= floor {
        return Err(Error::DarkMode { mode: k, flux });
    }
    Ok(())
}

fn check_m_meas(params: &SystemParams, m_meas: usize) -> Result<()> {
    if m_meas == 0 || m_meas > params.m {
        return Err(Error::param(
            "M_meas",
            format!("must lie in 1..={}", params.m),
        ));
    }
    Ok(())
}

/// `Var(n_k - n_-k)` normalized by `|A_out,k|^2 + |A_out,-k|^2`.
pub fn intensity_diff_noise(
    params: &SystemParams,
    state: &ClassicalState,
    spectrum: &NoiseSpectrum,
    k: i32,
) -> Result<NoiseReport> {
    if k < 1 || k as usize > params.m {
        return Err(Error::param("k", format!("must lie in 1..={}", params.m)));
    }
    let out = output_amplitudes(params, state);
    check_bright(params, &out, k, state.pump_power)?;
    check_bright(params, &out, -k, state.pump_power)?;
    let u = amplitude_selector(params, &out, k) - amplitude_selector(params, &out, -k);
    let variance = u.dot(&(&spectrum.matrix * &u));
    let snl = out[params.slot(k)].norm_sqr() + out[params.slot(-k)].norm_sqr();
    Ok(NoiseReport {
        label: format!("Var(n{k} - n-{k})"),
        variance,
        snl,
        snl_definition: format!("|A_out,{k}|^2 + |A_out,-{k}|^2"),
    })
}

/// `Var(C)` with `C = sum_{|k| <= m_meas} k n_k`, normalized by
/// `sum k^2 |A_out,k|^2`. Modes beyond `m_meas` are traced out.
pub fn carlos_noise(
    params: &SystemParams,
    state: &ClassicalState,
    spectrum: &NoiseSpectrum,
    m_meas: usize,
) -> Result<NoiseReport> {
    check_m_meas(params, m_meas)?;
    let out = output_amplitudes(params, state);
    let mm = m_meas as i32;
    let mut u = DVector::zeros(2 * params.n_modes());
    let mut snl = 0.0;
    for k in (-mm..=mm).filter(|&k| k != 0) {
        check_bright(params, &out, k, state.pump_power)?;
        u += amplitude_selector(params, &out, k) * k as f64;
        snl += (k * k) as f64 * out[params.slot(k)].norm_sqr();
    }
    let variance = u.dot(&(&spectrum.matrix * &u));
    Ok(NoiseReport {
        label: format!("Var(C), M_meas = {m_meas}"),
        variance,
        snl,
        snl_definition: format!("sum_{{|k| <= {m_meas}}} k^2 |A_out,k|^2"),
    })
}

/// Covariance matrix `Cov(n_k, n_l)` of the output photocurrents, slot
/// order.
pub fn number_covariance(
    params: &SystemParams,
    state: &ClassicalState,
    spectrum: &NoiseSpectrum,
) -> DMatrix<f64> {
    let out = output_amplitudes(params, state);
    let n = params.n_modes();
    let sel: Vec<DVector<f64>> = params
        .modes()
        .map(|k| amplitude_selector(params, &out, k))
        .collect();
    let su: Vec<DVector<f64>> = sel.iter().map(|u| &spectrum.matrix * u).collect();
    DMatrix::from_fn(n, n, |i, j| sel[i].dot(&su[j]))
}

/// Split of `Var(C)` into symmetric-pair and cross-pair parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub var_c: f64,
    /// `sum_{k=1..M} k^2 Var(n_k - n_-k)`.
    pub var_bp: f64,
    /// `sum k l Cov(n_k, n_l)` over `k != l`, `k != -l`.
    pub cov_mp: f64,
    /// `sum k l Cov(n_k, n_l)` over all `k != l`, which also contains the
    /// `(k, -k)` pair covariances.
    pub cov_all_pairs: f64,
    /// Shot-noise level of `C`; also that of the pair sum.
    pub snl: f64,
}

impl Decomposition {
    pub fn identity_residual(&self) -> f64 {
        (self.var_c - self.var_bp - self.cov_mp).abs()
    }

    /// `(Var_C, Var_BP, Cov_MP)` in shot-noise units.
    pub fn normalized(&self) -> (f64, f64, f64) {
        (
            self.var_c / self.snl,
            self.var_bp / self.snl,
            self.cov_mp / self.snl,
        )
    }
}

/// Decomposition from a number covariance matrix over modes `-m..=m`
/// (slot order), restricted to `|k| <= m_meas`. `snl` is carried along
/// unchanged.
pub fn decompose_number_covariance(cov: &DMatrix<f64>, m_meas: usize, snl: f64) -> Decomposition {
    let m = (cov.nrows() / 2) as i32;
    let mm = m_meas as i32;
    let c = |k: i32, l: i32| cov[((k + m) as usize, (l + m) as usize)];
    let mut var_c = 0.0;
    let mut cov_mp = 0.0;
    let mut cov_all_pairs = 0.0;
    for k in -mm..=mm {
        for l in -mm..=mm {
            let w = (k * l) as f64 * c(k, l);
            var_c += w;
            if k != l {
                cov_all_pairs += w;
                if k != -l {
                    cov_mp += w;
                }
            }
        }
    }
    let var_bp = (1..=mm)
        .map(|k| (k * k) as f64 * (c(k, k) + c(-k, -k) - c(k, -k) - c(-k, k)))
        .sum();
    Decomposition {
        var_c,
        var_bp,
        cov_mp,
        cov_all_pairs,
        snl,
    }
}

pub fn variance_decomposition(
    params: &SystemParams,
    state: &ClassicalState,
    spectrum: &NoiseSpectrum,
    m_meas: usize,
) -> Result<Decomposition> {
    let report = carlos_noise(params, state, spectrum, m_meas)?;
    let cov = number_covariance(params, state, spectrum);
    Ok(decompose_number_covariance(&cov, m_meas, report.snl))
}
