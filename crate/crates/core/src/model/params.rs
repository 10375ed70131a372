use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Pump wavelength of the reference device, m.
const DEFAULT_WAVELENGTH: f64 = 1560.053e-9;
/// Loaded cavity linewidth (FWHM) of the reference device, Hz.
const DEFAULT_LINEWIDTH_HZ: f64 = 630e6;
/// Free spectral range of the reference device, Hz. Informational only: the
/// model lives in the rotating frame of the equidistant grid.
pub const DEFAULT_FSR_HZ: f64 = 200e9;
/// Measured oscillation threshold of the reference device, W.
const DEFAULT_THRESHOLD_W: f64 = 53e-3;
/// Escape efficiency kappa_ext / kappa of the overcoupled default resonator.
const DEFAULT_ESCAPE: f64 = 0.65;

/// Physical and numerical parameters of the `(2M+1)`-mode resonator.
///
/// Per-mode arrays are stored in slot order `k = -M..=M`. All rates are
/// angular (rad/s); detunings are cold-cavity offsets from the equidistant
/// grid in the frame rotating with the pump laser.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Half-width of the mode window.
    pub m: usize,
    pub kappa_total: Vec<f64>,
    pub kappa_ext: Vec<f64>,
    pub detuning: Vec<f64>,
    /// Single-photon Kerr coupling rate.
    pub g: f64,
    /// Input pump power, W.
    pub pump_power: f64,
    /// Pump photon energy `hbar * omega_0`, J.
    pub photon_energy: f64,
    pub eta_f: f64,
    pub eta_g: f64,
    pub eta_opt: f64,
    pub eta_pd: f64,
    /// Electronic noise floor relative to shot noise at the analysis frequency.
    pub electronic_noise_rel: f64,
}

impl Default for SystemParams {
    /// Reference device: 630 MHz linewidth, overcoupled, pump resonant
    /// (`delta0 = 0`), dispersion placing the first sideband pair on the
    /// phase-matching point, and `g` chosen so that the threshold sits at
    /// 53 mW. Detection efficiencies multiply to about 0.72.
    fn default() -> Self {
        let kappa = 2.0 * PI * DEFAULT_LINEWIDTH_HZ;
        let kappa_ext = DEFAULT_ESCAPE * kappa;
        let photon_energy = photon_energy_at(DEFAULT_WAVELENGTH);
        // Phase-matched threshold: g |A0|^2 = kappa/2 with delta0 = 0.
        let g = photon_energy * kappa.powi(3) / (4.0 * kappa_ext * DEFAULT_THRESHOLD_W);
        let mut p = Self::flat(
            2,
            kappa,
            kappa_ext,
            0.0,
            2.0 * kappa,
            g,
            1.13 * DEFAULT_THRESHOLD_W,
        );
        p.photon_energy = photon_energy;
        p
    }
}

/// `hbar * omega` for a vacuum wavelength in metres.
pub fn photon_energy_at(wavelength: f64) -> f64 {
    HBAR * 2.0 * PI * SPEED_OF_LIGHT / wavelength
}

impl SystemParams {
    /// Flat loss profile with quadratic detuning `delta0 + d2/2 * k^2`.
    pub fn flat(
        m: usize,
        kappa: f64,
        kappa_ext: f64,
        delta0: f64,
        d2: f64,
        g: f64,
        pump_power: f64,
    ) -> Self {
        let n = 2 * m + 1;
        Self {
            m,
            kappa_total: vec![kappa; n],
            kappa_ext: vec![kappa_ext; n],
            detuning: Self::quadratic_detuning(m, delta0, d2),
            g,
            pump_power,
            photon_energy: photon_energy_at(DEFAULT_WAVELENGTH),
            eta_f: 0.90,
            eta_g: 0.94,
            eta_opt: 0.97,
            eta_pd: 0.88,
            electronic_noise_rel: 0.0,
        }
    }

    pub fn quadratic_detuning(m: usize, delta0: f64, d2: f64) -> Vec<f64> {
        let m = m as i32;
        (-m..=m)
            .map(|k| delta0 + 0.5 * d2 * (k * k) as f64)
            .collect()
    }

    /// Checks every invariant, returning the parameters unchanged on success.
    pub fn validate(self) -> Result<Self> {
        self.check()?;
        Ok(self)
    }

    pub fn check(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::param("M", "need at least modes ±1"));
        }
        let n = self.n_modes();
        for (field, v) in [
            ("kappa_total", &self.kappa_total),
            ("kappa_ext", &self.kappa_ext),
            ("detuning", &self.detuning),
        ] {
            if v.len() != n {
                return Err(Error::param(
                    field,
                    format!("expected {n} entries, got {}", v.len()),
                ));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::param(field, "entries must be finite"));
            }
        }
        if self.kappa_ext.iter().any(|&x| x <= 0.0) {
            return Err(Error::param(
                "kappa_ext",
                "external coupling must be positive",
            ));
        }
        if let Some(i) = (0..n).find(|&i| self.kappa_ext[i] > self.kappa_total[i]) {
            return Err(Error::param(
                "kappa_ext",
                format!(
                    "kappa_ext > kappa_total for mode {}",
                    i as i32 - self.m as i32
                ),
            ));
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::param(
                "g",
                "Kerr coupling must be finite and non-negative",
            ));
        }
        if !(self.pump_power >= 0.0 && self.pump_power.is_finite()) {
            return Err(Error::param(
                "pump_power",
                "must be finite and non-negative",
            ));
        }
        if !(self.photon_energy > 0.0 && self.photon_energy.is_finite()) {
            return Err(Error::param("photon_energy", "must be positive"));
        }
        for (field, eta) in [
            ("eta_F", self.eta_f),
            ("eta_g", self.eta_g),
            ("eta_opt", self.eta_opt),
            ("eta_pd", self.eta_pd),
        ] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::param(
                    field,
                    format!("efficiency {eta} outside (0, 1]"),
                ));
            }
        }
        if !(self.electronic_noise_rel >= 0.0 && self.electronic_noise_rel.is_finite()) {
            return Err(Error::param(
                "electronic_noise_rel",
                "must be finite and >= 0",
            ));
        }
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        2 * self.m + 1
    }

    pub fn slot(&self, k: i32) -> usize {
        (k + self.m as i32) as usize
    }

    pub fn modes(&self) -> impl Iterator<Item = i32> {
        let m = self.m as i32;
        -m..=m
    }

    /// Overall detection efficiency.
    pub fn eta(&self) -> f64 {
        self.eta_f * self.eta_g * self.eta_opt * self.eta_pd
    }

    pub fn mean_kappa(&self) -> f64 {
        self.kappa_total.iter().sum::<f64>() / self.n_modes() as f64
    }

    /// Input photon flux for a pump power, photons/s.
    pub fn photon_flux(&self, power: f64) -> f64 {
        power / self.photon_energy
    }

    /// Real input drive amplitude `sqrt(flux)` at the configured pump power.
    pub fn drive_amplitude(&self) -> f64 {
        self.photon_flux(self.pump_power).sqrt()
    }

    pub fn with_pump(&self, power: f64) -> Self {
        Self {
            pump_power: power,
            ..self.clone()
        }
    }

    /// Gauge rescaling `A -> lambda A`: `g -> g / lambda^2`, drive amplitude
    /// `-> lambda * drive` (so power scales by `lambda^2`).
    pub fn rescaled(&self, lambda: f64) -> Self {
        Self {
            g: self.g / (lambda * lambda),
            pump_power: self.pump_power * lambda * lambda,
            ..self.clone()
        }
    }

    /// Lower bound on any sideband oscillation threshold: gain `g |A0|^2`
    /// must exceed the smallest half-linewidth.
    pub fn threshold_lower_bound(&self) -> f64 {
        if self.g == 0.0 {
            return f64::INFINITY;
        }
        let k0 = self.kappa_total[self.slot(0)];
        let ke = self.kappa_ext[self.slot(0)];
        let kmin = self
            .kappa_total
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let x = kmin / (2.0 * self.g);
        self.photon_energy * x * (k0 * k0 / 4.0) / ke
    }
}
