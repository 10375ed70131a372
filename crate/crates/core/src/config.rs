//! TOML run configuration.
//!
//! Four blocks (`[system]`, `[sweep]`, `[oracle]`, `[dsp]`) plus the output
//! directory. Every key is optional and falls back to the reference-device
//! defaults; unknown keys are rejected with their full key path.
//!
//! ```
//! use kcomb::config::RunConfig;
//!
//! let cfg = RunConfig::from_toml_str("[system]\nm = 3\npump_power = 0.06\n").unwrap();
//! let p = cfg.system_params().unwrap();
//! assert_eq!(p.n_modes(), 7);
//! assert!(RunConfig::from_toml_str("[system]\nkapa = 1.0\n").is_err());
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dsp::{Acquisition, ProcessOptions, Window};
use crate::error::{Error, Result};
use crate::fock::{OracleConfig, DEFAULT_DIM_LIMIT};
use crate::model::SystemParams;

/// A scalar applied to every mode, or one value per mode in slot order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerMode<T> {
    Flat(T),
    Modes(Vec<T>),
}

impl<T: Clone> PerMode<T> {
    fn expand(&self, n: usize) -> Vec<T> {
        match self {
            PerMode::Flat(x) => vec![x.clone(); n],
            PerMode::Modes(v) => v.clone(),
        }
    }
}

/// `[system]`: keys follow the [`SystemParams`] field names. Detunings are
/// given either per mode (`detuning`) or through `delta0` and `d2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub m: usize,
    pub kappa_total: PerMode<f64>,
    pub kappa_ext: PerMode<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d2: Option<f64>,
    pub g: f64,
    pub pump_power: f64,
    pub photon_energy: f64,
    #[serde(rename = "eta_F")]
    pub eta_f: f64,
    pub eta_g: f64,
    pub eta_opt: f64,
    pub eta_pd: f64,
    pub electronic_noise_rel: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let p = SystemParams::default();
        Self {
            m: p.m,
            kappa_total: PerMode::Flat(p.kappa_total[0]),
            kappa_ext: PerMode::Flat(p.kappa_ext[0]),
            detuning: None,
            delta0: None,
            d2: None,
            g: p.g,
            pump_power: p.pump_power,
            photon_energy: p.photon_energy,
            eta_f: p.eta_f,
            eta_g: p.eta_g,
            eta_opt: p.eta_opt,
            eta_pd: p.eta_pd,
            electronic_noise_rel: p.electronic_noise_rel,
        }
    }
}

/// `[sweep]`: pump grid in units of the threshold, analysis frequency and
/// measured mode window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Explicit grid; overrides `p_min`, `p_max`, `points`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_over_pth: Option<Vec<f64>>,
    pub p_min: f64,
    pub p_max: f64,
    pub points: usize,
    pub omega_hz: f64,
    /// Defaults to the full window `M`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_meas: Option<usize>,
    /// Relaxation budget in units of `1 / mean kappa`.
    pub relax_time: f64,
    /// Upper end of the threshold search, W.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_p_max: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            p_over_pth: None,
            p_min: 1.05,
            p_max: 1.35,
            points: 13,
            omega_hz: 4e6,
            m_meas: None,
            relax_time: 1e4,
            threshold_p_max: None,
        }
    }
}

/// `[oracle]`: truncated Fock-space invariant suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleBlock {
    pub m: usize,
    pub cutoff: PerMode<usize>,
    pub g: f64,
    pub alpha_pump: f64,
    /// Largest `g t`; the grid is `gt_max * i / gt_steps`.
    pub gt_max: f64,
    pub gt_steps: usize,
    pub random_states: usize,
    pub seed: u64,
    pub dim_limit: usize,
}

impl Default for OracleBlock {
    fn default() -> Self {
        let d = OracleConfig::default();
        Self {
            m: d.m,
            cutoff: PerMode::Flat(3),
            g: d.g,
            alpha_pump: d.alpha_pump,
            gt_max: 2.0,
            gt_steps: 10,
            random_states: d.random_states,
            seed: d.seed,
            dim_limit: DEFAULT_DIM_LIMIT,
        }
    }
}

/// Where `dsp synth` takes its target spectrum from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SynthSource {
    /// Flat two-pair target at `delta_db`, `carlos_db`.
    #[default]
    Target,
    /// Photocurrents of the simulated comb at `[system]` and `[sweep].omega_hz`.
    Simulation,
}

/// `[dsp]`: acquisition layout, processing options and synthesis target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DspConfig {
    pub sample_rate: f64,
    pub segment_length: usize,
    pub n_segments: usize,
    pub seed: u64,
    pub omega_hz: f64,
    pub half_width: usize,
    pub window: Window,
    /// Low-pass cutoff, Hz; 0 disables the filter.
    pub lowpass_hz: f64,
    pub max_freq_hz: f64,
    pub weights: [f64; 2],
    pub free_beta: bool,
    pub free_alpha: bool,
    pub per_frequency: bool,
    pub source: SynthSource,
    /// Injected `Delta_1`, `Delta_2` noise, dB relative to shot noise.
    pub delta_db: [f64; 2],
    pub carlos_db: f64,
    /// Shot-noise variance per sample at unit DC level.
    pub shot_level: f64,
    /// Per-channel delays in samples, channel order `+1, -1, +2, -2`.
    pub delays: [f64; 4],
    /// DC levels of the synthesized shot-noise calibration runs.
    pub calibration_levels: Vec<f64>,
}

impl Default for DspConfig {
    fn default() -> Self {
        let acq = Acquisition::default();
        let opts = ProcessOptions::default();
        Self {
            sample_rate: acq.sample_rate,
            segment_length: acq.segment_length,
            n_segments: acq.n_segments,
            seed: 1,
            omega_hz: opts.omega_hz,
            half_width: opts.half_width,
            window: opts.window,
            lowpass_hz: opts.lowpass_hz.unwrap_or(0.0),
            max_freq_hz: opts.max_freq_hz,
            weights: [opts.weights.0, opts.weights.1],
            free_beta: opts.free_beta,
            free_alpha: opts.free_alpha,
            per_frequency: opts.per_frequency,
            source: SynthSource::Target,
            delta_db: [-2.5, 0.0],
            carlos_db: -2.0,
            shot_level: 1.0,
            delays: [0.0, 10.0, 0.0, 0.0],
            calibration_levels: vec![0.25, 0.5, 0.75, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub system: SystemConfig,
    pub sweep: SweepConfig,
    pub oracle: OracleBlock,
    pub dsp: DspConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("kcomb-out"),
            system: SystemConfig::default(),
            sweep: SweepConfig::default(),
            oracle: OracleBlock::default(),
            dsp: DspConfig::default(),
        }
    }
}

fn config_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

/// Re-homes a parameter error under its block.
fn under(block: &str, e: Error) -> Error {
    match e {
        Error::InvalidParam { field, reason } => {
            config_err(format!("{block}.{}", field.to_lowercase()), reason)
        }
        Error::Trace(msg) => config_err(block, msg),
        other => other,
    }
}

fn positive(path: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(config_err(
            path,
            format!("must be positive and finite, got {x}"),
        ))
    }
}

impl RunConfig {
    /// Parses and validates every block.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de =
            toml::Deserializer::parse(text).map_err(|e| config_err("<document>", e.message()))?;
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(path, e.into_inner().message())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(path.display().to_string(), e.to_string()))?;
        Self::from_toml_str(&text)
    }

    /// Fully resolved configuration, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.system_params()?;
        self.p_over_pth()?;
        self.m_meas()?;
        positive("sweep.omega_hz", self.sweep.omega_hz)?;
        positive("sweep.relax_time", self.sweep.relax_time)?;
        self.oracle_config()?;
        self.acquisition()?;
        self.process_options()?;
        let d = &self.dsp;
        positive("dsp.shot_level", d.shot_level)?;
        if d.delays.iter().any(|x| !x.is_finite()) {
            return Err(config_err("dsp.delays", "must be finite"));
        }
        if d.calibration_levels
            .iter()
            .any(|&x| !(x > 0.0 && x.is_finite()))
        {
            return Err(config_err(
                "dsp.calibration_levels",
                "levels must be positive",
            ));
        }
        Ok(())
    }

    pub fn system_params(&self) -> Result<SystemParams> {
        let s = &self.system;
        let n = 2 * s.m + 1;
        let detuning = match (&s.detuning, s.delta0, s.d2) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(config_err(
                    "system.detuning",
                    "give either `detuning` or `delta0`/`d2`, not both",
                ));
            }
            (Some(d), None, None) => d.clone(),
            (None, delta0, d2) => {
                let mean = match &s.kappa_total {
                    PerMode::Flat(k) => *k,
                    PerMode::Modes(v) => v.iter().sum::<f64>() / v.len().max(1) as f64,
                };
                SystemParams::quadratic_detuning(
                    s.m,
                    delta0.unwrap_or(0.0),
                    d2.unwrap_or(2.0 * mean),
                )
            }
        };
        SystemParams {
            m: s.m,
            kappa_total: s.kappa_total.expand(n),
            kappa_ext: s.kappa_ext.expand(n),
            detuning,
            g: s.g,
            pump_power: s.pump_power,
            photon_energy: s.photon_energy,
            eta_f: s.eta_f,
            eta_g: s.eta_g,
            eta_opt: s.eta_opt,
            eta_pd: s.eta_pd,
            electronic_noise_rel: s.electronic_noise_rel,
        }
        .validate()
        .map_err(|e| under("system", e))
    }

    /// Ascending pump grid in units of the threshold.
    pub fn p_over_pth(&self) -> Result<Vec<f64>> {
        let s = &self.sweep;
        let grid = match &s.p_over_pth {
            Some(g) => g.clone(),
            None => {
                if s.points == 0 {
                    return Err(config_err("sweep.points", "need at least one point"));
                }
                if s.points == 1 {
                    vec![s.p_min]
                } else {
                    let step = (s.p_max - s.p_min) / (s.points - 1) as f64;
                    (0..s.points).map(|i| s.p_min + step * i as f64).collect()
                }
            }
        };
        if grid.is_empty() || grid.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(config_err("sweep.p_over_pth", "entries must be positive"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(config_err(
                "sweep.p_over_pth",
                "grid must be strictly ascending",
            ));
        }
        Ok(grid)
    }

    pub fn m_meas(&self) -> Result<usize> {
        let m = self.sweep.m_meas.unwrap_or(self.system.m);
        if m == 0 || m > self.system.m {
            return Err(config_err(
                "sweep.m_meas",
                format!("must lie in 1..={}", self.system.m),
            ));
        }
        Ok(m)
    }

    pub fn oracle_config(&self) -> Result<OracleConfig> {
        let o = &self.oracle;
        let n = 2 * o.m + 1;
        let cutoffs = o.cutoff.expand(n);
        if cutoffs.len() != n {
            return Err(config_err(
                "oracle.cutoff",
                format!("expected {n} entries, got {}", cutoffs.len()),
            ));
        }
        if !(o.g.is_finite() && o.alpha_pump.is_finite()) {
            return Err(config_err("oracle", "g and alpha_pump must be finite"));
        }
        if !(o.gt_max >= 0.0 && o.gt_max.is_finite()) {
            return Err(config_err(
                "oracle.gt_max",
                "must be finite and non-negative",
            ));
        }
        let steps = o.gt_steps.max(1);
        Ok(OracleConfig {
            m: o.m,
            cutoffs,
            g: o.g,
            alpha_pump: o.alpha_pump,
            gt: (0..=steps)
                .map(|i| o.gt_max * i as f64 / steps as f64)
                .collect(),
            random_states: o.random_states,
            seed: o.seed,
            dim_limit: o.dim_limit,
        })
    }

    pub fn acquisition(&self) -> Result<Acquisition> {
        let acq = Acquisition {
            sample_rate: self.dsp.sample_rate,
            segment_length: self.dsp.segment_length,
            n_segments: self.dsp.n_segments,
        };
        acq.check().map_err(|e| under("dsp", e))?;
        Ok(acq)
    }

    pub fn process_options(&self) -> Result<ProcessOptions> {
        let d = &self.dsp;
        positive("dsp.omega_hz", d.omega_hz)?;
        positive("dsp.max_freq_hz", d.max_freq_hz)?;
        if !(d.lowpass_hz >= 0.0 && d.lowpass_hz.is_finite()) {
            return Err(config_err(
                "dsp.lowpass_hz",
                "must be finite and non-negative",
            ));
        }
        if d.weights.iter().any(|w| !w.is_finite() || *w == 0.0) {
            return Err(config_err(
                "dsp.weights",
                "weights must be finite and nonzero",
            ));
        }
        Ok(ProcessOptions {
            omega_hz: d.omega_hz,
            half_width: d.half_width,
            window: d.window,
            lowpass_hz: (d.lowpass_hz > 0.0).then_some(d.lowpass_hz),
            max_freq_hz: d.max_freq_hz,
            weights: (d.weights[0], d.weights[1]),
            free_beta: d.free_beta,
            free_alpha: d.free_alpha,
            per_frequency: d.per_frequency,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_reference_device() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.system_params().unwrap(), SystemParams::default());
        assert_eq!(cfg.oracle_config().unwrap(), OracleConfig::default());
        assert_eq!(cfg.process_options().unwrap(), ProcessOptions::default());
        assert_eq!(cfg.acquisition().unwrap(), Acquisition::default());
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = RunConfig::from_toml_str(
            "[system]\nm = 1\ndetuning = [1.0, 2.0, 3.0]\n[dsp]\nwindow = \"hann\"\n",
        )
        .unwrap();
        let back = RunConfig::from_toml_str(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_key_reports_path() {
        let err = RunConfig::from_toml_str("[sweep]\nomega = 1.0\n").unwrap_err();
        match err {
            Error::Config { path, .. } => assert!(path.starts_with("sweep"), "{path}"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn invalid_values_point_at_their_key() {
        let err = RunConfig::from_toml_str("[system]\neta_F = 1.5\n").unwrap_err();
        assert!(
            matches!(err, Error::Config { ref path, .. } if path == "system.eta_f"),
            "{err}"
        );
        let err =
            RunConfig::from_toml_str("[system]\nm = 2\nkappa_ext = [1.0, 1.0]\n").unwrap_err();
        assert!(
            matches!(err, Error::Config { ref path, .. } if path == "system.kappa_ext"),
            "{err}"
        );
        let err = RunConfig::from_toml_str("[sweep]\np_over_pth = [1.2, 1.1]\n").unwrap_err();
        assert!(
            matches!(err, Error::Config { ref path, .. } if path == "sweep.p_over_pth"),
            "{err}"
        );
    }

    #[test]
    fn linear_grid_hits_both_ends() {
        let g = RunConfig::default().p_over_pth().unwrap();
        assert_eq!(g.len(), 13);
        assert!((g[0] - 1.05).abs() < 1e-15 && (g[12] - 1.35).abs() < 1e-12);
    }
}
