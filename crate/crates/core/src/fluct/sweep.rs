use crate::error::{Error, Result};
use crate::fluct::{
    apply_detection_chain, intensity_diff_noise, output_spectrum, variance_decomposition,
};
use crate::model::SystemParams;
use crate::par;
use crate::steady::Branch;

/// Normalized noise of one sweep point. `None` marks a dark observable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointNoise {
    /// `Var(n_k - n_-k)` for `k = 1..=M`, shot-noise units.
    pub pair: Vec<Option<f64>>,
    pub var_c: Option<f64>,
    pub var_bp: Option<f64>,
    pub cov_mp: Option<f64>,
}

impl PointNoise {
    /// Loss and electronic noise applied to every variance. Covariances
    /// only scale with `eta`.
    pub fn detected(&self, eta: f64, electronic_noise_rel: f64) -> Result<PointNoise> {
        let chain = |v: Option<f64>| {
            v.map(|v| apply_detection_chain(v, eta, electronic_noise_rel))
                .transpose()
        };
        Ok(PointNoise {
            pair: self.pair.iter().map(|&v| chain(v)).collect::<Result<_>>()?,
            var_c: chain(self.var_c)?,
            var_bp: chain(self.var_bp)?,
            cov_mp: self.cov_mp.map(|c| eta * c),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRow {
    pub branch: String,
    pub power: f64,
    pub stable: bool,
    pub raw: PointNoise,
    pub detected: PointNoise,
    /// Why the point carries no spectrum (unstable state, ...).
    pub note: Option<String>,
}

fn optional<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::DarkMode { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn point_noise(
    params: &SystemParams,
    branch: &str,
    pt: &crate::steady::BranchPoint,
    omega: f64,
    m_meas: usize,
) -> NoiseRow {
    let p = params.with_pump(pt.power);
    let eval = || -> Result<(PointNoise, PointNoise)> {
        let s = output_spectrum(&p, &pt.state, omega)?;
        let pair = (1..=p.m as i32)
            .map(|k| {
                Ok(optional(intensity_diff_noise(&p, &pt.state, &s, k))?.map(|r| r.normalized()))
            })
            .collect::<Result<Vec<_>>>()?;
        let dec =
            optional(variance_decomposition(&p, &pt.state, &s, m_meas))?.map(|d| d.normalized());
        let raw = PointNoise {
            pair,
            var_c: dec.map(|d| d.0),
            var_bp: dec.map(|d| d.1),
            cov_mp: dec.map(|d| d.2),
        };
        let det = raw.detected(p.eta(), p.electronic_noise_rel)?;
        Ok((raw, det))
    };
    let (raw, detected, note) = match eval() {
        Ok((r, d)) => (r, d, None),
        Err(e) => (
            PointNoise::default(),
            PointNoise::default(),
            Some(e.to_string()),
        ),
    };
    NoiseRow {
        branch: branch.to_string(),
        power: pt.power,
        stable: pt.stable,
        raw,
        detected,
        note,
    }
}

/// Linearized noise at angular frequency `omega` for every point of every
/// branch, in branch order. Points whose spectrum cannot be formed keep a
/// note instead of values.
pub fn noise_along_branches(
    params: &SystemParams,
    branches: &[Branch],
    omega: f64,
    m_meas: usize,
) -> Result<Vec<NoiseRow>> {
    if !(omega > 0.0) {
        return Err(Error::NonPositiveFrequency(omega));
    }
    if m_meas == 0 || m_meas > params.m {
        return Err(Error::param(
            "M_meas",
            format!("must lie in 1..={}", params.m),
        ));
    }
    let jobs: Vec<(&str, &crate::steady::BranchPoint)> = branches
        .iter()
        .flat_map(|b| b.points.iter().map(move |pt| (b.label.as_str(), pt)))
        .collect();
    Ok(par::map(&jobs, |(label, pt)| {
        point_noise(params, label, pt, omega, m_meas)
    }))
}
