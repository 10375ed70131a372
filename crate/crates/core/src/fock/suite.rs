use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{
    build_carlos, build_fwm_hamiltonian, commutator_norm, decomposition_check, evolve, moments,
    phase_shift_unitary, truncation_outflow, FockSpace, FockState, DEFAULT_DIM_LIMIT,
};

/// Inputs of the invariant suite.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub m: usize,
    /// One cutoff per mode, slot order.
    pub cutoffs: Vec<usize>,
    pub g: f64,
    /// Coherent amplitude of the initially pumped mode.
    pub alpha_pump: f64,
    /// Evolution times in units of `1 / g`.
    pub gt: Vec<f64>,
    pub random_states: usize,
    pub seed: u64,
    pub dim_limit: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            m: 2,
            cutoffs: vec![3; 5],
            g: 1.0,
            alpha_pump: 1.0,
            gt: (0..=10).map(|i| 2.0 * i as f64 / 10.0).collect(),
            random_states: 20,
            seed: 7,
            dim_limit: DEFAULT_DIM_LIMIT,
        }
    }
}

/// One residual and, for pass/fail entries, its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: Option<f64>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.limit.is_none_or(|l| self.value <= l)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub dim: usize,
    pub nnz: usize,
    pub checks: Vec<Check>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.value)
    }
}

const THETAS: [f64; 5] = [0.7, -1.3, 2.1, 0.05, 3.0];

/// Runs every algebraic check of the oracle on one truncated space.
pub fn run_invariant_suite(cfg: &OracleConfig) -> Result<OracleReport> {
    if !(cfg.g.is_finite() && cfg.alpha_pump.is_finite()) {
        return Err(Error::param("oracle", "g and alpha_pump must be finite"));
    }
    let space = FockSpace::with_limit(cfg.m, cfg.cutoffs.clone(), cfg.dim_limit)?;
    let h = build_fwm_hamiltonian(&space, cfg.g);
    let c = build_carlos(&space);
    let mut checks = vec![
        Check {
            name: "hermiticity_H",
            value: h.hermiticity_error(),
            limit: Some(1e-12),
        },
        Check {
            name: "commutator_C_H",
            value: commutator_norm(&c, &h),
            limit: Some(1e-12),
        },
    ];
    let u_inv = THETAS
        .iter()
        .map(|&th| {
            let u = phase_shift_unitary(&space, th);
            u.matmul(&h).matmul(&u.adjoint()).max_abs_diff(&h)
        })
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "phase_shift_invariance",
        value: u_inv,
        limit: Some(1e-12),
    });

    let mut alphas = vec![Complex64::new(0.0, 0.0); space.n_modes()];
    alphas[space.slot(0)] = Complex64::new(cfg.alpha_pump, 0.0);
    let psi0 = FockState::coherent(&space, &alphas)?;
    let m0 = moments(&psi0, &[&c, &h]);
    let (c0, var0, e0) = (m0.means[0], m0.covariance[(0, 0)], m0.means[1]);
    let mut drift_mean: f64 = 0.0;
    let mut drift_var: f64 = 0.0;
    let mut drift_energy: f64 = 0.0;
    let mut drift_norm: f64 = 0.0;
    let mut outflow: f64 = 0.0;
    let mut boundary: f64 = 0.0;
    let mut last = psi0.clone();
    let mut prev_t = 0.0;
    let mut times = cfg.gt.clone();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for &gt in &times {
        let dt = (gt - prev_t) / cfg.g.abs().max(f64::MIN_POSITIVE);
        let amplitudes = evolve(&h, &last.amplitudes, dt)?;
        last = FockState { amplitudes };
        prev_t = gt;
        let mm = moments(&last, &[&c, &h]);
        drift_mean = drift_mean.max((mm.means[0] - c0).abs());
        drift_var = drift_var.max((mm.covariance[(0, 0)] - var0).abs());
        drift_energy = drift_energy.max((mm.means[1] - e0).abs() / e0.abs().max(1.0));
        drift_norm = drift_norm.max((last.norm() - 1.0).abs());
        outflow = outflow.max(truncation_outflow(&space, &last.amplitudes));
        boundary = boundary.max(last.boundary_population(&space));
    }
    checks.extend([
        Check {
            name: "drift_mean_C",
            value: drift_mean,
            limit: Some(1e-10),
        },
        Check {
            name: "drift_var_C",
            value: drift_var,
            limit: Some(1e-10),
        },
        Check {
            name: "drift_energy_rel",
            value: drift_energy,
            limit: Some(1e-8),
        },
        Check {
            name: "drift_norm",
            value: drift_norm,
            limit: Some(1e-10),
        },
        Check {
            name: "truncation_outflow",
            value: outflow,
            limit: Some(1e-6),
        },
        Check {
            name: "boundary_population",
            value: boundary,
            limit: None,
        },
    ]);

    let m_meas = cfg.m;
    let evolved = decomposition_check(&space, &last, m_meas)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut residual = evolved.identity_residual();
    for _ in 0..cfg.random_states {
        let psi = FockState::random(&space, &mut rng);
        residual = residual.max(decomposition_check(&space, &psi, m_meas)?.identity_residual());
    }
    checks.extend([
        Check {
            name: "decomposition_residual",
            value: residual,
            limit: Some(1e-12),
        },
        Check {
            name: "final_var_C",
            value: evolved.var_c,
            limit: Some(1e-10),
        },
        Check {
            name: "final_var_BP",
            value: evolved.var_bp,
            limit: None,
        },
        Check {
            name: "final_cov_MP",
            value: evolved.cov_mp,
            limit: None,
        },
    ]);
    Ok(OracleReport {
        dim: space.dim(),
        nnz: h.nnz(),
        checks,
    })
}
