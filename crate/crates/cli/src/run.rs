use std::f64::consts::PI;

use kcomb::config::RunConfig;
use kcomb::fluct::{noise_along_branches, NoiseRow, PointNoise};
use kcomb::fock::run_invariant_suite;
use kcomb::steady::{sweep_pump_with, threshold_with, Branch, SweepOptions, ThresholdOptions};
use kcomb::SystemParams;

use crate::report::{db_or, Report};
use crate::Failure;

fn find_threshold(
    cfg: &RunConfig,
    params: &SystemParams,
) -> Result<kcomb::steady::Threshold, Failure> {
    let opts = ThresholdOptions {
        p_max: cfg.sweep.threshold_p_max,
        ..ThresholdOptions::default()
    };
    Ok(threshold_with(params, &opts)?)
}

pub fn threshold(cfg: &RunConfig) -> Result<(), Failure> {
    let params = cfg.system_params()?;
    let th = find_threshold(cfg, &params)?;
    let mut r = Report::new("threshold", cfg);
    r.push("p_th_w", format!("{:.9e}", th.power));
    r.push("p_th_mw", format!("{:.6}", th.power * 1e3));
    r.push("k_star", th.mode);
    r.push("pump_photons", format!("{:.9e}", th.pump_photons));
    r.push(
        "g_over_kappa",
        format!("{:.9e}", params.g / params.mean_kappa()),
    );
    r.emit(&cfg.output_dir.join("threshold_report.txt"))?;
    Ok(())
}

fn write_branch(
    cfg: &RunConfig,
    params: &SystemParams,
    p_th: f64,
    b: &Branch,
) -> Result<(), Failure> {
    let path = cfg.output_dir.join(format!("branch_{}.csv", b.label));
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["P_W".to_string(), "P_over_Pth".into(), "stable".into()];
    for k in params.modes() {
        header.push(format!("Re_A{k}"));
        header.push(format!("Im_A{k}"));
    }
    w.write_record(&header)?;
    for pt in &b.points {
        let mut row = vec![
            format!("{:.9e}", pt.power),
            format!("{:.9}", pt.power / p_th),
            pt.stable.to_string(),
        ];
        for a in &pt.state.amplitudes {
            row.push(format!("{:.9e}", a.re));
            row.push(format!("{:.9e}", a.im));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn noise_columns(n: &PointNoise, marker: &str) -> Vec<String> {
    let pair = |k: usize| match n.pair.get(k) {
        Some(v) => db_or(*v, marker),
        None => "na".to_string(),
    };
    vec![
        pair(0),
        pair(1),
        db_or(n.var_c, marker),
        db_or(n.var_bp, marker),
        n.cov_mp.map_or(marker.to_string(), |c| format!("{c:.9}")),
    ]
}

fn write_noise(cfg: &RunConfig, p_th: f64, rows: &[NoiseRow]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(cfg.output_dir.join("noise.csv"))?;
    let cols = ["var_n1_dB", "var_n2_dB", "varC_dB", "varBP_dB", "covMP_snu"];
    let mut header = vec!["branch".to_string(), "P_over_Pth".into(), "Omega_Hz".into()];
    header.extend(cols.iter().map(|c| c.to_string()));
    header.extend(cols.iter().map(|c| format!("{c}_det")));
    header.extend(["stable".to_string(), "note".into()]);
    w.write_record(&header)?;
    for r in rows {
        let marker = if r.note.is_some() { "none" } else { "dark" };
        let mut row = vec![
            r.branch.clone(),
            format!("{:.9}", r.power / p_th),
            format!("{:e}", cfg.sweep.omega_hz),
        ];
        row.extend(noise_columns(&r.raw, marker));
        row.extend(noise_columns(&r.detected, marker));
        row.push(r.stable.to_string());
        row.push(r.note.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep(cfg: &RunConfig) -> Result<(), Failure> {
    let params = cfg.system_params()?;
    let th = find_threshold(cfg, &params)?;
    let powers: Vec<f64> = cfg.p_over_pth()?.iter().map(|x| x * th.power).collect();
    let opts = SweepOptions {
        relax_time: cfg.sweep.relax_time,
        ..SweepOptions::default()
    };
    let branches = sweep_pump_with(&params, &powers, None, &opts)?;
    let omega = 2.0 * PI * cfg.sweep.omega_hz;
    let rows = noise_along_branches(&params, &branches, omega, cfg.m_meas()?)?;
    for b in &branches {
        write_branch(cfg, &params, th.power, b)?;
    }
    write_noise(cfg, th.power, &rows)?;

    let mut r = Report::new("sweep", cfg);
    r.push("p_th_w", format!("{:.9e}", th.power));
    r.push("k_star", th.mode);
    r.push("m_meas", cfg.m_meas()?);
    r.push(
        "branches",
        branches
            .iter()
            .map(|b| b.label.as_str())
            .collect::<Vec<_>>()
            .join(","),
    );
    r.push("points", rows.len());
    r.push("stable_points", rows.iter().filter(|x| x.stable).count());
    r.push(
        "bright_points",
        rows.iter()
            .filter(|x| x.raw.pair.first().is_some_and(Option::is_some))
            .count(),
    );
    r.push(
        "annotated_points",
        rows.iter().filter(|x| x.note.is_some()).count(),
    );
    r.emit(&cfg.output_dir.join("sweep_report.txt"))?;
    Ok(())
}

pub fn oracle(cfg: &RunConfig) -> Result<(), Failure> {
    let rep = run_invariant_suite(&cfg.oracle_config()?)?;
    let mut r = Report::new("oracle", cfg);
    r.push("dim", rep.dim);
    r.push("nnz", rep.nnz);
    for c in &rep.checks {
        r.push(c.name, format!("{:.3e}", c.value));
        if let Some(l) = c.limit {
            r.push(format!("{}.limit", c.name), format!("{l:.1e}"));
            r.push(format!("{}.pass", c.name), c.passed());
        }
    }
    r.push("passed", rep.passed());
    r.emit(&cfg.output_dir.join("oracle_report.txt"))?;
    if rep.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = rep
            .checks
            .iter()
            .filter(|c| !c.passed())
            .map(|c| c.name)
            .collect();
        Err(Failure {
            code: 3,
            message: format!("invariant residuals above threshold: {}", failed.join(", ")),
        })
    }
}
