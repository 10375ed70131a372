use std::f64::consts::PI;
use std::path::Path;

use kcomb::config::{RunConfig, SynthSource};
use kcomb::dsp::{
    expected_noise, process, shot_noise_calibration, synthesize_traces, target_from_simulation,
    two_pair_target, white_target, CalibrationCurve, SynthSpec, TraceSet, DEFAULT_LABELS,
};
use kcomb::fluct::{carlos_noise, intensity_diff_noise, output_spectrum};
use kcomb::steady::seed_comb;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::report::Report;
use crate::{load, DspCommand, Failure, Global};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrationFile {
    detector: Vec<DetectorEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectorEntry {
    label: String,
    slope: f64,
    residual_rms: f64,
    points: Vec<[f64; 2]>,
}

pub fn run(cmd: &DspCommand, g: &Global) -> Result<(), Failure> {
    match cmd {
        DspCommand::Synth { config, csv } => synth(&load(config, g)?, *csv),
        DspCommand::Calibrate { config, runs } => calibrate(&load(config, g)?, runs),
        DspCommand::Process {
            config,
            traces,
            calibration,
        } => process_cmd(&load(config, g)?, traces, calibration),
    }
}

fn labels() -> Vec<String> {
    DEFAULT_LABELS.iter().map(|s| s.to_string()).collect()
}

fn db(x: f64) -> String {
    format!("{:.6}", 10.0 * x.log10())
}

/// Reads the binary container, or a CSV export laid out per `[dsp]`.
fn read_traces(cfg: &RunConfig, path: &Path) -> Result<TraceSet, Failure> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    Ok(if is_csv {
        TraceSet::read_csv(path, cfg.dsp.sample_rate, cfg.dsp.segment_length)?
    } else {
        TraceSet::read(path)?
    })
}

fn synth(cfg: &RunConfig, csv: bool) -> Result<(), Failure> {
    let d = &cfg.dsp;
    let acq = cfg.acquisition()?;
    let opts = cfg.process_options()?;
    let mut r = Report::new("dsp synth", cfg);
    let (target, dc) = match d.source {
        SynthSource::Target => {
            r.push("source", "target");
            (
                two_pair_target(d.delta_db, d.carlos_db, d.shot_level, opts.weights)?,
                vec![1.0; 4],
            )
        }
        SynthSource::Simulation => {
            r.push("source", "simulation");
            let params = cfg.system_params()?;
            let state = seed_comb(&params, params.pump_power)?;
            let p = params.with_pump(params.pump_power);
            let s = output_spectrum(&p, &state, 2.0 * PI * cfg.sweep.omega_hz)?;
            let (eta, e) = (p.eta(), p.electronic_noise_rel);
            for k in 1..=2 {
                let v = intensity_diff_noise(&p, &state, &s, k)?.detected(eta, e)?;
                r.push(format!("simulated_delta{k}_db"), db(v.normalized()));
            }
            let c = carlos_noise(&p, &state, &s, 2)?.detected(eta, e)?;
            r.push("simulated_carlos_db", db(c.normalized()));
            target_from_simulation(&p, &state, &s, eta, d.shot_level)?
        }
    };
    let (e1, e2, ec) = expected_noise(&target, &dc, d.shot_level, opts.weights);
    r.push("expected_delta1_db", db(e1));
    r.push("expected_delta2_db", db(e2));
    r.push("expected_carlos_db", db(ec));

    let spec = SynthSpec {
        labels: labels(),
        dc_levels: dc,
        acquisition: acq,
        delays: d.delays.to_vec(),
        seed: d.seed,
    };
    let traces = synthesize_traces(&white_target(target), &spec)?;
    let out = &cfg.output_dir;
    traces.write(&out.join("traces.kct"))?;
    r.push("traces", out.join("traces.kct").display());
    if csv {
        traces.write_csv(&out.join("traces.csv"))?;
        r.push("traces_csv", out.join("traces.csv").display());
    }
    drop(traces);

    for (i, &level) in d.calibration_levels.iter().enumerate() {
        let shot = DMatrix::from_diagonal_element(4, 4, d.shot_level * level);
        let spec = SynthSpec {
            labels: labels(),
            dc_levels: vec![level; 4],
            acquisition: acq,
            delays: vec![0.0; 4],
            seed: d.seed.wrapping_add(1 + i as u64),
        };
        let run = synthesize_traces(&white_target(shot), &spec)?;
        let path = out.join(format!("cal_{i}.kct"));
        run.write(&path)?;
        r.push(format!("calibration_run{i}"), path.display());
    }
    r.emit(&out.join("synth_report.txt"))?;
    Ok(())
}

fn calibrate(cfg: &RunConfig, runs: &[std::path::PathBuf]) -> Result<(), Failure> {
    let opts = cfg.process_options()?;
    let sets = runs
        .iter()
        .map(|p| read_traces(cfg, p))
        .collect::<Result<Vec<_>, _>>()?;
    let curves = shot_noise_calibration(&sets, &opts)?;
    let file = CalibrationFile {
        detector: curves
            .iter()
            .map(|c| DetectorEntry {
                label: c.detector.clone(),
                slope: c.slope,
                residual_rms: c.residual_rms,
                points: c.points.iter().map(|&(x, y)| [x, y]).collect(),
            })
            .collect(),
    };
    let text = toml::to_string(&file).map_err(|e| Failure {
        code: 1,
        message: e.to_string(),
    })?;
    let path = cfg.output_dir.join("calibration.toml");
    std::fs::write(&path, text)?;
    let mut r = Report::new("dsp calibrate", cfg);
    r.push("levels", sets.len());
    for c in &curves {
        r.push(format!("slope.{}", c.detector), format!("{:.9e}", c.slope));
        r.push(
            format!("residual_rms.{}", c.detector),
            format!("{:.3e}", c.residual_rms),
        );
    }
    r.push("calibration", path.display());
    r.emit(&cfg.output_dir.join("calibrate_report.txt"))?;
    Ok(())
}

fn read_calibration(path: &Path) -> Result<Vec<CalibrationCurve>, Failure> {
    let text = std::fs::read_to_string(path)?;
    let file: CalibrationFile = toml::from_str(&text).map_err(|e| Failure {
        code: 1,
        message: format!("{}: {}", path.display(), e.message()),
    })?;
    Ok(file
        .detector
        .into_iter()
        .map(|d| CalibrationCurve {
            detector: d.label,
            slope: d.slope,
            residual_rms: d.residual_rms,
            points: d.points.into_iter().map(|[x, y]| (x, y)).collect(),
        })
        .collect())
}

fn process_cmd(cfg: &RunConfig, traces: &Path, calibration: &Path) -> Result<(), Failure> {
    let opts = cfg.process_options()?;
    let cal = read_calibration(calibration)?;
    let t = read_traces(cfg, traces)?;
    let rep = process(&t, &cal, &opts)?;

    let mut r = Report::new("dsp process", cfg);
    r.push("omega_hz", format!("{:e}", opts.omega_hz));
    for (i, a) in rep.alpha.iter().enumerate() {
        let k = i + 1;
        r.push(format!("alpha{k}_abs"), format!("{:.9}", a.alpha.norm()));
        r.push(format!("alpha{k}_arg"), format!("{:.9}", a.alpha.arg()));
        r.push(format!("alpha{k}_coherence"), format!("{:.6}", a.coherence));
        r.push(format!("alpha{k}_weak_coherence"), a.weak_coherence);
    }
    r.push("beta_abs", format!("{:.9}", rep.beta.beta.norm()));
    r.push("beta_arg", format!("{:.9}", rep.beta.beta.arg()));
    r.push("beta_degenerate", rep.beta.degenerate);
    for (name, m) in [
        ("delta1", &rep.delta[0]),
        ("delta2", &rep.delta[1]),
        ("carlos", &rep.carlos),
    ] {
        r.push(format!("{name}_db"), format!("{:.6}", m.report.db()));
        r.push(format!("{name}_db_err"), format!("{:.6}", m.db_error()));
        r.push(format!("{name}_snl"), format!("{:.9e}", m.report.snl));
    }
    r.push(
        "group_delay",
        rep.group_delay
            .map_or("none".to_string(), |d| d.to_string()),
    );
    r.push("parseval_error", format!("{:.3e}", rep.parseval_error));

    let mut w = csv::Writer::from_path(cfg.output_dir.join("variance_vs_frequency.csv"))?;
    w.write_record(["freq_Hz", "delta1_dB", "delta2_dB", "carlos_dB"])?;
    for row in &rep.rows {
        w.write_record([
            format!("{:e}", row.freq_hz),
            db(row.delta[0]),
            db(row.delta[1]),
            db(row.carlos),
        ])?;
    }
    w.flush()?;
    r.emit(&cfg.output_dir.join("process_report.txt"))?;
    Ok(())
}
