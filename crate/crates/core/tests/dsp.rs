use std::f64::consts::PI;

use kcomb::dsp::{
    expected_noise, process, shot_noise_calibration, synthesize_traces, two_pair_target,
    white_target, Acquisition, CalibrationCurve, ProcessOptions, SynthSpec, TraceSet,
    DEFAULT_LABELS,
};
use nalgebra::DMatrix;
use num_complex::Complex64;

const FS: f64 = 1e8;

fn acq() -> Acquisition {
    Acquisition {
        sample_rate: FS,
        segment_length: 4096,
        n_segments: 48,
    }
}

fn spec(dc: &[f64], delays: [f64; 4], seed: u64) -> SynthSpec {
    SynthSpec {
        labels: DEFAULT_LABELS.iter().map(|s| s.to_string()).collect(),
        dc_levels: dc.to_vec(),
        acquisition: acq(),
        delays: delays.to_vec(),
        seed,
    }
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn opts() -> ProcessOptions {
    ProcessOptions {
        omega_hz: 4e6,
        half_width: 20,
        lowpass_hz: Some(20e6),
        max_freq_hz: 30e6,
        ..Default::default()
    }
}

/// Shot-noise-limited runs (variance per sample equal to the DC level).
fn calibration(levels: &[f64], seed: u64) -> Vec<CalibrationCurve> {
    let runs: Vec<TraceSet> = levels
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let t = white_target(DMatrix::identity(4, 4) * l);
            synthesize_traces(&t, &spec(&[l; 4], [0.0; 4], seed + i as u64)).unwrap()
        })
        .collect();
    shot_noise_calibration(&runs, &opts()).unwrap()
}

#[test]
fn white_noise_variance_and_parseval() {
    let t = white_target(DMatrix::identity(4, 4) * 0.7);
    let traces = synthesize_traces(&t, &spec(&[2.0; 4], [0.0; 4], 3)).unwrap();
    for (c, ch) in traces.channels.iter().enumerate() {
        let mean = ch.iter().map(|&v| v as f64).sum::<f64>() / ch.len() as f64;
        let var = ch.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / ch.len() as f64;
        assert!((mean - 2.0).abs() < 1e-4, "channel {c}");
        assert!((var / 0.7 - 1.0).abs() < 0.02, "channel {c}: {var}");
    }
    let est = kcomb::dsp::segment_spectra(&traces, kcomb::dsp::Window::Hann, 3e7).unwrap();
    assert!(est.parseval_error < 1e-6);
}

#[test]
fn shot_noise_calibration_recovers_unit_slope() {
    let cal = calibration(&[0.25, 0.5, 0.75, 1.0], 100);
    assert_eq!(cal.len(), 4);
    for c in &cal {
        assert!((c.slope - 1.0).abs() < 0.05, "{}: {}", c.detector, c.slope);
    }
}

#[test]
fn uncorrelated_shot_noise_reads_zero_db() {
    let cal = calibration(&[0.25, 0.5, 0.75, 1.0], 100);
    let dc = [1.0, 0.8, 0.6, 0.9];
    let target = white_target(DMatrix::from_diagonal(
        &nalgebra::DVector::from_column_slice(&dc),
    ));
    let traces = synthesize_traces(&target, &spec(&dc, [0.0; 4], 9)).unwrap();
    let r = process(&traces, &cal, &opts()).unwrap();
    for m in r.delta.iter().chain([&r.carlos]) {
        assert!(
            db(m.report.normalized()).abs() < 0.3,
            "{}: {}",
            m.report.label,
            m.report.db()
        );
    }
}

#[test]
fn headline_round_trip() {
    let cal = calibration(&[0.25, 0.5, 0.75, 1.0], 200);
    let target = two_pair_target([-2.5, 0.0], -2.0, 1.0, (1.0, 2.0)).unwrap();
    let dc = [1.0; 4];
    let (e1, e2, ec) = expected_noise(&target, &dc, 1.0, (1.0, 2.0));
    assert!((db(e1) + 2.5).abs() < 1e-9 && db(e2).abs() < 1e-9 && (db(ec) + 2.0).abs() < 1e-9);
    let traces = synthesize_traces(&white_target(target), &spec(&dc, [0.0; 4], 5)).unwrap();
    let r = process(&traces, &cal, &opts()).unwrap();
    for (m, want) in r.delta.iter().chain([&r.carlos]).zip([-2.5, 0.0, -2.0]) {
        assert!(
            (m.report.db() - want).abs() < 0.3,
            "{}: {} vs {want}",
            m.report.label,
            m.report.db()
        );
    }
}

#[test]
fn pure_delay_sets_balancing_phase() {
    let cal = calibration(&[0.25, 0.5, 0.75, 1.0], 300);
    let mut s = DMatrix::identity(4, 4);
    s[(0, 1)] = 1.0;
    s[(1, 0)] = 1.0;
    let tau = 10.0;
    let traces =
        synthesize_traces(&white_target(s), &spec(&[1.0; 4], [0.0, tau, 0.0, 0.0], 17)).unwrap();
    let bin = FS / acq().segment_length as f64;
    let f = 80.0 * bin;
    let o = ProcessOptions {
        omega_hz: f,
        half_width: 0,
        lowpass_hz: None,
        ..opts()
    };
    let r = process(&traces, &cal, &o).unwrap();
    let want = 2.0 * PI * f * tau / FS;
    let got = r.alpha[0].alpha.arg();
    assert!((got - want).abs() < 1e-3, "{got} vs {want}");
    assert!(r.alpha[0].coherence > 0.999);
}

fn scaled(t: &TraceSet, g: f32) -> TraceSet {
    let ch = t
        .channels
        .iter()
        .map(|c| c.iter().map(|v| v * g).collect())
        .collect();
    TraceSet::new(t.labels.clone(), ch, t.acquisition).unwrap()
}

#[test]
fn normalized_noise_is_gain_invariant() {
    let levels = [0.25, 0.5, 0.75, 1.0];
    let runs: Vec<TraceSet> = levels
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let t = white_target(DMatrix::identity(4, 4) * l);
            synthesize_traces(&t, &spec(&[l; 4], [0.0; 4], 400 + i as u64)).unwrap()
        })
        .collect();
    let target = two_pair_target([-2.5, 0.0], -2.0, 1.0, (1.0, 2.0)).unwrap();
    let traces = synthesize_traces(&white_target(target), &spec(&[1.0; 4], [0.0; 4], 6)).unwrap();
    let base = process(
        &traces,
        &shot_noise_calibration(&runs, &opts()).unwrap(),
        &opts(),
    )
    .unwrap();
    let gain = 3.5;
    let runs_g: Vec<TraceSet> = runs.iter().map(|t| scaled(t, gain)).collect();
    let cal_g = shot_noise_calibration(&runs_g, &opts()).unwrap();
    let r = process(&scaled(&traces, gain), &cal_g, &opts()).unwrap();
    for (a, b) in base
        .delta
        .iter()
        .chain([&base.carlos])
        .zip(r.delta.iter().chain([&r.carlos]))
    {
        assert!((a.report.db() - b.report.db()).abs() < 1e-3);
    }
}

#[test]
fn processing_is_deterministic() {
    let cal = calibration(&[0.25, 0.5, 0.75, 1.0], 500);
    let target = two_pair_target([-1.0, -0.5], -1.5, 1.0, (1.0, 2.0)).unwrap();
    let sp = spec(&[1.0; 4], [0.0; 4], 8);
    let a = synthesize_traces(&white_target(target.clone()), &sp).unwrap();
    let b = synthesize_traces(&white_target(target), &sp).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        process(&a, &cal, &opts()).unwrap(),
        process(&b, &cal, &opts()).unwrap()
    );
}

#[test]
fn trace_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let small = Acquisition {
        sample_rate: 1e6,
        segment_length: 256,
        n_segments: 3,
    };
    let sp = SynthSpec {
        acquisition: small,
        ..spec(&[1.0, 2.0, 3.0, 4.0], [0.0; 4], 1)
    };
    let white = |_f: f64| DMatrix::from_diagonal_element(4, 4, Complex64::new(0.3, 0.0));
    let t = synthesize_traces(&white, &sp).unwrap();
    let bin = dir.path().join("t.kct");
    t.write(&bin).unwrap();
    assert_eq!(TraceSet::read(&bin).unwrap(), t);
    let csv = dir.path().join("t.csv");
    t.write_csv(&csv).unwrap();
    let back = TraceSet::read_csv(&csv, 1e6, 256).unwrap();
    assert_eq!(back.channels, t.channels);
    assert_eq!(back.labels, t.labels);
}
