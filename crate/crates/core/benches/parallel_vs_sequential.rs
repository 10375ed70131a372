//! Rayon pool versus a single worker on the data-parallel hot paths.
//! Build with `--no-default-features` to time the purely sequential code.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kcomb::dsp::{
    segment_spectra, synthesize_traces, white_target, Acquisition, SynthSpec, Window,
};
use kcomb::fluct::noise_along_branches;
use kcomb::fock::{build_fwm_hamiltonian, FockSpace};
use kcomb::par::{is_parallel, with_threads};
use kcomb::steady::{sweep_pump, threshold};
use kcomb::SystemParams;
use nalgebra::DMatrix;

fn modes() -> [(&'static str, usize); 2] {
    [("sequential", 1), ("parallel", 0)]
}

fn fock(c: &mut Criterion) {
    let space = FockSpace::uniform(2, 4).unwrap();
    let mut group = c.benchmark_group("fock_hamiltonian");
    for (name, threads) in modes() {
        group.bench_function(BenchmarkId::new(name, space.dim()), |b| {
            b.iter(|| with_threads(threads, || build_fwm_hamiltonian(black_box(&space), 1.0)))
        });
    }
    group.finish();
}

fn spectra(c: &mut Criterion) {
    let spec = SynthSpec {
        labels: ["+1", "-1", "+2", "-2"].map(String::from).to_vec(),
        dc_levels: vec![1.0; 4],
        acquisition: Acquisition {
            sample_rate: 5e9,
            segment_length: 16_384,
            n_segments: 32,
        },
        delays: vec![0.0; 4],
        seed: 1,
    };
    let target = white_target(DMatrix::identity(4, 4));
    let traces = synthesize_traces(&target, &spec).unwrap();
    let mut group = c.benchmark_group("dsp");
    group.sample_size(20);
    for (name, threads) in modes() {
        group.bench_function(BenchmarkId::new("synthesize", name), |b| {
            b.iter(|| {
                with_threads(threads, || {
                    synthesize_traces(&target, black_box(&spec)).unwrap()
                })
            })
        });
        group.bench_function(BenchmarkId::new("segment_spectra", name), |b| {
            b.iter(|| {
                with_threads(threads, || {
                    segment_spectra(black_box(&traces), Window::Hann, 50e6).unwrap()
                })
            })
        });
    }
    group.finish();
}

fn noise(c: &mut Criterion) {
    let base = SystemParams::default();
    let kappa = base.kappa_total[0];
    let mut p = SystemParams::flat(3, kappa, base.kappa_ext[0], 0.0, 2.0 * kappa, base.g, 0.0);
    p.photon_energy = base.photon_energy;
    let th = threshold(&p).unwrap().power;
    let powers: Vec<f64> = (0..24).map(|i| th * (1.05 + 0.02 * i as f64)).collect();
    let branches = sweep_pump(&p, &powers, None).unwrap();
    let omega = 2.0 * std::f64::consts::PI * 4e6;
    let mut group = c.benchmark_group("noise_sweep");
    for (name, threads) in modes() {
        group.bench_function(name, |b| {
            b.iter(|| {
                with_threads(threads, || {
                    noise_along_branches(&p, black_box(&branches), omega, 3).unwrap()
                })
            })
        });
    }
    group.finish();
}

fn report(_: &mut Criterion) {
    println!("parallel feature: {}", is_parallel());
}

criterion_group!(benches, report, fock, spectra, noise);
criterion_main!(benches);
