use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use splitstep::par::Execution;
use splitstep::problems::{
    build_double_porosity, default_profile, manufactured_problem, profile_vector, DiffusionSpec,
};
use splitstep::random::{random_dims, random_spd, random_vector, rng};
use splitstep::verify::{compare_schemes_with, convergence_study_with, stability_sweep, StabilitySweep};
use splitstep::{SchemeConfig, SchemeKind};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

const TAUS: [f64; 4] = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];

fn convergence(c: &mut Criterion) {
    let mp = manufactured_problem(&DiffusionSpec::multicomponent_default(31), &default_profile(2)).unwrap();
    let cfg = SchemeConfig::new(SchemeKind::FactorizedAtm, 0.5, 1.0, 1);
    let mut group = c.benchmark_group("convergence_study");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| convergence_study_with(black_box(&mp.problem), &cfg, &TAUS, exec).unwrap())
        });
    }
    group.finish();
}

fn compare(c: &mut Criterion) {
    let mp = manufactured_problem(&DiffusionSpec::multicomponent_default(31), &default_profile(2)).unwrap();
    let cfg = SchemeConfig::new(SchemeKind::Weighted, 0.5, 1.0, 1);
    let mut group = c.benchmark_group("compare_schemes");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| compare_schemes_with(black_box(&mp.problem), &cfg, &TAUS, exec).unwrap())
        });
    }
    group.finish();
}

fn stability(c: &mut Criterion) {
    let spec = DiffusionSpec::double_porosity_default(15);
    let p = build_double_porosity(&spec)
        .unwrap()
        .with_v0(profile_vector(15, &default_profile(2), 0.0).unwrap())
        .unwrap();
    let sweep = StabilitySweep {
        kinds: vec![SchemeKind::Weighted, SchemeKind::ThreeLevelFactorized],
        sigmas: vec![0.5, 1.0],
        taus: vec![1e-2, 1e-1],
        n_steps: 50,
        epsilon: 1.0,
    };
    let mut group = c.benchmark_group("stability_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| stability_sweep(black_box(&p), &sweep, exec).unwrap())
        });
    }
    group.finish();
}

fn apply(c: &mut Criterion) {
    let mut r = rng(1);
    let mut group = c.benchmark_group("block_apply");
    for p in [2usize, 8] {
        let dims = random_dims(&mut r, (p, p), (200, 200));
        let m = random_spd(&mut r, &dims, 1.0, 0.5);
        let x = random_vector(&mut r, &dims);
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, p), &x, |b, x| {
                b.iter(|| m.apply_with(exec, x).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, convergence, compare, stability, apply);
criterion_main!(benches);
