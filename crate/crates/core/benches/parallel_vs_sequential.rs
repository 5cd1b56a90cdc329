use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use survcobra::experiment::{evaluate, ExperimentConfig};
use survcobra::tree::build_machine_pool_with;
use survcobra::{
    cv_tune, split, CobraParams, NormKind, Parallelism, SplitSpec, SurvivalDataset, Variant,
};

const MODES: [(&str, Parallelism); 2] = [
    ("sequential", Parallelism::Sequential),
    ("parallel", Parallelism::Parallel),
];

fn gbsg2() -> (ExperimentConfig, SurvivalDataset) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/2_gbsg2.json");
    let cfg = ExperimentConfig::load(&path).expect("config");
    let (ds, _) = cfg.load_dataset().expect("dataset");
    (cfg, ds)
}

fn pool(c: &mut Criterion) {
    let (_, ds) = gbsg2();
    let parts = split(&ds, &SplitSpec::default()).unwrap();
    let mut group = c.benchmark_group("machine_pool");
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| build_machine_pool_with(black_box(&parts.d_k), 1, mode).unwrap())
        });
    }
    group.finish();
}

fn tuning(c: &mut Criterion) {
    let (cfg, ds) = gbsg2();
    let mut group = c.benchmark_group("cv_tune");
    group.sample_size(10);
    for (name, mode) in MODES {
        let mut tc = cfg.tune_config(Variant::Weighted);
        tc.parallelism = mode;
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| cv_tune(black_box(&ds), &tc).unwrap())
        });
    }
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let (mut cfg, ds) = gbsg2();
    cfg.repetitions = 4;
    let methods = [CobraParams {
        epsilon: 0.3,
        alpha: 0.5,
        norm: NormKind::Frobenius,
        variant: Variant::Weighted,
    }];
    let mut group = c.benchmark_group("evaluate");
    group.sample_size(10);
    for (name, mode) in MODES {
        cfg.parallelism = mode;
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| evaluate(black_box(&ds), &cfg, &methods).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, pool, tuning, evaluation);
criterion_main!(benches);
