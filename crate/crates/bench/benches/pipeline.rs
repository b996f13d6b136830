use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use deeppink::net::{adam_step, AdamState, Batch, Network, PinkNetwork, TrainConfig};
use deeppink::simgen::{gen_design, SimConfig};
use deeppink::{sample_knockoffs, threshold, KnockoffModel, Rule, Seed};
use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

fn normal_matrix(rows: usize, cols: usize, seed: Seed) -> DMatrix<f64> {
    let mut rng = seed.rng();
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

fn batch(p: usize, rows: usize) -> Batch {
    let y = DVector::from_fn(rows, |i, _| i as f64 - 4.5);
    Batch::new(normal_matrix(rows, p, Seed(1)), normal_matrix(rows, p, Seed(2)), y).unwrap()
}

fn gradients(c: &mut Criterion) {
    let mut group = c.benchmark_group("loss_and_gradient");
    for p in [50, 200] {
        let net = PinkNetwork::init(p, Seed(3));
        let b = batch(p, 10);
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |bench, _| {
            bench.iter(|| black_box(net.loss_and_gradient(&b, 0.01)))
        });
    }
    group.finish();
}

fn adam(c: &mut Criterion) {
    let mut group = c.benchmark_group("adam_step");
    for p in [50, 200] {
        let mut net = PinkNetwork::init(p, Seed(4));
        let (_, grad) = net.loss_and_gradient(&batch(p, 10), 0.01);
        let mut state = AdamState::new(&net);
        let cfg = TrainConfig::default();
        let mut t = 0;
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |bench, _| {
            bench.iter(|| {
                t += 1;
                adam_step(&mut net, &grad, &mut state, t, &cfg)
            })
        });
    }
    group.finish();
}

fn knockoffs(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_knockoffs");
    group.sample_size(20);
    for p in [50, 200] {
        let (x, sigma) = gen_design(&SimConfig::linear(p), Seed(5)).unwrap();
        let model = KnockoffModel::equicorrelated(&sigma).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |bench, _| {
            bench.iter(|| black_box(sample_knockoffs(&x, &model, Seed(6)).unwrap()))
        });
    }
    group.finish();

    let (_, sigma) = gen_design(&SimConfig::linear(200), Seed(7)).unwrap();
    c.bench_function("equicorrelated_model/200", |bench| {
        bench.iter(|| black_box(KnockoffModel::equicorrelated(&sigma).unwrap()))
    });
}

fn thresholds(c: &mut Criterion) {
    let mut group = c.benchmark_group("threshold");
    for p in [200, 3000] {
        let w: Vec<f64> = normal_matrix(p, 1, Seed(8)).iter().map(|v| v + 0.5).collect();
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |bench, _| {
            bench.iter(|| black_box(threshold(&w, 0.2, Rule::KnockoffPlus)))
        });
    }
    group.finish();
}

criterion_group!(benches, gradients, adam, knockoffs, thresholds);
criterion_main!(benches);
