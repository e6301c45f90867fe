use criterion::{criterion_group, criterion_main, Criterion};
use fhsf_bench::noisy_pair;
use fhsf_core::metrics::{mae, mse, ncd, pcd, Scielab};

fn metrics(c: &mut Criterion) {
    let (img, noisy) = noisy_pair("chelsea.ppm", 0.10);
    let s = Scielab::default();
    let reference = s.reference(&img);
    c.bench_function("mae", |b| b.iter(|| mae(&img, &noisy).unwrap()));
    c.bench_function("mse", |b| b.iter(|| mse(&img, &noisy).unwrap()));
    c.bench_function("ncd", |b| b.iter(|| ncd(&img, &noisy).unwrap()));
    let mut group = c.benchmark_group("pcd");
    group.sample_size(10);
    group.bench_function("full", |b| b.iter(|| pcd(&img, &noisy, &s).unwrap()));
    group.bench_function("cached_reference", |b| {
        b.iter(|| reference.pcd(&noisy).unwrap())
    });
    group.finish();
}

criterion_group!(benches, metrics);
criterion_main!(benches);
