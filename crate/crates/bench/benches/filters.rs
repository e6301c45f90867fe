use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fhsf_bench::noisy_pair;
use fhsf_core::color::hsl_plane;
use fhsf_core::filters::{filter_image, FilterKind, FilterParams};
use fhsf_core::with_workers;

fn filters(c: &mut Criterion) {
    let mut group = c.benchmark_group("filter_512x512_p10");
    group.sample_size(20);
    let (_, noisy) = noisy_pair("astronaut.ppm", 0.10);
    for kind in FilterKind::ALL {
        group.bench_with_input(BenchmarkId::from_parameter(kind), &noisy, |b, img| {
            b.iter(|| with_workers(1, || filter_image(img, kind, &FilterParams::None).unwrap()))
        });
    }
    group.finish();
}

fn noise_levels(c: &mut Criterion) {
    let mut group = c.benchmark_group("fhsf_s_by_noise");
    group.sample_size(20);
    for p in [0.05, 0.10, 0.15, 0.20] {
        let (_, noisy) = noisy_pair("chelsea.ppm", p);
        group.bench_with_input(BenchmarkId::from_parameter(p), &noisy, |b, img| {
            b.iter(|| filter_image(img, FilterKind::FhsfS, &FilterParams::None).unwrap())
        });
    }
    group.finish();
}

fn conversion(c: &mut Criterion) {
    let (_, noisy) = noisy_pair("astronaut.ppm", 0.10);
    c.bench_function("hsl_plane_512x512", |b| b.iter(|| hsl_plane(&noisy)));
}

criterion_group!(benches, filters, noise_levels, conversion);
criterion_main!(benches);
