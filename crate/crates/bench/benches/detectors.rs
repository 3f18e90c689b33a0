use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use mimdetect_bench::prior_ratio_model;
use mimdetect_core::{
    chernoff_exponent, error_rates_monte_carlo, error_rates_quadrature, magnify, sample_mixture,
    solve_magnifying_ratio, DetectorKind, ImportanceCoeff,
};

fn magnifier(c: &mut Criterion) {
    let w = ImportanceCoeff::new(10.0).unwrap();
    c.bench_function("magnify", |b| b.iter(|| magnify(black_box(0.01), w)));
    c.bench_function("solve_magnifying_ratio", |b| {
        b.iter(|| solve_magnifying_ratio(black_box(0.01), w, 1e-12))
    });
}

fn decisions(c: &mut Criterion) {
    let model = prior_ratio_model(3.0);
    let xs: Vec<f64> = (0..1024).map(|i| -0.5 + i as f64 / 1024.0).collect();
    for kind in [DetectorKind::Bayes, DetectorKind::Mim] {
        let decider = model.decider(kind).unwrap();
        c.bench_function(&format!("decide_1024/{}", kind.as_str()), |b| {
            b.iter(|| {
                xs.iter()
                    .filter(|&&x| decider.verdict(black_box(x)) == mimdetect_core::Event::A)
                    .count()
            })
        });
    }
}

fn error_rates(c: &mut Criterion) {
    let model = prior_ratio_model(3.0);
    let priors = model.priors();
    let (d_a, d_b) = (*model.density_a(), *model.density_b());
    let mim = model.decider(DetectorKind::Mim).unwrap();
    c.bench_function("error_rates_quadrature/mim", |b| {
        b.iter(|| error_rates_quadrature(|x| mim.verdict(x), priors, &d_a, &d_b, 1e-10))
    });
    c.bench_function("sample_mixture/100k", |b| {
        b.iter(|| sample_mixture(priors, &d_a, &d_b, 100_000, black_box(7)))
    });
    c.bench_function("error_rates_monte_carlo/100k", |b| {
        b.iter_batched(
            || sample_mixture(priors, &d_a, &d_b, 100_000, 7).unwrap(),
            |samples| error_rates_monte_carlo(|x| mim.verdict(x), &samples, priors),
            BatchSize::LargeInput,
        )
    });
    c.bench_function("chernoff_exponent", |b| b.iter(|| chernoff_exponent(&d_a, &d_b, 1e-8)));
}

criterion_group!(benches, magnifier, decisions, error_rates);
criterion_main!(benches);
