use bochner_bench::torus_fixture;
use bochner_core::bernstein::BernsteinFunction;
use bochner_core::optimize::log_space;
use bochner_core::spectral::{check_super_poincare, fourier_rate_function, random_functions, Phi, SampleSet};
use bochner_core::transforms::transfer_beta;
use criterion::{criterion_group, criterion_main, Criterion};

fn super_poincare(c: &mut Criterion) {
    let (model, samples) = torus_fixture(1, 64, 1000);
    let g: BernsteinFunction = "power:0.5".parse().unwrap();
    let base = fourier_rate_function(&model, &Phi::identity()).unwrap();
    let beta = transfer_beta(&base, &g).unwrap().into_rate();
    let phi = Phi::bernstein(&g);
    let rs = log_space(1e-4, 1e2, 20);
    c.bench_function("check_super_poincare/torus1x64/1000", |b| {
        b.iter(|| check_super_poincare(&model, &phi, &beta, &rs, &samples).unwrap())
    });
}

fn sample_set(c: &mut Criterion) {
    let (model, _) = torus_fixture(2, 16, 1);
    c.bench_function("sample_set/torus2x16/1000", |b| {
        b.iter(|| SampleSet::new(&model, random_functions(&model, 1000, 1).unwrap()).unwrap())
    });
}

criterion_group!(benches, super_poincare, sample_set);
criterion_main!(benches);
