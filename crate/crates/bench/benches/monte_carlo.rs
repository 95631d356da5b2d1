use adomian_core::exact::ConstantReading;
use adomian_core::mc::{
    estimate_exp_quadratic_functional, kl_product_formula, sample_paths,
    verify_exponential_equation_sweep, ExpEquationConfig,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    g.bench_function("sample_paths/1000x500", |b| {
        b.iter(|| sample_paths(0.5, 1000, 500, 1).unwrap())
    });
    g.bench_function("exp_functional/10000x500", |b| {
        b.iter(|| estimate_exp_quadratic_functional(0.5, 10_000, 500, 1).unwrap())
    });
    let cfg = ExpEquationConfig::example1(0.5, 2000, 1);
    g.bench_function("exp_equation/2000x[250,500]", |b| {
        b.iter(|| {
            verify_exponential_equation_sweep(&cfg, &[250, 500], &ConstantReading::ALL).unwrap()
        })
    });
    g.finish();
    c.bench_function("kl_product/10000", |b| {
        b.iter(|| kl_product_formula(0.5, 10_000).unwrap())
    });
}

criterion_group!(benches, monte_carlo);
criterion_main!(benches);
