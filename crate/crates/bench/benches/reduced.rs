use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fibering::{
    estimate_cstar, estimate_level, make_diag, make_plap1d, make_sp_surrogate, minimize_reduced, trace_curve, Branch,
    ClassTag, OptimizerConfig, TraceConfig,
};

fn scale_and_value(c: &mut Criterion) {
    let mut group = c.benchmark_group("fiber");
    for m in [31usize, 199] {
        let triple = make_plap1d(2.0, 2.0, 4.0, m).unwrap();
        let u: Vec<f64> = (0..m).map(|i| ((i + 1) as f64 * 0.37).sin()).collect();
        group.bench_with_input(BenchmarkId::new("solve_scale", m), &u, |b, u| {
            b.iter(|| triple.solve_scale(black_box(1.0), u, Branch::Minus).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("eval_lambda", m), &u, |b, u| {
            b.iter(|| triple.eval_lambda(black_box(1.0), u, Branch::Minus).unwrap())
        });
    }
    let cc = make_diag(ClassTag::concave_convex(2.0, 3.0, 4.0).unwrap(), &[1.0, 2.0], &[1.0, 1.0], &[1.0, 1.5]).unwrap();
    group.bench_function("solve_scale_concave_convex", |b| {
        b.iter(|| cc.solve_scale(black_box(-2e-3), &[0.6, 0.8], Branch::Plus).unwrap())
    });
    group.finish();
}

fn optimizers(c: &mut Criterion) {
    let mut group = c.benchmark_group("optimizer");
    group.sample_size(10);
    let opt = OptimizerConfig::default();
    let plap = make_plap1d(2.0, 2.0, 4.0, 63).unwrap();
    group.bench_function("minimize_reduced_m63", |b| b.iter(|| minimize_reduced(&plap, black_box(1.0), Branch::Minus, &opt).unwrap()));
    group.bench_function("level2_m63", |b| b.iter(|| estimate_level(&plap, black_box(1.0), 2, Branch::Minus, &opt).unwrap()));
    let sp = make_sp_surrogate(&[1.0, 2.0], &[1.0, 2.0], &[1.0, 1.0], 2.5).unwrap();
    group.bench_function("cstar_sp_like", |b| b.iter(|| estimate_cstar(black_box(&sp), &opt).unwrap()));
    let grid = [1e-6, 1.0, 10.0, 100.0];
    let small = make_plap1d(2.0, 2.0, 4.0, 31).unwrap();
    group.bench_function("trace_ground_m31", |b| {
        b.iter(|| trace_curve(&small, 1, Branch::Minus, black_box(&grid), &TraceConfig::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, scale_and_value, optimizers);
criterion_main!(benches);
