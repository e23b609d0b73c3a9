use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fspde_bench::linear_case;
use fspde_core::kernels::{kernel_field, KernelKind, KernelSymbol};
use fspde_core::specfun::{ml_integral, ml_series, MLParams, MlTable};
use fspde_core::solver::solve_linear;
use fspde_core::torus::TorusGrid;

fn mittag_leffler(c: &mut Criterion) {
    let p = MLParams::new(0.7, 1.0).unwrap();
    c.bench_function("ml_series v=2", |b| b.iter(|| ml_series(p, black_box(-2.0), 1e-15).unwrap()));
    c.bench_function("ml_integral v=20", |b| b.iter(|| ml_integral(p, black_box(20.0)).unwrap()));
    let table = MlTable::new(p, 1e4).unwrap();
    c.bench_function("ml_table eval", |b| b.iter(|| table.eval(black_box(123.4))));
    c.bench_function("ml_table build v_max=1e4", |b| b.iter(|| MlTable::new(p, 1e4).unwrap()));
}

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_field");
    for (d, n) in [(1usize, 1024usize), (2, 128)] {
        let grid = TorusGrid::new(d, n, 20.0).unwrap();
        let sym = KernelSymbol::new(KernelKind::Q { beta: 0.6 }, 1.2, 0.5).unwrap();
        group.bench_with_input(BenchmarkId::new(format!("d{d}"), n), &grid, |b, g| {
            b.iter(|| kernel_field(&sym, g, f64::INFINITY).unwrap())
        });
    }
    group.finish();
}

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_linear");
    group.sample_size(10);
    for (n, steps) in [(32usize, 32usize), (64, 64)] {
        let case = linear_case(n, steps);
        group.bench_function(BenchmarkId::from_parameter(format!("N{n}_steps{steps}")), |b| {
            b.iter(|| solve_linear(&case.data, &case.params, &case.grid, case.time, &case.noise).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, mittag_leffler, kernels, solver);
criterion_main!(benches);
