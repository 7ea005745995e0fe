use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fle_benches::{cut_box, outside_points, unit_normals};
use fle_core::driver::SolverMode;
use fle_core::geometry::tangent_cone_generators;
use fle_core::{catalog, solve, SolverConfig};

fn projection(c: &mut Criterion) {
    let mut group = c.benchmark_group("projection");
    for n in [2, 6, 12] {
        let region = cut_box(n, n / 2, 1);
        let points = outside_points(n, 32, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                for z in &points {
                    black_box(region.project(z).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn tangent_cone(c: &mut Criterion) {
    let mut group = c.benchmark_group("tangent_cone");
    for (dim, count) in [(3, 3), (5, 6), (8, 10)] {
        let normals = unit_normals(dim, count, 3);
        group.bench_function(format!("{dim}x{count}"), |b| {
            b.iter(|| black_box(tangent_cone_generators(&normals, dim).unwrap()))
        });
    }
    group.finish();
}

fn solve_catalog(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(20);
    for name in ["lsqfit", "hs76", "quad-box-10"] {
        let problem = catalog::by_name(name).unwrap();
        for mode in SolverMode::ALL {
            let config = SolverConfig::with_budget(100 * (problem.dim() + 1)).with_mode(mode);
            group.bench_function(format!("{name}/{mode}"), |b| {
                b.iter(|| black_box(solve(&problem, &config).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, projection, tangent_cone, solve_catalog);
criterion_main!(benches);
