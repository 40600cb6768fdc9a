use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use splinemat_core::distance::{solve_quartic_newton, solve_quartic_roots};
use splinemat_core::fixtures::{random_curve, random_quartic, random_queries, TABLE_SHAPES_2D};
use splinemat_core::{
    approximate_error_controlled, decompose_to_bezier, ApproxConfig, BSplineCurve, Engine, Point2,
    Projector,
};

fn table_curves() -> Vec<((usize, usize), BSplineCurve<2>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    TABLE_SHAPES_2D
        .iter()
        .map(|&(p, n)| ((p, n), random_curve(&mut rng, p, n)))
        .collect()
}

fn decompose(c: &mut Criterion) {
    let mut g = c.benchmark_group("decompose");
    for ((p, n), curve) in table_curves() {
        g.bench_with_input(
            BenchmarkId::from_parameter(format!("p{p}_n{n}")),
            &curve,
            |b, curve| b.iter(|| decompose_to_bezier(black_box(curve)).unwrap()),
        );
    }
    g.finish();
}

fn approximate(c: &mut Criterion) {
    let engine = Engine::new(1);
    let cfg = ApproxConfig::default();
    let mut g = c.benchmark_group("approximate");
    g.sample_size(10);
    for ((p, n), curve) in table_curves() {
        let segs = decompose_to_bezier(&curve).unwrap();
        g.bench_with_input(
            BenchmarkId::from_parameter(format!("p{p}_n{n}")),
            &segs,
            |b, segs| {
                b.iter(|| approximate_error_controlled(black_box(segs), &cfg, &engine).unwrap())
            },
        );
    }
    g.finish();
}

fn project(c: &mut Criterion) {
    let engine = Engine::with_default_workers();
    let mut g = c.benchmark_group("project");
    g.sample_size(10);
    for ((p, n), curve) in table_curves().into_iter().step_by(3) {
        let proj = Projector::new(&curve, 1e-4, &engine).unwrap();
        let queries: Vec<Point2> = random_queries(&mut ChaCha8Rng::seed_from_u64(2), 1000, 0.25);
        g.throughput(Throughput::Elements(queries.len() as u64));
        g.bench_with_input(
            BenchmarkId::from_parameter(format!("p{p}_n{n}")),
            &queries,
            |b, q| b.iter(|| proj.project_points(black_box(q), &engine)),
        );
    }
    g.finish();
}

fn quartic(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let polys: Vec<_> = (0..1000).map(|_| random_quartic(&mut rng)).collect();
    let mut g = c.benchmark_group("quartic");
    g.throughput(Throughput::Elements(polys.len() as u64));
    g.bench_function("closed_form", |b| {
        b.iter(|| {
            polys
                .iter()
                .map(|p| solve_quartic_roots(black_box(&p.coeffs)).len())
                .sum::<usize>()
        })
    });
    g.bench_function("newton", |b| {
        b.iter(|| {
            polys
                .iter()
                .map(|p| solve_quartic_newton(black_box(&p.coeffs)).len())
                .sum::<usize>()
        })
    });
    g.finish();
}

criterion_group!(benches, decompose, approximate, project, quartic);
criterion_main!(benches);
