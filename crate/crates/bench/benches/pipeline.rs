//! End-to-end timings of the pipeline stages on fixed mid-size inputs.

use criterion::{criterion_group, criterion_main, Criterion};
use steklov_core::{
    ball_subgraph, build_discretization, build_domain, epsilon_max, generate_tiling,
    maximal_separated_subset, steklov_spectrum, CornerMode, DiskPoint,
};

fn bench_tiling(c: &mut Criterion) {
    c.bench_function("tiling (2,3,7) depth 6", |b| {
        b.iter(|| generate_tiling(2, 3, 7, 6).unwrap())
    });
    let tiling = generate_tiling(2, 3, 7, 6).unwrap();
    c.bench_function("host graph from depth-6 tiling", |b| {
        b.iter(|| tiling.host_graph())
    });
}

fn bench_spectrum(c: &mut Criterion) {
    let tiling = generate_tiling(2, 3, 7, 6).unwrap();
    let host = tiling.host_graph();
    for radius in [2u32, 3] {
        let g = ball_subgraph(&host, 0, radius).unwrap();
        let label = format!(
            "steklov spectrum, radius-{radius} ball ({} interior, {} boundary)",
            g.n_interior(),
            g.n_boundary()
        );
        c.bench_function(&label, |b| b.iter(|| steklov_spectrum(&g).unwrap()));
    }
}

fn bench_domain(c: &mut Criterion) {
    let tiling = generate_tiling(2, 3, 7, 6).unwrap();
    let host = tiling.host_graph();
    let g = ball_subgraph(&host, 0, 2).unwrap();
    c.bench_function("domain build, radius-2 ball", |b| {
        b.iter(|| build_domain(&g, &tiling, CornerMode::Smooth).unwrap())
    });
}

fn bench_discretize(c: &mut Criterion) {
    let tiling = generate_tiling(2, 3, 7, 6).unwrap();
    let host = tiling.host_graph();
    let g = ball_subgraph(&host, 0, 1).unwrap();
    let d = build_domain(&g, &tiling, CornerMode::Smooth).unwrap();
    let eps = epsilon_max(&d);
    c.bench_function("discretization, radius-1 ball at epsilon_max", |b| {
        b.iter(|| build_discretization(&d, eps).unwrap())
    });

    // The greedy net on a synthetic spiral, isolated from domain geometry.
    let candidates: Vec<DiskPoint> = (0..4000)
        .map(|i| {
            let t = i as f64 * 0.003;
            let r = 0.95 * (1.0 - (-t).exp());
            DiskPoint::new(r * t.cos(), r * t.sin()).unwrap()
        })
        .collect();
    c.bench_function("maximal separated subset, 4000 candidates", |b| {
        b.iter(|| maximal_separated_subset(&candidates, 0.05).unwrap())
    });
}

criterion_group!(
    benches,
    bench_tiling,
    bench_spectrum,
    bench_domain,
    bench_discretize
);
criterion_main!(benches);
