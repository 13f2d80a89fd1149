use criterion::{black_box, criterion_group, criterion_main, Criterion};
use nalgebra::DMatrix;
use serde_json::json;

use cornerlab::bubble::{solve, BubbleProblem, PhiSpec, PsiSpec, SolveOptions};
use cornerlab::curvature::{scalar_curvature, tube_evolve, DerivMode, ShapeState};
use cornerlab::metric::build_builtin;
use cornerlab::CorneredDomain;

fn curvature(c: &mut Criterion) {
    let g = build_builtin("space-form", &json!({"n": 3, "curvature": -1.0})).unwrap();
    let x = vec![0.1, -0.2, 0.05];
    c.bench_function("scalar_curvature/fd", |b| {
        b.iter(|| scalar_curvature(&g, black_box(&x), DerivMode::FiniteDifference { h: 1e-3 }).unwrap())
    });
    let p = build_builtin("perturbed-flat", &json!({"n": 3, "amplitude": 0.05, "wavevector": [2.0, 1.0]})).unwrap();
    c.bench_function("scalar_curvature/perturbed", |b| b.iter(|| scalar_curvature(&p, black_box(&x), DerivMode::Auto).unwrap()));
}

fn tube(c: &mut Criterion) {
    let s0 = ShapeState {
        t: 0.0,
        gform: DMatrix::identity(2, 2),
        shapeop: -DMatrix::identity(2, 2),
        bop: DMatrix::zeros(2, 2),
    };
    let zero = DMatrix::zeros(2, 2);
    c.bench_function("tube_evolve/800_steps", |b| b.iter(|| tube_evolve(black_box(&s0), &|_| zero.clone(), 0.8, 1e-3).unwrap()));
}

fn bubble(c: &mut Criterion) {
    let g = build_builtin("flat", &json!({"n": 3, "chart": {"lower": [-1.0, -1.0, -1.0], "upper": [2.0, 2.0, 2.0]}})).unwrap();
    let cube = CorneredDomain::cube([0.0; 3], [1.0; 3]).unwrap();
    let p = BubbleProblem::new(g, cube, PhiSpec::zero(), PsiSpec::zero(), 16).unwrap();
    let init = p.surface(p.base.vertices.iter().map(|v| 0.4 + 0.1 * v[0]).collect()).unwrap();
    let mut group = c.benchmark_group("bubble");
    group.sample_size(10);
    group.bench_function("solve/16", |b| b.iter(|| solve(&p, black_box(&init), &SolveOptions::default()).unwrap()));
    group.finish();
}

criterion_group!(benches, curvature, tube, bubble);
criterion_main!(benches);
