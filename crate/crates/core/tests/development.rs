use std::f64::consts::PI;

use cornerlab::curvature::{scalar_curvature, DerivMode};
use cornerlab::metric::{build_builtin, double_across_face, interface_jumps, mollify, reflection_develop, FaceSide};
use cornerlab::{ChartBox, MetricField, SMat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const STEPS: [f64; 3] = [4e-3, 2e-3, 1e-3];

fn unit_cube(n: usize) -> serde_json::Value {
    json!({"lower": vec![0.0; n], "upper": vec![1.0; n]})
}

/// `g = (1 + a·Π cos(π x_k))·δ`: every face of the unit cube is totally geodesic.
fn geodesic_faces(n: usize, a: f64) -> MetricField {
    MetricField::from_fn(ChartBox::cube(n, 0.0, 1.0), "cosine-bump", move |x| {
        let f = 1.0 + a * x.iter().map(|v| (PI * v).cos()).product::<f64>();
        SMat::<f64>::identity(x.len()).scale(f)
    })
    .unwrap()
}

fn jumps(g: &MetricField, axis: usize, face: f64) -> Vec<f64> {
    STEPS.iter().map(|&h| interface_jumps(g, axis, face, h, 5).first_difference_jump).collect()
}

fn decays_linearly(j: &[f64]) -> bool {
    j.windows(2).all(|w| (w[0] / w[1] - 2.0).abs() < 0.1)
}

#[test]
fn flat_double_is_seamless() {
    let g = build_builtin("flat", &json!({"n": 3, "chart": unit_cube(3)})).unwrap();
    let (d, diag) = double_across_face(&g, 2, FaceSide::Upper).unwrap();
    assert_eq!(diag.coefficient_jump, 0.0);
    assert_eq!(diag.first_difference_jump, 0.0);
    assert_eq!(d.chart().upper[2], 2.0);
    assert!(jumps(&d, 2, 1.0).iter().all(|&j| j == 0.0));
}

#[test]
fn totally_geodesic_face_doubles_to_c1() {
    // cosh warp: the slice t = 0 has vanishing second fundamental form
    let g = build_builtin(
        "warped",
        &json!({"base": {"family": "flat", "n": 2, "chart": unit_cube(2)}, "profile": {"kind": "cosh", "rate": 2.0},
                "t_range": [0.0, 1.0]}),
    )
    .unwrap();
    let (d, diag) = double_across_face(&g, 2, FaceSide::Lower).unwrap();
    assert!(diag.coefficient_jump < 1e-12);
    let j = jumps(&d, 2, 0.0);
    assert!(decays_linearly(&j), "{j:?}");
}

fn seeded_bumpy(seed: u64) -> MetricField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    build_builtin(
        "perturbed-flat",
        &json!({"n": 3, "amplitude": rng.gen_range(0.05..0.1), "wavevector": [rng.gen_range(1.0..3.0), rng.gen_range(1.0..3.0)],
                "phase": rng.gen_range(0.0..PI), "chart": unit_cube(3)}),
    )
    .unwrap()
}

#[test]
fn curved_face_leaves_a_kink() {
    let geo = build_builtin(
        "warped",
        &json!({"base": {"family": "flat", "n": 2, "chart": unit_cube(2)}, "profile": {"kind": "cosh", "rate": 2.0},
                "t_range": [0.0, 1.0]}),
    )
    .unwrap();
    let (geo, _) = double_across_face(&geo, 2, FaceSide::Lower).unwrap();
    let reference = *jumps(&geo, 2, 0.0).last().unwrap();
    for seed in 0..5 {
        let (d, diag) = double_across_face(&seeded_bumpy(seed), 2, FaceSide::Upper).unwrap();
        assert!(diag.coefficient_jump < 1e-12);
        let j = jumps(&d, 2, 1.0);
        // a kink does not shrink under refinement
        assert!((j[2] / j[0] - 1.0).abs() < 0.05, "{j:?}");
        assert!(j[2] >= 10.0 * reference, "seed {seed}: {} vs {reference}", j[2]);
    }
}

#[test]
fn flat_cube_develops_to_a_flat_torus() {
    let g = build_builtin("flat", &json!({"n": 3, "chart": unit_cube(3)})).unwrap();
    let t = reflection_develop(&g).unwrap();
    assert!((0..3).all(|k| t.chart().is_periodic(k) && t.chart().upper[k] == 2.0));
    for x in [[0.3, 1.7, 1.2], [1.99, 0.01, 1.0], [-0.5, 3.3, 7.1]] {
        assert_eq!(t.eval(&x), SMat::identity(3));
    }
}

#[test]
fn geodesic_faces_develop_to_c1() {
    let g = geodesic_faces(3, 0.3);
    let t = reflection_develop(&g).unwrap();
    for axis in 0..3 {
        assert!(interface_jumps(&t, axis, 1.0, 1e-3, 5).coefficient_jump < 1e-12);
        let j = jumps(&t, axis, 1.0);
        assert!(decays_linearly(&j), "axis {axis}: {j:?}");
        // the wrap-around interface at x = 0 as well
        let j = jumps(&t, axis, 0.0);
        assert!(decays_linearly(&j), "axis {axis}: {j:?}");
    }
}

#[test]
fn mollifying_flat_is_flat() {
    let g = build_builtin("flat", &json!({"n": 2, "chart": unit_cube(2)})).unwrap();
    let m = mollify(&g, 0.05).unwrap();
    let v = m.eval(&[0.4, 0.6]);
    for i in 0..2 {
        for j in 0..2 {
            assert!((v.a[i][j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }
}

#[test]
fn mollifier_error_is_second_order() {
    let g = build_builtin(
        "space-form",
        &json!({"n": 2, "curvature": 1.0, "chart": {"lower": [-0.6, -0.6], "upper": [0.6, 0.6]}}),
    )
    .unwrap();
    let err = |sigma: f64| {
        let m = mollify(&g, sigma).unwrap();
        let mut e: f64 = 0.0;
        for x in [[0.0, 0.0], [0.2, -0.1], [-0.25, 0.3]] {
            let (a, b) = (g.eval(&x), m.eval(&x));
            for i in 0..2 {
                for j in 0..2 {
                    e = e.max((a.a[i][j] - b.a[i][j]).abs());
                }
            }
        }
        e
    };
    let (e1, e2) = (err(0.08), err(0.04));
    assert!((e1 / e2 - 4.0).abs() < 0.4, "{e1} {e2}");
}

#[test]
fn mollified_c1_development_loses_little_scalar_curvature() {
    let g = geodesic_faces(2, 0.2);
    let inf_base = ChartBox::cube(2, 0.05, 0.95)
        .sample_grid(9)
        .iter()
        .map(|x| scalar_curvature(&g, x, DerivMode::FiniteDifference { h: 1e-3 }).unwrap())
        .fold(f64::INFINITY, f64::min);
    let t = reflection_develop(&g).unwrap();
    let deficits: Vec<f64> = [0.08, 0.04]
        .iter()
        .map(|&sigma| {
            let m = mollify(&t, sigma).unwrap();
            // straddle the interfaces x = 1 and y = 1
            let inf = ChartBox::cube(2, 0.8, 1.2)
                .sample_grid(5)
                .iter()
                .map(|x| scalar_curvature(&m, x, DerivMode::Auto).unwrap())
                .fold(f64::INFINITY, f64::min);
            (inf_base - inf).max(0.0)
        })
        .collect();
    assert!(deficits[1] <= 0.6 * deficits[0] + 1e-9, "{deficits:?}");
}
