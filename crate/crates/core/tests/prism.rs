use std::f64::consts::PI;

use cornerlab::bubble::PhiSpec;
use cornerlab::curvature::DerivMode;
use cornerlab::domain::CorneredDomain;
use cornerlab::lab::*;
use cornerlab::metric::{build_builtin, MetricField};
use cornerlab::surface::BaseMesh;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

fn flat() -> MetricField {
    build_builtin("flat", &json!({"n": 3, "chart": {"lower": [-3.0, -3.0, -3.0], "upper": [3.0, 3.0, 3.0]}})).unwrap()
}

fn metric(family: &str, params: Value) -> MetricField {
    build_builtin(family, &params).unwrap()
}

/// Round `S²_κ` in gnomonic coordinates times an interval: geodesic polygons are straight.
fn sphere_product(kappa: f64) -> MetricField {
    metric(
        "product",
        json!({
            "first": {"family": "space-form", "n": 2, "curvature": kappa, "coordinates": "gnomonic",
                      "chart": {"lower": [-1.0, -1.0], "upper": [1.0, 1.0]}},
            "second": {"family": "flat", "n": 1, "chart": {"lower": [-1.0], "upper": [2.0]}}
        }),
    )
}

fn regular(k: usize, r: f64) -> Vec<[f64; 2]> {
    BaseMesh::regular_polygon_vertices(k, r, [0.0, 0.0], 0.3)
}

fn quick(resolution: usize) -> PrismOptions {
    PrismOptions { resolution, ..Default::default() }
}

#[test]
fn flat_cube_is_an_equality_case() {
    let cube = CorneredDomain::cube([0.0; 3], [1.0; 3]).unwrap();
    let r = run_prism_inequality(&flat(), &cube, 0.0, &PrismOptions::default()).unwrap();
    let direct = 2.0 * PI - r.alphas.iter().map(|a| PI - a).sum::<f64>();
    assert!(direct.abs() < 1e-3, "{direct}");
    assert!(r.slack.abs() < 2e-2, "{}", r.slack);
    assert!((r.area - 1.0).abs() < 5e-3);
    assert_eq!(r.euler_characteristic, 1);
    assert_ne!(r.verdict, Verdict::Violated);
    assert!(r.asserted);
    assert!(r.rigidity.total < 1e-6, "{:?}", r.rigidity);
    assert!(r.second_variation.bound.abs() < 1e-6, "{:?}", r.second_variation);
}

#[test]
fn flat_polygonal_prisms_are_equality_cases() {
    for k in [3, 6] {
        let p = CorneredDomain::prism(regular(k, 1.0), [0.0, 1.0]).unwrap();
        let r = run_prism_inequality(&flat(), &p, 0.0, &quick(32)).unwrap();
        let want = PI - 2.0 * PI / k as f64;
        for a in &r.alphas {
            assert!((a - want).abs() < 1e-9, "k={k}: {a}");
        }
        assert!(r.slack.abs() < 1e-3, "k={k}: {}", r.slack);
        assert!((r.area - p_area(k)).abs() < 1e-9);
        assert!(r.hypotheses.holds);
    }
}

fn p_area(k: usize) -> f64 {
    0.5 * k as f64 * (2.0 * PI / k as f64).sin()
}

#[test]
fn spherical_triangle_product_is_sharp() {
    let kappa = 1.0;
    let g = sphere_product(kappa);
    let p = CorneredDomain::prism(regular(3, 0.6), [0.0, 1.0]).unwrap();
    let r = run_prism_inequality(&g, &p, kappa, &quick(32)).unwrap();
    let gap = r.angle_deficit + kappa * r.area - 2.0 * PI;
    assert!(gap.abs() < 5e-2, "{gap}");
    assert!(r.hypotheses.scal_bound && r.hypotheses.normal && r.hypotheses.mean_convex_sides);
    assert!((r.hypotheses.inf_scal - 2.0 * kappa).abs() < 1e-6);
    assert!(r.second_variation.bound.abs() < 5e-2, "{:?}", r.second_variation);
    // the spherical excess is the angle sum over π
    let excess = r.alphas.iter().sum::<f64>() - PI;
    assert!((excess - kappa * r.area).abs() < 5e-2);
}

#[test]
fn horoprism_with_constant_mean_curvature_bubble() {
    let g = metric(
        "warped",
        json!({"base": {"family": "flat", "n": 2, "chart": {"lower": [-1.0, -1.0], "upper": [1.0, 1.0]}},
               "profile": {"kind": "exp"}, "t_range": [-1.0, 1.0]}),
    );
    let cube = CorneredDomain::cube([-0.5, -0.5, -0.5], [0.5, 0.5, 0.5]).unwrap();
    let opts = PrismOptions { phi: PhiSpec::Constant { value: 2.0 }, ..quick(16) };
    let r = run_prism_inequality(&g, &cube, 0.0, &opts).unwrap();
    let top = r.audit.faces.iter().find(|f| f.face == cube.realization.top()).unwrap();
    let bottom = r.audit.faces.iter().find(|f| f.face == cube.realization.bottom()).unwrap();
    assert!((top.inf_mean_curvature - 2.0).abs() < 1e-6 && (top.sup_mean_curvature - 2.0).abs() < 1e-6);
    assert!((bottom.inf_mean_curvature + 2.0).abs() < 1e-6);
    assert!(r.slack.abs() < 1e-6, "{}", r.slack);
    assert!(r.solver.residuals.interior_sup < 2e-2);
}

#[test]
fn stored_surface_reproduces_the_report() {
    let p = CorneredDomain::prism(regular(3, 1.0), [0.0, 1.0]).unwrap();
    let g = perturbed(7);
    let a = run_prism_inequality(&g, &p, 0.0, &quick(16)).unwrap();
    let opts = PrismOptions { init: Some(a.surface.clone()), ..quick(16) };
    let b = run_prism_inequality(&g, &p, 0.0, &opts).unwrap();
    for (x, y) in [
        (a.slack, b.slack),
        (a.area, b.area),
        (a.angle_deficit, b.angle_deficit),
        (a.second_variation.bound, b.second_variation.bound),
        (a.rigidity.total, b.rigidity.total),
    ] {
        assert!((x - y).abs() < 1e-10, "{x} vs {y}");
    }
}

#[test]
fn slack_moves_by_kappa_times_area() {
    let p = CorneredDomain::prism(regular(3, 1.0), [0.0, 1.0]).unwrap();
    let r = run_prism_inequality(&flat(), &p, 0.0, &quick(8)).unwrap();
    for dk in [0.1, 0.5, 2.0] {
        let s = r.with_kappa(dk);
        assert_eq!(s.kappa_area, dk * r.area);
        assert!((r.slack - s.slack - dk * r.area).abs() <= 4.0 * f64::EPSILON * (1.0 + r.two_pi_chi));
        assert!(s.slack < r.slack);
        assert!(!s.hypotheses.scal_bound && !s.asserted);
    }
}

/// Seeded conformally flat metric on the unit triangle prism with `scal ≥ 0` and mean-convex sides.
fn perturbed(seed: u64) -> MetricField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let th: f64 = rng.gen_range(0.0..2.0 * PI);
    let kn: f64 = rng.gen_range(0.0..1.5);
    metric(
        "perturbed-flat",
        json!({
            "n": 3,
            "amplitude": rng.gen_range(0.0..0.01),
            "wavevector": [kn * th.cos(), kn * th.sin()],
            "phase": rng.gen_range(0.0..2.0 * PI),
            "bowl": rng.gen_range(0.1..0.2),
            "bias": rng.gen_range(-0.05..0.0),
            "center": [0.0, 0.0, 0.5],
            "chart": {"lower": [-1.5, -1.5, -0.5], "upper": [1.5, 1.5, 1.5]}
        }),
    )
}

#[test]
fn perturbed_flat_sweep_never_violates() {
    let p = CorneredDomain::prism(regular(3, 1.0), [0.0, 1.0]).unwrap();
    for seed in 0..20 {
        let r = run_prism_inequality(&perturbed(seed), &p, 0.0, &quick(16)).unwrap();
        assert!(r.hypotheses.holds, "seed {seed}: {:?}", r.hypotheses);
        assert!(r.hypotheses.inf_scal >= 0.0);
        assert!(r.slack >= -2e-2 * 2.0 * PI, "seed {seed}: {}", r.slack);
        assert_ne!(r.verdict, Verdict::Violated);
        // conformal, so the angles stay Euclidean; rigidity then needs Y_min to escape through
        // a mean-concave top or bottom, where the free-boundary bound no longer applies
        assert!(r.slack.abs() < 1e-9);
        if r.solver.touches_horizontal {
            assert!(r.hypotheses.inf_horizontal_mean_curvature < 0.0);
        } else {
            assert!(r.second_variation.bound >= -5e-2, "seed {seed}: {:?}", r.second_variation);
        }
    }
}

#[test]
fn semi_integral_families() {
    let p = CorneredDomain::prism(regular(3, 0.6), [0.0, 1.0]).unwrap();
    let slices = |g: &MetricField| -> Vec<cornerlab::GraphSurface> {
        let pr = cornerlab::bubble::BubbleProblem::new(g.clone(), p.clone(), PhiSpec::zero(), cornerlab::bubble::PsiSpec::zero(), 12)
            .unwrap();
        [0.2, 0.5, 0.8].iter().map(|&h| pr.slice(Some(h)).unwrap()).collect()
    };
    let r = semi_integral_check(&flat(), &p, &slices(&flat()), 0.0, DerivMode::Auto).unwrap();
    assert!(r.min.abs() < 1e-9 && r.holds);

    let kappa = 1.0;
    let g = sphere_product(kappa);
    let r = semi_integral_check(&g, &p, &slices(&g), 0.0, DerivMode::Auto).unwrap();
    let area = cornerlab::surface::surface_area(&g, &slices(&g)[0]);
    for v in &r.integrals {
        assert!((v - 2.0 * kappa * area).abs() < 1e-6 * area, "{v} vs {}", 2.0 * kappa * area);
    }

    let tube = metric(
        "cone-tube",
        json!({"radius": 0.1, "strength": 0.3, "chart": {"lower": [-1.0, -1.0, -1.0], "upper": [1.0, 1.0, 2.0]}}),
    );
    let r = semi_integral_check(&tube, &p, &slices(&tube), 0.0, DerivMode::Auto).unwrap();
    assert!(r.min > 0.0 && r.holds, "{:?}", r.integrals);
}

#[test]
fn gluing_flat_slabs_is_non_strict() {
    let lower = CorneredDomain::cube([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]).unwrap();
    let upper = CorneredDomain::cube([0.0, 0.0, 1.0], [1.0, 1.0, 2.0]).unwrap();
    let a = GlueFace { metric: flat(), domain: lower.clone(), face: lower.realization.top() };
    let b = GlueFace { metric: flat(), domain: upper.clone(), face: upper.realization.bottom() };
    let r = gluing_condition(&a, &b, &GlueOptions::default()).unwrap();
    assert!(r.holds && !r.strict);
    assert!(r.inf_sum.abs() < 1e-12 && r.metric_mismatch < 1e-12);
}

#[test]
fn gluing_matched_spheres_cancels() {
    // polar chart (r, θ, φ): inside and outside the unit sphere
    let g = metric("polar-flat", json!({"n": 3, "chart": {"lower": [0.2, 0.3, -1.0], "upper": [3.0, 2.8, 1.0]}}));
    // side 1 is x = upper, side 3 is x = lower; they run in opposite directions, so θ is
    // centred on π/2 where sin²θ is symmetric
    let (a, b) = (PI / 2.0 - 0.5, PI / 2.0 + 0.5);
    let inner = CorneredDomain::cube([0.5, a, -0.5], [1.0, b, 0.5]).unwrap();
    let outer = CorneredDomain::cube([1.0, a, -0.5], [1.5, b, 0.5]).unwrap();
    let a = GlueFace { metric: g.clone(), domain: inner, face: 1 };
    let b = GlueFace { metric: g.clone(), domain: outer, face: 3 };
    let r = gluing_condition(&a, &b, &GlueOptions::default()).unwrap();
    for p in &r.points {
        assert!((p.h1 - 2.0).abs() < 1e-6 && (p.h2 + 2.0).abs() < 1e-6, "{p:?}");
    }
    assert!(r.inf_sum.abs() < 1e-6);
}

#[test]
fn gluing_convex_faces_is_strict() {
    let up = metric(
        "warped",
        json!({"base": {"family": "flat", "n": 2, "chart": {"lower": [-1.0, -1.0], "upper": [1.0, 1.0]}},
               "profile": {"kind": "exp"}, "t_range": [-1.0, 0.5]}),
    );
    let down = metric(
        "warped",
        json!({"base": {"family": "flat", "n": 2, "chart": {"lower": [-1.0, -1.0], "upper": [1.0, 1.0]}},
               "profile": {"kind": "exp", "rate": -1.0}, "t_range": [-0.5, 1.0]}),
    );
    let lower = CorneredDomain::cube([-0.5, -0.5, -0.5], [0.5, 0.5, 0.0]).unwrap();
    let upper = CorneredDomain::cube([-0.5, -0.5, 0.0], [0.5, 0.5, 0.5]).unwrap();
    let a = GlueFace { metric: up.clone(), domain: lower.clone(), face: lower.realization.top() };
    let b = GlueFace { metric: down.clone(), domain: upper.clone(), face: upper.realization.bottom() };
    let r = gluing_condition(&a, &b, &GlueOptions::default()).unwrap();
    assert!(r.strict && (r.inf_sum - 4.0).abs() < 1e-6, "{}", r.inf_sum);

    // a face glued to a mismatched one is refused
    let wide = metric(
        "warped",
        json!({"base": {"family": "flat", "n": 2, "chart": {"lower": [-1.0, -1.0], "upper": [1.0, 1.0]}},
               "profile": {"kind": "exp", "scale": 1.5}, "t_range": [-0.5, 1.0]}),
    );
    let c = GlueFace { metric: wide, domain: upper.clone(), face: upper.realization.bottom() };
    assert!(gluing_condition(&a, &c, &GlueOptions::default()).is_err());
}

fn face_forms(a0: f64, ap: f64) -> (MetricField, cornerlab::QuadraticFormField, cornerlab::QuadraticFormField) {
    let g0 = metric("flat", json!({"n": 2, "chart": {"lower": [0.0, 0.0], "upper": [1.0, 1.0]}}));
    let chart = g0.chart().clone();
    let f = |s: f64| cornerlab::QuadraticFormField::constant(chart.clone(), cornerlab::SMat::identity(2).scale(s)).unwrap();
    (g0.clone(), f(a0), f(ap))
}

#[test]
fn interpolation_scal_follows_inverse_eps() {
    let eps = [1e-2, 3e-3, 1e-3, 3e-4];
    let opts = AsymptoticsOptions { per_axis: 3, t_samples: 5, mode: DerivMode::Auto };
    let (g0, a0, ap) = face_forms(0.0, -1.0);
    let r = scale_asymptotics(&g0, &a0, &ap, &eps, &opts).unwrap();
    assert!((r.exponent - 1.0).abs() < 0.05, "{r:?}");
    assert_eq!(r.sign, 1.0);
    assert_eq!(r.trace_sign, 1.0);
    let (g0, a0, ap) = face_forms(0.0, 1.0);
    let r = scale_asymptotics(&g0, &a0, &ap, &eps, &opts).unwrap();
    assert!((r.exponent - 1.0).abs() < 0.05, "{r:?}");
    assert_eq!(r.sign, -1.0);
    assert_eq!(r.trace_sign, -1.0);
    let (g0, a0, ap) = face_forms(0.5, 0.5);
    let r = scale_asymptotics(&g0, &a0, &ap, &eps, &opts).unwrap();
    assert!(!r.clean_law && r.trace_sign == 0.0);
    assert!(r.exponent.abs() < 0.05, "{r:?}");
    assert!(scale_asymptotics(&g0, &a0, &ap, &[1e-3, 1e-2, 1e-4], &opts).is_err());
}

#[test]
fn regularized_flat_glue_stays_flat() {
    let lower = CorneredDomain::cube([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]).unwrap();
    let upper = CorneredDomain::cube([0.0, 0.0, 1.0], [1.0, 1.0, 2.0]).unwrap();
    let a = GlueFace { metric: flat(), domain: lower.clone(), face: lower.realization.top() };
    let b = GlueFace { metric: flat(), domain: upper.clone(), face: upper.realization.bottom() };
    let opts = GlueOptions {
        regularize: Some(Regularization { axis: 2, at: 1.0, sigma: 0.05, per_axis: 3 }),
        ..Default::default()
    };
    let r = gluing_condition(&a, &b, &opts).unwrap();
    assert!(r.regularized_inf_scal.unwrap().abs() < 1e-8, "{:?}", r.regularized_inf_scal);
}

#[test]
fn equal_faces_make_the_family_independent_of_eps() {
    let (g0, a0, ap) = face_forms(0.5, 0.5);
    let a = cornerlab::metric::interpolation_family(&g0, &a0, &ap, 1e-2).unwrap();
    let b = cornerlab::metric::interpolation_family(&g0, &a0, &ap, 1e-3).unwrap();
    for x in [[0.3, 0.6, 0.0], [0.5, 0.5, 5e-4], [0.2, 0.9, 1e-3]] {
        assert_eq!(a.eval(&x), b.eval(&x));
        let sa = cornerlab::scalar_curvature(&a, &x, DerivMode::Auto).unwrap();
        let sb = cornerlab::scalar_curvature(&b, &x, DerivMode::Auto).unwrap();
        assert_eq!(sa, sb);
    }
}
