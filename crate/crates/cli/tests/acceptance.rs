//! One PASS/FAIL line per acceptance criterion.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use cornerlab::bubble::{eps_minimization_transfer, solve, trap_margin, BubbleProblem, PhiSpec, PsiSpec, SolveOptions};
use cornerlab::curvature::{scalar_curvature, tube_evolve, DerivMode, ShapeState};
use cornerlab::lab::{run_prism_inequality, scale_asymptotics, AsymptoticsOptions, PrismOptions, Verdict};
use cornerlab::metric::{build_builtin, cone_over, double_across_face, interface_jumps, scaled, FaceSide};
use cornerlab::surface::{
    discrete_gauss_bonnet, gauss_equation_residual, BaseMesh, Coorientation, GraphSurface, HeightProfile, SurfacePoint,
};
use cornerlab::{CorneredDomain, MetricField, QuadraticFormField, SMat};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Check = Result<String, String>;

fn metric(family: &str, params: Value) -> MetricField {
    build_builtin(family, &params).unwrap()
}

fn flat3(half: f64) -> MetricField {
    let (lo, hi) = (vec![-half; 3], vec![half; 3]);
    metric("flat", json!({"n": 3, "chart": {"lower": lo, "upper": hi}}))
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn regular(k: usize, r: f64) -> Vec<[f64; 2]> {
    BaseMesh::regular_polygon_vertices(k, r, [0.0, 0.0], 0.3)
}

fn c1_space_forms() -> Check {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for n in 2..=4usize {
        for k in [-1.0, 0.0, 1.0] {
            let g = metric("space-form", json!({"n": n, "curvature": k}));
            let want = (n * (n - 1)) as f64 * k;
            let c = g.chart().clone();
            for _ in 0..100 {
                let x: Vec<f64> = (0..n).map(|i| c.lower[i] + c.width(i) * rng.gen_range(0.1..0.9)).collect();
                let s = scalar_curvature(&g, &x, DerivMode::FiniteDifference { h: 1e-3 }).map_err(|e| e.to_string())?;
                worst = worst.max((s - want).abs() / want.abs().max(1.0));
            }
        }
    }
    let took = clock.elapsed().as_secs_f64();
    ensure(worst < 1e-4 && took < 5.0, format!("max rel error {worst:.2e}, {took:.2} s"))
}

fn c2_cone_law() -> Check {
    let round = metric(
        "space-form",
        json!({"n": 2, "curvature": 1.0, "coordinates": "polar", "chart": {"lower": [0.3, -1.0], "upper": [2.8, 1.0]}}),
    );
    let cone = cone_over(&round, 0.5, 2.0).map_err(|e| e.to_string())?;
    let mut flat_worst: f64 = 0.0;
    for x in cone.chart().sample_grid(17) {
        flat_worst = flat_worst.max(scalar_curvature(&cone, &x, DerivMode::Auto).map_err(|e| e.to_string())?.abs());
    }
    let big = cone_over(&scaled(&round, 1.5).map_err(|e| e.to_string())?, 0.5, 2.0).map_err(|e| e.to_string())?;
    let mut neg_max = f64::NEG_INFINITY;
    for x in big.chart().sample_grid(17) {
        neg_max = neg_max.max(scalar_curvature(&big, &x, DerivMode::Auto).map_err(|e| e.to_string())?);
    }
    ensure(flat_worst < 1e-3 && neg_max < 0.0, format!("sup|scal| over S² cone {flat_worst:.2e}; sup scal over scaled cone {neg_max:.3}"))
}

fn riccati_error(states: &[ShapeState], exact: impl Fn(f64) -> f64) -> f64 {
    states
        .iter()
        .map(|s| {
            let e = exact(s.t);
            (s.shapeop[(0, 0)] - e).abs().max((s.shapeop[(1, 1)] - e).abs()).max(s.shapeop[(0, 1)].abs())
        })
        .fold(0.0, f64::max)
}

fn c3_tube() -> Check {
    let state = |s0: f64| ShapeState {
        t: 0.0,
        gform: DMatrix::identity(2, 2),
        shapeop: DMatrix::identity(2, 2) * s0,
        bop: DMatrix::zeros(2, 2),
    };
    let zero = DMatrix::zeros(2, 2);
    let r = 1.0;
    let tr = tube_evolve(&state(-1.0 / r), &|_| zero.clone(), 0.8 * r, 1e-3).map_err(|e| e.to_string())?;
    let e_sphere = riccati_error(&tr.states, |t| -1.0 / (r - t));
    let tr = tube_evolve(&state(-1.0 / r), &|_| zero.clone(), 1.5 * r, 1e-3).map_err(|e| e.to_string())?;
    let focal = tr.blowup.map(|b| (b.focal_estimate - r).abs()).unwrap_or(f64::INFINITY);
    let minus = -DMatrix::<f64>::identity(2, 2);
    let tr = tube_evolve(&state(0.0), &|_| minus.clone(), 0.8 * PI / 2.0, 1e-3).map_err(|e| e.to_string())?;
    let e_eq = riccati_error(&tr.states, |t| -t.tan());
    ensure(
        e_sphere < 1e-8 && e_eq < 1e-8 && focal < 1e-3,
        format!("sphere {e_sphere:.2e}, equator {e_eq:.2e}, focal error {focal:.2e}"),
    )
}

fn c4_gauss_equation() -> Check {
    let bx = json!({"lower": [-0.9, -0.9, -0.9], "upper": [0.9, 0.9, 0.9]});
    let surface = |p: HeightProfile| {
        let base = Arc::new(BaseMesh::rectangle([-0.3, -0.3], [0.3, 0.3], 2, 2).unwrap());
        GraphSurface::from_profile(base, p, [-0.9, 0.9], Coorientation::BelowIn).unwrap()
    };
    let wave = HeightProfile::Wave { offset: 0.05, amplitude: 0.08, wavevector: [6.0, -4.0], phase: 0.3 };
    let pairs = vec![
        ("flat/slice", metric("flat", json!({"n": 3, "chart": bx})), surface(HeightProfile::Constant { value: 0.2 })),
        ("flat/sphere", flat3(2.0), surface(HeightProfile::SphereCap { center: [0.0, 0.0, -0.5], radius: 1.0, upper: true })),
        ("sphere/wave", metric("space-form", json!({"n": 3, "curvature": 1.0, "chart": bx})), surface(wave.clone())),
        (
            "perturbed/wave",
            metric("perturbed-flat", json!({"n": 3, "amplitude": 0.05, "wavevector": [8.0, 5.0], "bias": 0.02, "chart": bx})),
            surface(wave),
        ),
        (
            "warped/quadratic",
            metric(
                "warped",
                json!({"base": {"family": "flat", "n": 2}, "profile": {"kind": "cosh", "rate": 7.0, "scale": 1.0}, "t_range": [-0.9, 0.9]}),
            ),
            surface(HeightProfile::Quadratic { offset: 0.1, slope: [0.3, -0.2], hessian: [[1.5, 0.4], [0.4, -0.8]] }),
        ),
    ];
    let at = SurfacePoint::Base([0.07, -0.04]);
    let mut worst: f64 = 0.0;
    let mut decay = true;
    for (name, g, y) in &pairs {
        let r: Vec<f64> = [4e-3, 2e-3, 1e-3]
            .iter()
            .map(|&h| gauss_equation_residual(g, y, at, DerivMode::FiniteDifference { h }).map(f64::abs))
            .collect::<cornerlab::Result<_>>()
            .map_err(|e| format!("{name}: {e}"))?;
        worst = worst.max(r[2]);
        for k in 0..2 {
            // rounding floor: residuals this small carry no truncation signal
            if r[k + 1] > 1e-9 && r[k] / r[k + 1] < 3.0 {
                decay = false;
            }
        }
    }
    ensure(worst < 1e-4 && decay, format!("{} pairs, worst residual at h=1e-3 {worst:.2e}, O(h²) decay {decay}", pairs.len()))
}

fn c5_bubbles() -> Check {
    let cube = CorneredDomain::cube([0.0; 3], [1.0; 3]).unwrap();
    let p = BubbleProblem::new(flat3(3.0), cube.clone(), PhiSpec::zero(), PsiSpec::zero(), 64).map_err(|e| e.to_string())?;
    let init = p.surface(p.base.vertices.iter().map(|v| 0.35 + 0.2 * v[0] + 0.1 * v[1]).collect()).unwrap();
    let clock = Instant::now();
    let s = solve(&p, &init, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let took = clock.elapsed().as_secs_f64();
    let area_err = (s.energy - 1.0).abs();
    let slice_ok = area_err < 5e-3
        && s.residuals.interior_sup < 1e-2
        && s.residuals.boundary_angle_sup < 0.5f64.to_radians()
        && took < 30.0;

    let c = [0.0; 3];
    let bx = CorneredDomain::cube([-0.5, -0.5, 0.5], [0.5, 0.5, 1.5]).unwrap();
    let phi = PhiSpec::Radial { center: c, coefficient: 2.0, power: 1.0 };
    let p = BubbleProblem::new(flat3(3.0), bx, phi, PsiSpec::Radial { center: c }, 32).map_err(|e| e.to_string())?.with_anchor(0.5);
    let init = p.surface(p.base.vertices.iter().map(|v| (1.02 - v[0] * v[0] - v[1] * v[1]).sqrt()).collect()).unwrap();
    let sph = solve(&p, &init, &SolveOptions { max_iter: 100, ..Default::default() }).map_err(|e| e.to_string())?;

    let p = BubbleProblem::new(flat3(3.0), cube, PhiSpec::zero(), PsiSpec::PerSide { values: vec![0.0, 0.5, 0.0, -0.5] }, 32).map_err(|e| e.to_string())?;
    let cap = solve(&p, &p.slice(None).unwrap(), &SolveOptions::default()).map_err(|e| e.to_string())?;
    let g = flat3(3.0);
    let mut angle_err: f64 = 0.0;
    for v in p.base.side_vertices(1) {
        if p.base.vertex_sides(v).len() == 1 {
            let a = cap.surface.contact_angle(&g, 1, SurfacePoint::Vertex(v)).map_err(|e| e.to_string())?;
            angle_err = angle_err.max((a - PI / 3.0).abs());
        }
    }
    ensure(
        slice_ok && sph.residuals.interior_sup < 2e-2 && angle_err < 1f64.to_radians(),
        format!(
            "slice area error {:.2e}, sup|H| {:.2e}, angle error {:.3}°, {took:.1} s; sphere sup|H−φ| {:.2e}; ψ=0.5 side angle error {:.3}°",
            area_err,
            s.residuals.interior_sup,
            s.residuals.boundary_angle_sup.to_degrees(),
            sph.residuals.interior_sup,
            angle_err.to_degrees()
        ),
    )
}

fn c6_equality_cases() -> Check {
    let g = flat3(3.0);
    let mut direct_worst: f64 = 0.0;
    let mut solve_worst: f64 = 0.0;
    let cube = CorneredDomain::cube([0.0; 3], [1.0; 3]).unwrap();
    let domains = [
        (cube, PrismOptions::default()),
        (CorneredDomain::prism(regular(3, 1.0), [0.0, 1.0]).unwrap(), PrismOptions { resolution: 32, ..Default::default() }),
        (CorneredDomain::prism(regular(6, 1.0), [0.0, 1.0]).unwrap(), PrismOptions { resolution: 32, ..Default::default() }),
    ];
    for (p, opts) in &domains {
        let r = run_prism_inequality(&g, p, 0.0, opts).map_err(|e| e.to_string())?;
        let direct = 2.0 * PI - r.alphas.iter().map(|a| PI - a).sum::<f64>();
        direct_worst = direct_worst.max(direct.abs());
        solve_worst = solve_worst.max(r.slack.abs());
    }
    let kappa = 1.0;
    let sphere = metric(
        "product",
        json!({
            "first": {"family": "space-form", "n": 2, "curvature": kappa, "coordinates": "gnomonic",
                      "chart": {"lower": [-1.0, -1.0], "upper": [1.0, 1.0]}},
            "second": {"family": "flat", "n": 1, "chart": {"lower": [-1.0], "upper": [2.0]}}
        }),
    );
    let p = CorneredDomain::prism(regular(3, 0.6), [0.0, 1.0]).unwrap();
    let r = run_prism_inequality(&sphere, &p, kappa, &PrismOptions { resolution: 32, ..Default::default() }).map_err(|e| e.to_string())?;
    let gap = (r.angle_deficit + kappa * r.area - 2.0 * PI).abs();
    ensure(
        direct_worst < 1e-3 && solve_worst < 2e-2 && gap < 5e-2,
        format!("direct {direct_worst:.2e}, full solve {solve_worst:.2e}, S²_κ triangle gap {gap:.2e}"),
    )
}

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

fn c7_property_sweep() -> Check {
    let p = CorneredDomain::prism(regular(3, 1.0), [0.0, 1.0]).unwrap();
    let opts = PrismOptions { resolution: 16, ..Default::default() };
    let mut min_slack = f64::INFINITY;
    let mut hyp = true;
    let mut violated = 0;
    for seed in 0..20 {
        let r = run_prism_inequality(&perturbed(seed), &p, 0.0, &opts).map_err(|e| format!("seed {seed}: {e}"))?;
        hyp &= r.hypotheses.holds && r.hypotheses.inf_scal >= 0.0;
        min_slack = min_slack.min(r.slack);
        violated += (r.verdict == Verdict::Violated) as usize;
    }
    ensure(
        hyp && min_slack >= -2e-2 * 2.0 * PI && violated == 0,
        format!("20 seeds, hypotheses hold {hyp}, min slack {min_slack:.2e}, violated {violated}"),
    )
}

fn c8_asymptotics() -> Check {
    let g0 = metric("flat", json!({"n": 2, "chart": {"lower": [0.0, 0.0], "upper": [1.0, 1.0]}}));
    let chart = g0.chart().clone();
    let form = |s: f64| QuadraticFormField::constant(chart.clone(), SMat::identity(2).scale(s)).unwrap();
    let eps = [1e-2, 3e-3, 1e-3, 3e-4];
    let opts = AsymptoticsOptions { per_axis: 3, t_samples: 5, mode: DerivMode::Auto };
    let mut lines = Vec::new();
    let mut ok = true;
    for ap in [-1.0, 1.0] {
        let r = scale_asymptotics(&g0, &form(0.0), &form(ap), &eps, &opts).map_err(|e| e.to_string())?;
        let want_sign = (0.0 - 2.0 * ap).signum();
        ok &= (r.exponent - 1.0).abs() < 0.05 && r.sign == want_sign;
        lines.push(format!("A₊={ap}I: exponent {:.4}, sign {:+}", r.exponent, r.sign));
    }
    ensure(ok, lines.join("; "))
}

fn c9_doubling() -> Check {
    let unit = |n: usize| json!({"lower": vec![0.0; n], "upper": vec![1.0; n]});
    let steps = [4e-3, 2e-3, 1e-3];
    let jumps = |g: &MetricField, face: f64| -> Vec<f64> {
        steps.iter().map(|&h| interface_jumps(g, 2, face, h, 5).first_difference_jump).collect()
    };
    let flat = metric("flat", json!({"n": 3, "chart": unit(3)}));
    let (fd, _) = double_across_face(&flat, 2, FaceSide::Upper).map_err(|e| e.to_string())?;
    let jf = jumps(&fd, 1.0);
    let geo = metric(
        "warped",
        json!({"base": {"family": "flat", "n": 2, "chart": unit(2)}, "profile": {"kind": "cosh", "rate": 2.0}, "t_range": [0.0, 1.0]}),
    );
    let (gd, _) = double_across_face(&geo, 2, FaceSide::Lower).map_err(|e| e.to_string())?;
    let jg = jumps(&gd, 0.0);
    let jg_text = jg.iter().map(|j| format!("{j:.3e}")).collect::<Vec<_>>().join(", ");
    let linear = jg.windows(2).all(|w| (w[0] / w[1] - 2.0).abs() < 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let bumpy = metric(
        "perturbed-flat",
        json!({"n": 3, "amplitude": rng.gen_range(0.05..0.1), "wavevector": [rng.gen_range(1.0..3.0), rng.gen_range(1.0..3.0)],
               "phase": rng.gen_range(0.0..PI), "chart": unit(3)}),
    );
    let (bd, _) = double_across_face(&bumpy, 2, FaceSide::Upper).map_err(|e| e.to_string())?;
    let jb = jumps(&bd, 1.0);
    let reference = jg[2];
    ensure(
        jf.iter().all(|&j| j == 0.0) && linear && jb[2] >= 10.0 * reference,
        format!("flat jumps {jf:?}; A≡0 jumps [{jg_text}]; seeded A≠0 finest {:.3e} vs {:.3e}", jb[2], reference),
    )
}

fn c10_gauss_bonnet() -> Check {
    let g = flat3(2.0);
    let mut worst: f64 = 0.0;
    for k in [3, 4, 6] {
        let base = Arc::new(BaseMesh::polygon(&BaseMesh::regular_polygon_vertices(k, 1.0, [0.0, 0.0], 0.2), 64).unwrap());
        let s = GraphSurface::constant(base, 0.3, [-1.0, 1.0]).unwrap();
        let interior = (k - 2) as f64 * PI / k as f64;
        let r = discrete_gauss_bonnet(&g, &s, Some(&vec![interior; k])).map_err(|e| e.to_string())?;
        worst = worst.max(r.residual.abs());
    }
    let radii: Vec<f64> = (1..=64).map(|i| (0.5 * PI * i as f64 / 64.0).sin()).collect();
    let base = Arc::new(BaseMesh::disk_with_radii([0.0, 0.0], &radii).unwrap());
    let prof = HeightProfile::SphereCap { center: [0.0, 0.0, 0.0], radius: 1.0, upper: true };
    let hemi = GraphSurface::from_profile(base, prof, [-2.0, 2.0], Coorientation::BelowIn).unwrap();
    let h = discrete_gauss_bonnet(&g, &hemi, None).map_err(|e| e.to_string())?.residual.abs();
    ensure(worst < 1e-3 * 2.0 * PI && h < 1e-3 * 2.0 * PI, format!("k-gons {worst:.2e}, hemisphere {h:.2e}"))
}

fn c11_eps_arithmetic() -> Check {
    let mut worst: f64 = 0.0;
    let mut valid = true;
    for (eps, la, lb, n) in [(2.0, 1.1, 1.3, 3), (5.0, 1.05, 1.2, 6), (0.9, 1.0, 1.4, 4), (3.0, 1.5, 1.5, 2)] {
        let a = eps_minimization_transfer(eps, la, n);
        let ab = eps_minimization_transfer(a.eps1, lb, n);
        let once = eps_minimization_transfer(eps, la * lb, n);
        worst = worst.max((ab.eps1 - once.eps1).abs() / eps);
        // ε₁ = ε − (n−2)·log λ
        worst = worst.max((a.eps1 - (eps - (n as f64 - 2.0) * f64::ln(la))).abs());
        valid &= (ab.valid && a.valid) == once.valid;
    }
    let t = eps_minimization_transfer(0.5, 0.2f64.exp(), 3);
    worst = worst.max((t.eps1 - 0.3).abs());
    ensure(worst <= 4.0 * f64::EPSILON && valid, format!("max deviation {worst:.1e}"))
}

fn c12_trap_margin() -> Check {
    let g = flat3(3.0);
    let cap = |r: f64| {
        let base = Arc::new(BaseMesh::disk([0.0, 0.0], 0.5 * r, 6).unwrap());
        let p = HeightProfile::SphereCap { center: [0.0; 3], radius: r, upper: true };
        GraphSurface::from_profile(base, p, [0.0, 2.0 * r], Coorientation::BelowIn).unwrap()
    };
    let mut zero: f64 = 0.0;
    for r in [0.5, 1.0, 1.7] {
        let phi = PhiSpec::Radial { center: [0.0; 3], coefficient: 2.0, power: 1.0 };
        zero = zero.max(trap_margin(&g, &cap(r), &phi, DerivMode::Auto).map_err(|e| e.to_string())?.margin.abs());
    }
    // φ = 1.5/|x|² on R = 1.2: margin 2c/R³ − 2/R² > 0
    let strict = trap_margin(&g, &cap(1.2), &PhiSpec::Radial { center: [0.0; 3], coefficient: 1.5, power: 2.0 }, DerivMode::Auto)
        .map_err(|e| e.to_string())?
        .margin;
    ensure(zero < 1e-6 && strict > 0.0, format!("sphere margin {zero:.2e}, strict margin {strict:.4}"))
}

fn files_of(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn c13_determinism() -> Check {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut compared = 0;
    for name in ["prism_flat_cube.json", "tube_flat_sphere.json", "glue_asymptotics.json", "sweep_perturbed_triangle.json"] {
        let runs: Vec<(tempfile::TempDir, BTreeMap<PathBuf, Vec<u8>>)> = [1, 4]
            .iter()
            .map(|jobs| {
                let dir = tempfile::TempDir::new().unwrap();
                let st = Command::new(env!("CARGO_BIN_EXE_cornerlab"))
                    .arg("--config")
                    .arg(configs.join(name))
                    .arg("--out")
                    .arg(dir.path())
                    .args(["--jobs", &jobs.to_string(), "--seed", "7"])
                    .output()
                    .unwrap();
                assert!(st.status.success(), "{name}: {}", String::from_utf8_lossy(&st.stderr));
                let f = files_of(dir.path());
                (dir, f)
            })
            .collect();
        if runs[0].1 != runs[1].1 {
            return Err(format!("{name}: outputs differ"));
        }
        compared += runs[0].1.len();
    }
    Ok(format!("{compared} files byte-identical across repeated runs"))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Check)> = vec![
        ("space-form scalar curvature", c1_space_forms),
        ("cone law", c2_cone_law),
        ("tube Riccati trajectories", c3_tube),
        ("Gauss-equation residual", c4_gauss_equation),
        ("bubble solver", c5_bubbles),
        ("prism equality cases", c6_equality_cases),
        ("prism property sweep", c7_property_sweep),
        ("inverse-eps asymptotics", c8_asymptotics),
        ("doubling and development", c9_doubling),
        ("discrete Gauss-Bonnet", c10_gauss_bonnet),
        ("eps-minimization arithmetic", c11_eps_arithmetic),
        ("trap margin", c12_trap_margin),
        ("CLI determinism", c13_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = clock.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("PASS {:>2} {name}: {d} [{secs:.1} s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
