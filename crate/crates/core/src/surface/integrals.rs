//! Quadrature of areas, surface integrals and subgraph measures, with height gradients.

use rayon::prelude::*;

use super::graph::GraphSurface;
use super::mesh::BaseMesh;
use crate::linalg::SMat;
use crate::metric::MetricField;
use crate::num::{Dual, Num};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
    (0.0, 0.888_888_888_888_888_9),
    (0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
];
pub const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// Metric and its `t`-derivative (last coordinate) at a 3-dimensional chart point.
pub fn metric_with_t_derivative(g: &MetricField, x: &[f64; 3]) -> (SMat<f64>, SMat<f64>) {
    if let Some(d) = g.first(x) {
        return (SMat::from_fn(3, |i, j| d.a[i][j].v), SMat::from_fn(3, |i, j| d.a[i][j].d[2]));
    }
    let h = 1e-6 * (1.0 + x[2].abs());
    let gp = g.eval(&[x[0], x[1], x[2] + h]);
    let gm = g.eval(&[x[0], x[1], x[2] - h]);
    (g.eval(x), SMat::from_fn(3, |i, j| (gp.a[i][j] - gm.a[i][j]) / (2.0 * h)))
}

/// Metric as a dual number in the `t` direction, variable index `k`, weighted by `w`.
fn lift(gm: &SMat<f64>, gt: &SMat<f64>, weights: &[(usize, f64)]) -> [[Dual; 3]; 3] {
    let mut out = [[Dual::cst(0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut d = Dual::cst(gm.a[i][j]);
            for &(k, w) in weights {
                d.d[k] += w * gt.a[i][j];
            }
            out[i][j] = d;
        }
    }
    out
}

/// Precomputed per-triangle base data.
#[derive(Clone, Copy, Debug)]
pub struct TriangleGeom {
    pub idx: [usize; 3],
    pub p: [[f64; 2]; 3],
    pub base_area: f64,
    /// Gradients of the barycentric hat functions.
    pub hat_grad: [[f64; 2]; 3],
}

pub fn triangle_geoms(base: &BaseMesh) -> Vec<TriangleGeom> {
    base.triangles
        .iter()
        .map(|&idx| {
            let p = idx.map(|i| base.vertices[i]);
            let a2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
            let mut hat_grad = [[0.0; 2]; 3];
            for k in 0..3 {
                let (b, c) = (p[(k + 1) % 3], p[(k + 2) % 3]);
                hat_grad[k] = [(b[1] - c[1]) / a2, (c[0] - b[0]) / a2];
            }
            TriangleGeom { idx, p, base_area: 0.5 * a2, hat_grad }
        })
        .collect()
}

/// Edge-midpoint quadrature nodes: `(vertex pair, base point)`.
fn midpoints(t: &TriangleGeom) -> [((usize, usize), [f64; 2]); 3] {
    let m = |a: usize, b: usize| ((a, b), [0.5 * (t.p[a][0] + t.p[b][0]), 0.5 * (t.p[a][1] + t.p[b][1])]);
    [m(0, 1), m(1, 2), m(2, 0)]
}

/// Induced area of one graph triangle and its derivative in the three vertex heights.
pub fn triangle_area_grad(g: &MetricField, t: &TriangleGeom, u: [f64; 3]) -> (f64, [f64; 3]) {
    let uv: [Dual; 3] = [Dual::var(u[0], 0), Dual::var(u[1], 1), Dual::var(u[2], 2)];
    let mut ux = Dual::cst(0.0);
    let mut uy = Dual::cst(0.0);
    for k in 0..3 {
        ux += uv[k] * t.hat_grad[k][0];
        uy += uv[k] * t.hat_grad[k][1];
    }
    let mut total = Dual::cst(0.0);
    for ((a, b), q) in midpoints(t) {
        let (gm, gt) = metric_with_t_derivative(g, &[q[0], q[1], 0.5 * (u[a] + u[b])]);
        let m = lift(&gm, &gt, &[(a, 0.5), (b, 0.5)]);
        let g11 = m[0][0] + m[0][2] * ux * 2.0 + m[2][2] * ux * ux;
        let g22 = m[1][1] + m[1][2] * uy * 2.0 + m[2][2] * uy * uy;
        let g12 = m[0][1] + m[0][2] * uy + m[1][2] * ux + m[2][2] * ux * uy;
        total += (g11 * g22 - g12 * g12).sqrt();
    }
    let s = t.base_area / 3.0;
    (total.v * s, [total.d[0] * s, total.d[1] * s, total.d[2] * s])
}

/// `∫_a^u f(t) dt` (4-point Gauss) and its derivative in `u`; `f` returns `(f, ∂_t f)`.
pub fn column_integral(f: &dyn Fn(f64) -> (f64, f64), a: f64, u: f64) -> (f64, f64) {
    let half = 0.5 * (u - a);
    let (mut val, mut dval) = (0.0, 0.0);
    for (xi, w) in GAUSS4 {
        let s = 0.5 * (1.0 + xi);
        let (fv, ft) = f(a + (u - a) * s);
        val += w * fv;
        dval += w * (0.5 * fv + half * ft * s);
    }
    (half * val, dval)
}

/// Density `φ·√det g` along a vertical column, with its `t`-derivative.
pub fn volume_density<'a>(
    g: &'a MetricField,
    phi: &'a (dyn Fn([f64; 3]) -> (f64, f64) + Sync),
    p: [f64; 2],
) -> impl Fn(f64) -> (f64, f64) + 'a {
    move |t: f64| {
        let x = [p[0], p[1], t];
        let (gm, gt) = metric_with_t_derivative(g, &x);
        let m = lift(&gm, &gt, &[(0, 1.0)]);
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        let sd = det.sqrt();
        let (f, ft) = phi(x);
        (f * sd.v, ft * sd.v + f * sd.d[0])
    }
}

/// Column terms of one triangle: `Σ_q (A/3)·∫_a^{u_q} density`, with height derivatives.
pub fn triangle_column_grad(
    g: &MetricField,
    t: &TriangleGeom,
    u: [f64; 3],
    anchor: f64,
    phi: &(dyn Fn([f64; 3]) -> (f64, f64) + Sync),
) -> (f64, [f64; 3]) {
    let s = t.base_area / 3.0;
    let mut val = 0.0;
    let mut grad = [0.0; 3];
    for ((a, b), q) in midpoints(t) {
        let f = volume_density(g, phi, q);
        let (v, dv) = column_integral(&f, anchor, 0.5 * (u[a] + u[b]));
        val += s * v;
        grad[a] += 0.5 * s * dv;
        grad[b] += 0.5 * s * dv;
    }
    (val, grad)
}

/// Wall term over the boundary edge `pa → pb`: `∫_0^1 ∫_a^{u(λ)} ψ dA_wall`, 3-point Gauss in λ.
pub fn wall_term_grad(
    g: &MetricField,
    pa: [f64; 2],
    pb: [f64; 2],
    u: [f64; 2],
    anchor: f64,
    psi: &(dyn Fn([f64; 3]) -> (f64, f64) + Sync),
) -> (f64, [f64; 2]) {
    let e = [pb[0] - pa[0], pb[1] - pa[1], 0.0];
    let mut val = 0.0;
    let mut grad = [0.0; 2];
    for (xi, w) in GAUSS3 {
        let lam = 0.5 * (1.0 + xi);
        let p = [pa[0] + lam * e[0], pa[1] + lam * e[1]];
        let f = |t: f64| {
            let x = [p[0], p[1], t];
            let (gm, gt) = metric_with_t_derivative(g, &x);
            let m = lift(&gm, &gt, &[(0, 1.0)]);
            let mut gee = Dual::cst(0.0);
            let mut get = Dual::cst(0.0);
            for i in 0..2 {
                get += m[i][2] * e[i];
                for j in 0..2 {
                    gee += m[i][j] * (e[i] * e[j]);
                }
            }
            let wdens = (gee * m[2][2] - get * get).sqrt();
            let (ps, pst) = psi(x);
            (ps * wdens.v, pst * wdens.v + ps * wdens.d[0])
        };
        let (v, dv) = column_integral(&f, anchor, (1.0 - lam) * u[0] + lam * u[1]);
        val += 0.5 * w * v;
        grad[0] += 0.5 * w * dv * (1.0 - lam);
        grad[1] += 0.5 * w * dv * lam;
    }
    (val, grad)
}

fn heights3(s: &GraphSurface, t: &TriangleGeom) -> [f64; 3] {
    t.idx.map(|i| s.heights[i])
}

/// Induced area (edge-midpoint rule per triangle, fixed summation order).
pub fn surface_area(g: &MetricField, s: &GraphSurface) -> f64 {
    let tg = triangle_geoms(&s.base);
    let parts: Vec<f64> = tg.par_iter().map(|t| triangle_area_grad(g, t, heights3(s, t)).0).collect();
    parts.iter().sum()
}

/// `∫_Y f dA` with `f` evaluated at the quadrature nodes (chart points on the graph).
pub fn surface_integral(g: &MetricField, s: &GraphSurface, f: &(dyn Fn([f64; 3]) -> f64 + Sync)) -> f64 {
    let tg = triangle_geoms(&s.base);
    let parts: Vec<f64> = tg
        .par_iter()
        .map(|t| {
            let u = heights3(s, t);
            let mut acc = 0.0;
            for ((a, b), q) in midpoints(t) {
                let x = [q[0], q[1], 0.5 * (u[a] + u[b])];
                let gm = g.eval(&x);
                let ux = (0..3).map(|k| u[k] * t.hat_grad[k][0]).sum::<f64>();
                let uy = (0..3).map(|k| u[k] * t.hat_grad[k][1]).sum::<f64>();
                let xa = [[1.0, 0.0, ux], [0.0, 1.0, uy]];
                let m = super::local::induced_from(&gm, &xa);
                acc += (m[0][0] * m[1][1] - m[0][1] * m[1][0]).sqrt() * f(x);
            }
            acc * t.base_area / 3.0
        })
        .collect();
    parts.iter().sum()
}

/// `g`-volume of `{t_range.lo ≤ t < u(x)}` over the base.
pub fn subgraph_volume(g: &MetricField, s: &GraphSurface) -> f64 {
    subgraph_measure(g, s, s.t_range[0], &|_| (1.0, 0.0))
}

/// `∫ φ dvol` over `{anchor ≤ t < u(x)}` (negative where `u < anchor`).
pub fn subgraph_measure(
    g: &MetricField,
    s: &GraphSurface,
    anchor: f64,
    phi: &(dyn Fn([f64; 3]) -> (f64, f64) + Sync),
) -> f64 {
    let tg = triangle_geoms(&s.base);
    let parts: Vec<f64> = tg.par_iter().map(|t| triangle_column_grad(g, t, heights3(s, t), anchor, phi).0).collect();
    parts.iter().sum()
}

/// Per-vertex share of the induced area (one third of each incident triangle).
pub fn vertex_areas(g: &MetricField, s: &GraphSurface) -> Vec<f64> {
    let tg = triangle_geoms(&s.base);
    let parts: Vec<f64> = tg.par_iter().map(|t| triangle_area_grad(g, t, heights3(s, t)).0).collect();
    let mut out = vec![0.0; s.heights.len()];
    for (t, a) in tg.iter().zip(parts) {
        for &i in &t.idx {
            out[i] += a / 3.0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::build_builtin;
    use crate::surface::{BaseMesh, Coorientation, HeightProfile};
    use serde_json::json;
    use std::sync::Arc;

    #[test]
    fn area_gradient_matches_differences() {
        let g = build_builtin("space-form", &json!({"n": 3, "curvature": 1.0})).unwrap();
        let base = BaseMesh::rectangle([-0.2, -0.2], [0.2, 0.2], 2, 2).unwrap();
        let tg = triangle_geoms(&base);
        let u = [0.1, -0.05, 0.2];
        let (_, grad) = triangle_area_grad(&g, &tg[3], u);
        for k in 0..3 {
            let h = 1e-6;
            let mut up = u;
            let mut um = u;
            up[k] += h;
            um[k] -= h;
            let fd = (triangle_area_grad(&g, &tg[3], up).0 - triangle_area_grad(&g, &tg[3], um).0) / (2.0 * h);
            assert!((fd - grad[k]).abs() < 1e-8, "{k}: {fd} vs {}", grad[k]);
        }
    }

    #[test]
    fn plane_area_and_volume() {
        let g = build_builtin("flat", &json!({"n": 3, "chart": {"lower": [0.0, 0.0, -1.0], "upper": [1.0, 1.0, 2.0]}}))
            .unwrap();
        let base = Arc::new(BaseMesh::rectangle([0.0, 0.0], [1.0, 1.0], 8, 8).unwrap());
        let th: f64 = 0.4;
        let s = GraphSurface::from_profile(
            base,
            HeightProfile::Plane { offset: 0.0, slope: [th.tan(), 0.0] },
            [-1.0, 2.0],
            Coorientation::BelowIn,
        )
        .unwrap();
        assert!((surface_area(&g, &s) - 1.0 / th.cos()).abs() < 1e-13);
        let v = subgraph_measure(&g, &s, 0.0, &|_| (1.0, 0.0));
        assert!((v - 0.5 * th.tan()).abs() < 1e-14);
    }
}
