//! Pointwise extrinsic and intrinsic geometry of a graph in a 3-dimensional chart.

use nalgebra::DMatrix;
use serde::Serialize;

use super::height::{HeightJet, LocalHeight};
use crate::curvature::{christoffel, curvature, curvature_from_derivs, fd_derivs, DerivMode, DEFAULT_STEP};
use crate::error::{Error, Result};
use crate::linalg::{generalized_symmetric_eigenvalues, SMat};
use crate::metric::MetricField;

/// First and second fundamental forms at one surface point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LocalGeometry {
    pub point: [f64; 3],
    pub tangents: [[f64; 3]; 2],
    /// Unit g-normal pointing out of the in-region.
    pub normal: [f64; 3],
    pub induced: [[f64; 2]; 2],
    /// `A(X_a, X_b) = −g(ν, ∇_{X_a} X_b)`.
    pub second: [[f64; 2]; 2],
    pub mean: f64,
    /// Principal curvatures, ascending.
    pub principal: [f64; 2],
}

impl LocalGeometry {
    /// `λ₁² + λ₂²`.
    pub fn norm_sq(&self) -> f64 {
        self.principal[0].powi(2) + self.principal[1].powi(2)
    }
}

/// Graph embedding data `(X, X_a, X_ab)` of `(x, y) ↦ (x, y, u)`.
pub fn graph_embedding(p: [f64; 2], j: &HeightJet) -> ([f64; 3], [[f64; 3]; 2], [[[f64; 3]; 2]; 2]) {
    let x = [p[0], p[1], j.u];
    let xa = [[1.0, 0.0, j.du[0]], [0.0, 1.0, j.du[1]]];
    let mut xab = [[[0.0; 3]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            xab[a][b][2] = j.ddu[a][b];
        }
    }
    (x, xa, xab)
}

/// Unit g-normal vector of the plane spanned by `xa`, oriented along `X₁ × X₂` when `sign > 0`.
pub fn unit_normal(gm: &SMat<f64>, xa: &[[f64; 3]; 2], sign: f64) -> Result<[f64; 3]> {
    let c = crate::linalg::cross3(&xa[0], &xa[1]);
    let ginv = gm.inverse().ok_or(Error::SingularMetric { point: vec![] })?;
    let v = ginv.mul_vec(&c);
    let norm2 = c[0] * v[0] + c[1] * v[1] + c[2] * v[2];
    if !(norm2 > 0.0) || !norm2.is_finite() {
        return Err(Error::Degenerate("tangent plane has no normal".into()));
    }
    let s = sign / norm2.sqrt();
    Ok([v[0] * s, v[1] * s, v[2] * s])
}

pub fn induced_from(gm: &SMat<f64>, xa: &[[f64; 3]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            out[a][b] = gm.quad(&xa[a], &xa[b]);
        }
    }
    out
}

/// Fundamental forms from an embedding jet; `sign = +1` keeps `X₁ × X₂` as the outward side.
pub fn local_geometry(
    g: &MetricField,
    x: [f64; 3],
    xa: [[f64; 3]; 2],
    xab: [[[f64; 3]; 2]; 2],
    sign: f64,
    mode: DerivMode,
) -> Result<LocalGeometry> {
    if g.dim() != 3 {
        return Err(Error::InvalidParameter("surface geometry needs a 3-dimensional metric".into()));
    }
    let gm = g.eval(&x);
    let induced = induced_from(&gm, &xa);
    let det = induced[0][0] * induced[1][1] - induced[0][1] * induced[1][0];
    if !(det > 0.0) {
        return Err(Error::Degenerate(format!("induced metric is degenerate at {x:?}")));
    }
    let normal = unit_normal(&gm, &xa, sign).map_err(|_| Error::Degenerate(format!("no normal at {x:?}")))?;
    let gam = christoffel(g, &x, mode)?;
    let gn = gm.mul_vec(&normal);
    let mut second = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut s = 0.0;
            for k in 0..3 {
                let mut nab = xab[a][b][k];
                for i in 0..3 {
                    for j in 0..3 {
                        nab += gam[k][i][j] * xa[a][i] * xa[b][j];
                    }
                }
                s -= gn[k] * nab;
            }
            second[a][b] = s;
        }
    }
    let sym = 0.5 * (second[0][1] + second[1][0]);
    second[0][1] = sym;
    second[1][0] = sym;
    let inv = [[induced[1][1] / det, -induced[0][1] / det], [-induced[1][0] / det, induced[0][0] / det]];
    let mean = (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| inv[a][b] * second[b][a]).sum();
    let am = DMatrix::from_fn(2, 2, |i, j| second[i][j]);
    let gmat = DMatrix::from_fn(2, 2, |i, j| induced[i][j]);
    let ev = generalized_symmetric_eigenvalues(&am, &gmat)
        .ok_or_else(|| Error::Degenerate("principal curvature eigensolve failed".into()))?;
    Ok(LocalGeometry { point: x, tangents: xa, normal, induced, second, mean, principal: [ev[0], ev[1]] })
}

/// Local geometry of a graph sheet at base point `p`.
pub fn graph_geometry(g: &MetricField, model: &LocalHeight, p: [f64; 2], sign: f64, mode: DerivMode) -> Result<LocalGeometry> {
    let (x, xa, xab) = graph_embedding(p, &model.jet(p));
    local_geometry(g, x, xa, xab, sign, mode)
}

/// Induced metric of the graph sheet at base point `q`.
pub fn graph_induced(g: &MetricField, model: &LocalHeight, q: [f64; 2]) -> SMat<f64> {
    let (x, xa, _) = graph_embedding(q, &model.jet(q));
    let m = induced_from(&g.eval(&x), &xa);
    SMat::from_fn(2, |a, b| m[a][b])
}

/// Intrinsic Gauss curvature `K = scal/2` of the induced metric, by 4th-order differences of step `h`.
pub fn intrinsic_gauss_curvature(g: &MetricField, model: &LocalHeight, p: [f64; 2], h: f64) -> Result<f64> {
    let d = fd_derivs(|q: &[f64]| graph_induced(g, model, [q[0], q[1]]), &p, h);
    Ok(0.5 * curvature_from_derivs(&d, &p)?.scalar)
}

/// Terms of the traced Gauss equation at a surface point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GaussTerms {
    pub ricci_normal: f64,
    pub scalar: f64,
    pub principal: [f64; 2],
    pub mean: f64,
    pub intrinsic: f64,
    /// `Ric(ν,ν) + |A|² − [½(scal + |A|² + H²) − K]`.
    pub residual: f64,
}

/// Traced Gauss equation at base point `p`; `mode` governs the ambient derivatives and the
/// finite-difference step of the intrinsic curvature (default step when exact).
pub fn gauss_terms(g: &MetricField, model: &LocalHeight, p: [f64; 2], sign: f64, mode: DerivMode) -> Result<GaussTerms> {
    let geo = graph_geometry(g, model, p, sign, mode)?;
    let cs = curvature(g, &geo.point, mode)?;
    let h = match mode {
        DerivMode::FiniteDifference { h } => h,
        _ => DEFAULT_STEP,
    };
    let k = intrinsic_gauss_curvature(g, model, p, h)?;
    let ric = cs.ricci_quad(&geo.normal);
    let a2 = geo.norm_sq();
    let residual = ric + a2 - (0.5 * (cs.scalar + a2 + geo.mean * geo.mean) - k);
    Ok(GaussTerms { ricci_normal: ric, scalar: cs.scalar, principal: geo.principal, mean: geo.mean, intrinsic: k, residual })
}
