//! Intrinsic discrete Gauss–Bonnet on the induced metric of a graph mesh.

use std::f64::consts::PI;

use serde::Serialize;

use super::graph::GraphSurface;
use super::integrals::GAUSS3;
use crate::error::{Error, Result};
use crate::metric::MetricField;

/// Induced length of the chart segment `a → b` (3-point Gauss).
pub fn chord_length(g: &MetricField, a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    GAUSS3
        .iter()
        .map(|&(xi, w)| {
            let s = 0.5 * (1.0 + xi);
            let x = [a[0] + s * d[0], a[1] + s * d[1], a[2] + s * d[2]];
            0.5 * w * g.eval(&x).quad(&d, &d).sqrt()
        })
        .sum()
}

/// Interior angles of every triangle from induced edge lengths.
pub fn triangle_angles(g: &MetricField, s: &GraphSurface) -> Vec<[f64; 3]> {
    s.base
        .triangles
        .iter()
        .map(|t| {
            let p = t.map(|i| s.vertex_point(i));
            // l[k] is the length opposite vertex k
            let l = [chord_length(g, &p[1], &p[2]), chord_length(g, &p[2], &p[0]), chord_length(g, &p[0], &p[1])];
            let ang = |k: usize| {
                let (a, b, c) = (l[k], l[(k + 1) % 3], l[(k + 2) % 3]);
                ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0).acos()
            };
            [ang(0), ang(1), ang(2)]
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussBonnetReport {
    /// `Σ` angle defects at interior vertices.
    pub integral_gauss: f64,
    /// `Σ` turning angles `π − θ_v` at non-corner boundary vertices.
    pub integral_geodesic: f64,
    /// Induced-metric angles of the surface at its corner vertices.
    pub measured_corner_angles: Vec<f64>,
    /// `Σ (π − α_i)` over the corner angles used.
    pub corner_sum: f64,
    pub euler_characteristic: i64,
    pub residual: f64,
    /// Angle defect divided by the vertex area share (zero on the boundary).
    pub pointwise_gauss: Vec<f64>,
}

/// `∫K + ∫k_g + Σ(π − α_i) − 2πχ`. With `corner_angles = None` the measured induced
/// angles are used and the identity holds to rounding.
pub fn discrete_gauss_bonnet(g: &MetricField, s: &GraphSurface, corner_angles: Option<&[f64]>) -> Result<GaussBonnetReport> {
    let base = &s.base;
    let nv = base.vertices.len();
    let angles = triangle_angles(g, s);
    let mut theta = vec![0.0; nv];
    for (t, a) in base.triangles.iter().zip(&angles) {
        for k in 0..3 {
            theta[t[k]] += a[k];
        }
    }
    let areas = super::integrals::vertex_areas(g, s);
    let is_corner: Vec<bool> = {
        let mut c = vec![false; nv];
        for &v in &base.corners {
            c[v] = true;
        }
        c
    };
    let mut int_k = 0.0;
    let mut int_kg = 0.0;
    let mut pointwise = vec![0.0; nv];
    for v in 0..nv {
        if !base.is_boundary(v) {
            let d = 2.0 * PI - theta[v];
            int_k += d;
            pointwise[v] = d / areas[v];
        } else if !is_corner[v] {
            int_kg += PI - theta[v];
        }
    }
    let measured: Vec<f64> = base.corners.iter().map(|&v| theta[v]).collect();
    let used = match corner_angles {
        Some(a) if a.len() != measured.len() => {
            return Err(Error::InvalidParameter(format!(
                "{} corner angles given for {} corners",
                a.len(),
                measured.len()
            )))
        }
        Some(a) => a.to_vec(),
        None => measured.clone(),
    };
    let corner_sum: f64 = used.iter().map(|a| PI - a).sum();
    let chi = base.euler_characteristic();
    let residual = int_k + int_kg + corner_sum - 2.0 * PI * chi as f64;
    Ok(GaussBonnetReport {
        integral_gauss: int_k,
        integral_geodesic: int_kg,
        measured_corner_angles: measured,
        corner_sum,
        euler_characteristic: chi,
        residual,
        pointwise_gauss: pointwise,
    })
}
