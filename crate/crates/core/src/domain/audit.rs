use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scheme::{halton2, radical_inverse};
use super::{dihedral_from_sample, face_geometry_at, CorneredDomain};
use crate::curvature::DerivMode;
use crate::error::Result;
use crate::metric::MetricField;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct AuditOptions {
    /// Interior samples per face.
    pub face_samples: usize,
    /// Samples per edge.
    pub edge_samples: usize,
    /// Slack for the non-strict verdicts and margin for the strict ones.
    pub tolerance: f64,
    pub mode: DerivMode,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { face_samples: 64, edge_samples: 16, tolerance: 1e-8, mode: DerivMode::Auto }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FaceAudit {
    pub face: usize,
    pub name: String,
    pub inf_mean_curvature: f64,
    pub sup_mean_curvature: f64,
    /// Chart point attaining the infimum.
    pub at: [f64; 3],
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeAudit {
    pub faces: (usize, usize),
    pub sup_angle: f64,
    pub inf_angle: f64,
    /// Chart point attaining the supremum.
    pub at: [f64; 3],
    /// Declared reflection angle `π/k_ij`, if any.
    pub gamma_angle: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub faces: Vec<FaceAudit>,
    pub edges: Vec<EdgeAudit>,
    pub tolerance: f64,
    pub preconvex: bool,
    pub acute: bool,
    pub strictly_acute: bool,
    pub mean_convex: bool,
    pub strictly_mean_convex: bool,
}

impl AuditReport {
    /// Largest angle along edges that meet the top or bottom face.
    pub fn sup_horizontal_angle(&self, domain: &CorneredDomain) -> f64 {
        let k = domain.realization.side_count();
        self.edges.iter().filter(|e| e.faces.1 >= k).map(|e| e.sup_angle).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest mean curvature over the side faces.
    pub fn inf_side_mean_curvature(&self, domain: &CorneredDomain) -> f64 {
        let k = domain.realization.side_count();
        self.faces.iter().filter(|f| f.face < k).map(|f| f.inf_mean_curvature).fold(f64::INFINITY, f64::min)
    }

    /// Smallest mean curvature over the top and bottom.
    pub fn inf_horizontal_mean_curvature(&self, domain: &CorneredDomain) -> f64 {
        let k = domain.realization.side_count();
        self.faces.iter().filter(|f| f.face >= k).map(|f| f.inf_mean_curvature).fold(f64::INFINITY, f64::min)
    }
}

/// Face points: the first `count` Halton points of the face box that fall inside the face.
fn face_points(domain: &CorneredDomain, face: usize, count: usize) -> Result<Vec<[f64; 2]>> {
    let r = &domain.realization;
    let (lo, hi) = r.face_box(face)?;
    let mut out = Vec::with_capacity(count);
    let mut i = 1;
    for h in halton2(64 * count.max(1)) {
        if out.len() == count {
            break;
        }
        let ab = [lo[0] + h[0] * (hi[0] - lo[0]), lo[1] + h[1] * (hi[1] - lo[1])];
        if r.face_contains(face, ab) {
            out.push(ab);
        }
        i += 1;
    }
    let _ = i;
    Ok(out)
}

/// Sampled audit of face mean curvatures and dihedral angles.
pub fn audit(g: &MetricField, domain: &CorneredDomain, opts: &AuditOptions) -> Result<AuditReport> {
    let r = &domain.realization;
    let mut faces = Vec::new();
    for face in 0..r.face_count() {
        let pts = face_points(domain, face, opts.face_samples)?;
        let vals: Vec<Result<(f64, [f64; 3])>> = pts
            .par_iter()
            .map(|&ab| face_geometry_at(g, domain, face, ab, opts.mode).map(|geo| (geo.mean, geo.point)))
            .collect();
        let mut inf = (f64::INFINITY, [f64::NAN; 3]);
        let mut sup = f64::NEG_INFINITY;
        for v in vals {
            let (h, x) = v?;
            if h < inf.0 {
                inf = (h, x);
            }
            sup = sup.max(h);
        }
        faces.push(FaceAudit {
            face,
            name: domain.scheme.faces.get(face).cloned().unwrap_or_default(),
            inf_mean_curvature: inf.0,
            sup_mean_curvature: sup,
            at: inf.1,
            samples: pts.len(),
        });
    }
    let mut edges = Vec::new();
    for &(i, j) in &domain.scheme.adjacency {
        let (a, b) = (i.min(j), i.max(j));
        let params: Vec<f64> = (1..=opts.edge_samples as u64).map(|m| radical_inverse(m, 2)).collect();
        let vals: Vec<Result<(f64, [f64; 3])>> = params
            .par_iter()
            .map(|&s| {
                let e = r.edge_sample(a, b, s)?;
                Ok((dihedral_from_sample(g, &e)?, e.point))
            })
            .collect();
        let mut sup = (f64::NEG_INFINITY, [f64::NAN; 3]);
        let mut inf = f64::INFINITY;
        for v in vals {
            let (ang, x) = v?;
            if ang > sup.0 {
                sup = (ang, x);
            }
            inf = inf.min(ang);
        }
        edges.push(EdgeAudit { faces: (a, b), sup_angle: sup.0, inf_angle: inf, at: sup.1, gamma_angle: domain.scheme.gamma_angle(a, b) });
    }
    let tol = opts.tolerance;
    let max_angle = edges.iter().map(|e| e.sup_angle).fold(f64::NEG_INFINITY, f64::max);
    let min_h = faces.iter().map(|f| f.inf_mean_curvature).fold(f64::INFINITY, f64::min);
    Ok(AuditReport {
        preconvex: max_angle < PI - tol,
        acute: max_angle <= PI / 2.0 + tol,
        strictly_acute: max_angle < PI / 2.0 - tol,
        mean_convex: min_h >= -tol,
        strictly_mean_convex: min_h > tol,
        faces,
        edges,
        tolerance: tol,
    })
}
