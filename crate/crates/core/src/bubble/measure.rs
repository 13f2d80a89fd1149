use rayon::prelude::*;
use serde::Serialize;

use super::{BubbleProblem, PhiSpec, PsiSpec};
use crate::curvature::{curvature, DerivMode};
use crate::domain::CorneredDomain;
use crate::error::{Error, Result};
use crate::metric::MetricField;
use crate::surface::{GraphSurface, SurfacePoint};

/// Problem for the face replacing the top of a prism: `φ ≡ ε_i` and `ψ ≡ c_ij` on each
/// adjacent side `j`, so a solution has `H = ε_i` and `cos∠[Q_i ⋔ Q_j] = c_ij`.
/// Sides missing from `c` get `c_ij = 0`.
pub fn multibubble_measure(
    metric: MetricField,
    domain: CorneredDomain,
    face: usize,
    eps_i: f64,
    c: &[(usize, f64)],
    resolution: usize,
) -> Result<BubbleProblem> {
    let r = &domain.realization;
    if face != r.top() {
        return Err(Error::InvalidParameter(format!(
            "graph bubbles replace the top face ({}), not face {face}",
            r.top()
        )));
    }
    let k = r.side_count();
    let mut values = vec![0.0; k];
    for &(j, cij) in c {
        if !domain.scheme.adjacent(face, j) || j >= k {
            return Err(Error::InvalidParameter(format!("face {j} is not a side adjacent to face {face}")));
        }
        if !(cij.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!("c_{face}{j} = {cij} must satisfy |c| < 1")));
        }
        values[j] = cij;
    }
    BubbleProblem::new(metric, domain, PhiSpec::Constant { value: eps_i }, PsiSpec::PerSide { values }, resolution)
}

#[derive(Clone, Debug, Serialize)]
pub struct TrapReport {
    /// `inf (dφ/dν_in − (λ₁² + λ₂²) − |Ric(ν,ν)|)` over the samples.
    pub margin: f64,
    pub at: [f64; 3],
    pub samples: usize,
}

/// Pointwise trap criterion over the interior vertices of `y` (those off the boundary).
pub fn trap_margin(g: &MetricField, y: &GraphSurface, phi: &PhiSpec, mode: DerivMode) -> Result<TrapReport> {
    let base = &y.base;
    let verts: Vec<usize> = (0..base.vertices.len()).filter(|&v| !base.is_boundary(v)).collect();
    let vals: Vec<Result<(f64, [f64; 3])>> = verts
        .par_iter()
        .map(|&v| {
            let geo = y.geometry(g, SurfacePoint::Vertex(v), mode)?;
            let nu = geo.normal;
            let grad = phi.gradient(geo.point);
            let dphi_in = -(grad[0] * nu[0] + grad[1] * nu[1] + grad[2] * nu[2]);
            let ric = curvature(g, &geo.point, mode)?.ricci_quad(&nu);
            Ok((dphi_in - geo.norm_sq() - ric.abs(), geo.point))
        })
        .collect();
    let mut best = (f64::INFINITY, [f64::NAN; 3]);
    for r in vals {
        let (m, x) = r?;
        if m < best.0 {
            best = (m, x);
        }
    }
    if verts.is_empty() {
        return Err(Error::Degenerate("surface has no interior vertices".into()));
    }
    Ok(TrapReport { margin: best.0, at: best.1, samples: verts.len() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpsTransfer {
    /// `ε₁ = ε − (n−2)·log λ`.
    pub eps1: f64,
    /// `λ ≥ 1` and `λ^{n−2} ≤ e^ε`.
    pub valid: bool,
}

/// ε-minimization under a `λ`-bi-Lipschitz change of metric.
pub fn eps_minimization_transfer(eps: f64, lambda: f64, n: usize) -> EpsTransfer {
    let m = n as f64 - 2.0;
    let eps1 = eps - m * lambda.ln();
    let valid = lambda >= 1.0 && n >= 2 && m * lambda.ln() <= eps;
    EpsTransfer { eps1, valid: valid && eps1 >= 0.0 }
}

/// `v' ≤ e^{−ε} v`: the volume pair witnesses an ε-minimization.
pub fn is_eps_minimization(v: f64, v_prime: f64, eps: f64) -> bool {
    v_prime <= (-eps).exp() * v
}
