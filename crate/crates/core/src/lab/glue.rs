use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{scalar_curvature, DerivMode};
use crate::domain::{face_geometry_at, halton2, CorneredDomain};
use crate::error::{Error, Result};
use crate::metric::{concatenate, mollify, ChartBox, MetricField};

/// One side of a gluing: a metric, its domain and the face being identified.
#[derive(Clone, Debug)]
pub struct GlueFace {
    pub metric: MetricField,
    pub domain: CorneredDomain,
    pub face: usize,
}

/// Concatenate along `x_axis = at` and mollify at scale `sigma`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Regularization {
    pub axis: usize,
    pub at: f64,
    pub sigma: f64,
    /// Samples per axis for `inf scal` of the regularized glue.
    pub per_axis: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct GlueOptions {
    pub samples: usize,
    /// Largest allowed induced-metric mismatch at matched points.
    pub isometry_tolerance: f64,
    pub tolerance: f64,
    pub mode: DerivMode,
    pub regularize: Option<Regularization>,
}

impl Default for GlueOptions {
    fn default() -> Self {
        GlueOptions { samples: 32, isometry_tolerance: 1e-6, tolerance: 1e-8, mode: DerivMode::Auto, regularize: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GluePoint {
    pub ab: [f64; 2],
    pub x1: [f64; 3],
    pub x2: [f64; 3],
    pub h1: f64,
    pub h2: f64,
    pub sum: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GluingReport {
    pub points: Vec<GluePoint>,
    pub inf_sum: f64,
    pub metric_mismatch: f64,
    pub tolerance: f64,
    /// `H₁ + H₂ ≥ −tol` everywhere sampled.
    pub holds: bool,
    /// `H₁ + H₂ > tol` everywhere sampled.
    pub strict: bool,
    pub regularized_inf_scal: Option<f64>,
}

/// Mean-curvature sums across two faces identified by equal face coordinates.
pub fn gluing_condition(a: &GlueFace, b: &GlueFace, opts: &GlueOptions) -> Result<GluingReport> {
    let (ra, rb) = (&a.domain.realization, &b.domain.realization);
    let (lo, hi) = ra.face_box(a.face)?;
    let (lo2, hi2) = rb.face_box(b.face)?;
    let scale = (hi[0] - lo[0]).abs().max((hi[1] - lo[1]).abs());
    if (0..2).any(|k| (lo[k] - lo2[k]).abs() > 1e-12 * scale || (hi[k] - hi2[k]).abs() > 1e-12 * scale) {
        return Err(Error::InvalidParameter(format!(
            "face parameter boxes differ: {lo:?}..{hi:?} vs {lo2:?}..{hi2:?}"
        )));
    }
    let params: Vec<[f64; 2]> = halton2(4 * opts.samples + 16)
        .into_iter()
        .map(|h| [lo[0] + h[0] * (hi[0] - lo[0]), lo[1] + h[1] * (hi[1] - lo[1])])
        .filter(|&ab| ra.face_contains(a.face, ab) && rb.face_contains(b.face, ab))
        .take(opts.samples)
        .collect();
    if params.is_empty() {
        return Err(Error::Degenerate("no common sample points on the identified faces".into()));
    }
    let rows: Vec<Result<(GluePoint, f64)>> = params
        .par_iter()
        .map(|&ab| {
            let ga = face_geometry_at(&a.metric, &a.domain, a.face, ab, opts.mode)?;
            let gb = face_geometry_at(&b.metric, &b.domain, b.face, ab, opts.mode)?;
            let mut mismatch: f64 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    mismatch = mismatch.max((ga.induced[i][j] - gb.induced[i][j]).abs());
                }
            }
            let p = GluePoint { ab, x1: ga.point, x2: gb.point, h1: ga.mean, h2: gb.mean, sum: ga.mean + gb.mean };
            Ok((p, mismatch))
        })
        .collect();
    let mut points = Vec::with_capacity(rows.len());
    let mut metric_mismatch: f64 = 0.0;
    for r in rows {
        let (p, m) = r?;
        metric_mismatch = metric_mismatch.max(m);
        points.push(p);
    }
    if metric_mismatch > opts.isometry_tolerance {
        return Err(Error::InvalidParameter(format!(
            "identified faces are not isometric: induced metrics differ by {metric_mismatch:e}"
        )));
    }
    let inf_sum = points.iter().map(|p| p.sum).fold(f64::INFINITY, f64::min);
    let regularized_inf_scal = match opts.regularize {
        None => None,
        Some(reg) => {
            let glued = concatenate(&a.metric, &b.metric, reg.axis, reg.at)?;
            let smooth = mollify(&glued, reg.sigma)?;
            let vals: Vec<Result<f64>> = interior_grid(smooth.chart(), reg.per_axis)
                .par_iter()
                .map(|x| scalar_curvature(&smooth, x, DerivMode::Auto))
                .collect();
            let mut m = f64::INFINITY;
            for v in vals {
                m = m.min(v?);
            }
            Some(m)
        }
    };
    Ok(GluingReport {
        points,
        inf_sum,
        metric_mismatch,
        tolerance: opts.tolerance,
        holds: inf_sum >= -opts.tolerance,
        strict: inf_sum > opts.tolerance,
        regularized_inf_scal,
    })
}

/// `per_axis` points per axis strictly inside the chart.
fn interior_grid(c: &ChartBox, per_axis: usize) -> Vec<Vec<f64>> {
    let n = c.dim();
    let m = per_axis.max(1);
    (0..m.pow(n as u32))
        .map(|mut idx| {
            (0..n)
                .map(|k| {
                    let i = idx % m;
                    idx /= m;
                    c.lower[k] + c.width(k) * (i + 1) as f64 / (m + 1) as f64
                })
                .collect()
        })
        .collect()
}
