use serde::Serialize;

use crate::curvature::{scalar_curvature, DerivMode};
use crate::domain::CorneredDomain;
use crate::error::{Error, Result};
use crate::metric::MetricField;
use crate::surface::{surface_integral, GraphSurface};

#[derive(Clone, Debug, Serialize)]
pub struct SemiIntegralReport {
    /// `∫_Y scal dA` per surface.
    pub integrals: Vec<f64>,
    pub min: f64,
    pub argmin: usize,
    pub bound: f64,
    /// `min ≥ bound`.
    pub holds: bool,
}

/// Minimum of `∫_Y scal dA` over a sample of separating surfaces of `P`, against `bound`.
pub fn semi_integral_check(
    g: &MetricField,
    p: &CorneredDomain,
    surfaces: &[GraphSurface],
    bound: f64,
    mode: DerivMode,
) -> Result<SemiIntegralReport> {
    if surfaces.is_empty() {
        return Err(Error::InvalidParameter("no surfaces to check".into()));
    }
    let [t0, t1] = p.realization.t_range();
    let mut integrals = Vec::with_capacity(surfaces.len());
    for (i, y) in surfaces.iter().enumerate() {
        if y.heights.iter().any(|&u| u < t0 || u > t1) {
            return Err(Error::InvalidParameter(format!("surface {i} leaves the prism's t-range")));
        }
        let bad = std::sync::Mutex::new(None);
        let v = surface_integral(g, y, &|x| match scalar_curvature(g, &x, mode) {
            Ok(s) => s,
            Err(e) => {
                bad.lock().unwrap().get_or_insert(e);
                f64::NAN
            }
        });
        if let Some(e) = bad.into_inner().unwrap() {
            return Err(e);
        }
        integrals.push(v);
    }
    let (argmin, min) = integrals
        .iter()
        .cloned()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    Ok(SemiIntegralReport { holds: min >= bound, integrals, min, argmin, bound })
}
