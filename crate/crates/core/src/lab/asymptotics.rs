use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{scalar_curvature, DerivMode};
use crate::error::{Error, Result};
use crate::metric::{interpolation_family, MetricField, QuadraticFormField};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct AsymptoticsOptions {
    /// Samples per axis of the face chart.
    pub per_axis: usize,
    /// Samples of `t ∈ [0, ε]`, endpoints included.
    pub t_samples: usize,
    pub mode: DerivMode,
}

impl Default for AsymptoticsOptions {
    fn default() -> Self {
        AsymptoticsOptions { per_axis: 5, t_samples: 5, mode: DerivMode::Auto }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticsReport {
    pub eps: Vec<f64>,
    pub min_scal: Vec<f64>,
    pub at: Vec<Vec<f64>>,
    /// Slope of `ln|min scal|` against `ln(1/ε)`.
    pub exponent: f64,
    /// `c` in `min scal ≈ c·ε^{−exponent}`.
    pub constant: f64,
    /// Sign of `min scal` at the smallest `ε`.
    pub sign: f64,
    /// Sign of `tr_{g0}(A0 − A₊)` over the face samples; NaN when it changes sign.
    pub trace_sign: f64,
    /// A one-signed, nonzero trace difference: the `ε⁻¹` law is expected.
    pub clean_law: bool,
}

/// `min scal(g_ε)` over `Y × [0, ε]` for each `ε`, with a log–log fit in `1/ε`.
pub fn scale_asymptotics(
    g0: &MetricField,
    a0: &QuadraticFormField,
    aplus: &QuadraticFormField,
    eps: &[f64],
    opts: &AsymptoticsOptions,
) -> Result<AsymptoticsReport> {
    if eps.len() < 3 {
        return Err(Error::InvalidParameter("scale asymptotics needs at least three eps values".into()));
    }
    if eps.iter().any(|&e| !(e > 0.0)) || eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("eps values must be positive and strictly decreasing".into()));
    }
    let face = g0.chart().sample_grid(opts.per_axis);
    let (mut pos, mut neg) = (false, false);
    let mut tr_scale: f64 = 0.0;
    let mut traces = Vec::with_capacity(face.len());
    for y in &face {
        let inv = g0
            .eval(y)
            .inverse()
            .ok_or_else(|| Error::Degenerate(format!("g0 is singular at {y:?}")))?;
        let (m0, mp) = (a0.eval(y), aplus.eval(y));
        let m = inv.n;
        let mut tr = 0.0;
        for i in 0..m {
            for j in 0..m {
                tr += inv.a[i][j] * (m0.a[i][j] - mp.a[i][j]);
                tr_scale = tr_scale.max(inv.a[i][j].abs() * (m0.a[i][j].abs() + mp.a[i][j].abs()));
            }
        }
        traces.push(tr);
    }
    let zero = 1e-12 * tr_scale.max(1e-300);
    for &tr in &traces {
        pos |= tr > zero;
        neg |= tr < -zero;
    }
    let trace_sign = match (pos, neg) {
        (true, true) => f64::NAN,
        (true, false) => 1.0,
        (false, true) => -1.0,
        (false, false) => 0.0,
    };
    let ts = opts.t_samples.max(2);
    let mut min_scal = Vec::with_capacity(eps.len());
    let mut at = Vec::with_capacity(eps.len());
    for &e in eps {
        let g = interpolation_family(g0, a0, aplus, e)?;
        let pts: Vec<Vec<f64>> = face
            .iter()
            .flat_map(|y| {
                (0..ts).map(move |k| {
                    let mut x = y.clone();
                    x.push(e * k as f64 / (ts - 1) as f64);
                    x
                })
            })
            .collect();
        let vals: Vec<Result<f64>> = pts.par_iter().map(|x| scalar_curvature(&g, x, opts.mode)).collect();
        let mut best = (f64::INFINITY, Vec::new());
        for (v, x) in vals.into_iter().zip(pts) {
            let v = v?;
            if v < best.0 {
                best = (v, x);
            }
        }
        min_scal.push(best.0);
        at.push(best.1);
    }
    // least squares for ln|s| = ln c + p·ln(1/ε)
    let xs: Vec<f64> = eps.iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = min_scal.iter().map(|s| s.abs().max(f64::MIN_POSITIVE).ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let sign = min_scal.last().copied().unwrap_or(0.0).signum();
    let constant = sign * (my - exponent * mx).exp();
    Ok(AsymptoticsReport {
        eps: eps.to_vec(),
        min_scal,
        at,
        exponent,
        constant,
        sign,
        trace_sign,
        clean_law: trace_sign.abs() == 1.0,
    })
}
