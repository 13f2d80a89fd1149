use serde::Serialize;

use super::{christoffel, DerivMode};
use crate::error::{Error, Result};
use crate::metric::MetricField;

/// Sampled geodesic: points and unit velocities at every step.
#[derive(Clone, Debug, Serialize)]
pub struct GeodesicPath {
    pub points: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub arc_length: Vec<f64>,
}

pub(crate) fn accel(g: &MetricField, x: &[f64], v: &[f64], mode: DerivMode) -> Result<Vec<f64>> {
    let gam = christoffel(g, x, mode)?;
    let n = x.len();
    Ok((0..n)
        .map(|k| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s -= gam[k][i][j] * v[i] * v[j];
                }
            }
            s
        })
        .collect())
}

fn unit(g: &MetricField, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let norm = g.eval(x).quad(v, v).sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Degenerate("zero initial velocity".into()));
    }
    Ok(v.iter().map(|c| c / norm).collect())
}

/// RK4 integration of `ẍ^k = −Γ^k_ij ẋ^i ẋ^j` by arc length, renormalizing `|ẋ|_g = 1`
/// after every step. The last step is shortened to land exactly on `length`.
pub fn geodesic_with_velocity(
    g: &MetricField,
    x0: &[f64],
    v0: &[f64],
    length: f64,
    step: f64,
    mode: DerivMode,
) -> Result<GeodesicPath> {
    if !(step > 0.0) || !(length >= 0.0) {
        return Err(Error::InvalidParameter("geodesic needs step > 0 and length ≥ 0".into()));
    }
    let n = g.dim();
    if x0.len() != n || v0.len() != n {
        return Err(Error::InvalidParameter("geodesic start dimension mismatch".into()));
    }
    let chart = g.chart();
    let mut x = x0.to_vec();
    let mut v = unit(g, &x, v0)?;
    let mut s = 0.0;
    let mut path = GeodesicPath { points: vec![x.clone()], velocities: vec![v.clone()], arc_length: vec![0.0] };
    let steps = (length / step).ceil() as usize;
    let add = |a: &[f64], b: &[f64], c: f64| a.iter().zip(b).map(|(p, q)| p + c * q).collect::<Vec<_>>();
    for i in 0..steps {
        let h = if i + 1 == steps { length - s } else { step };
        let k1x = v.clone();
        let k1v = accel(g, &x, &v, mode)?;
        let x2 = add(&x, &k1x, 0.5 * h);
        let v2 = add(&v, &k1v, 0.5 * h);
        let k2v = accel(g, &x2, &v2, mode)?;
        let x3 = add(&x, &v2, 0.5 * h);
        let v3 = add(&v, &k2v, 0.5 * h);
        let k3v = accel(g, &x3, &v3, mode)?;
        let x4 = add(&x, &v3, h);
        let v4 = add(&v, &k3v, h);
        let k4v = accel(g, &x4, &v4, mode)?;
        for k in 0..n {
            x[k] += h / 6.0 * (k1x[k] + 2.0 * v2[k] + 2.0 * v3[k] + v4[k]);
            v[k] += h / 6.0 * (k1v[k] + 2.0 * k2v[k] + 2.0 * k3v[k] + k4v[k]);
        }
        s += h;
        if !chart.contains(&x) {
            return Err(Error::ChartExit { arc_length: s, point: x });
        }
        v = unit(g, &x, &v)?;
        path.points.push(x.clone());
        path.velocities.push(v.clone());
        path.arc_length.push(s);
    }
    Ok(path)
}

/// Points of the arc-length geodesic from `x0` in direction `v0`.
pub fn geodesic(g: &MetricField, x0: &[f64], v0: &[f64], length: f64, step: f64) -> Result<Vec<Vec<f64>>> {
    Ok(geodesic_with_velocity(g, x0, v0, length, step, DerivMode::Auto)?.points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::build_builtin;
    use serde_json::json;

    #[test]
    fn great_circle_reaches_the_pole() {
        // stereographic unit sphere: equator is |x| = 1, north pole at the origin
        let g = build_builtin(
            "space-form",
            &json!({"n": 2, "curvature": 1.0, "coordinates": "conformal",
                    "chart": {"lower": [-1.5, -1.5], "upper": [1.5, 1.5]}}),
        )
        .unwrap();
        let p = geodesic(&g, &[1.0, 0.0], &[-1.0, 0.0], std::f64::consts::FRAC_PI_2, 1e-3).unwrap();
        let end = p.last().unwrap();
        assert!(end[0].abs() < 1e-8 && end[1].abs() < 1e-8, "{end:?}");
    }

    #[test]
    fn flat_geodesic_is_a_line() {
        let g = build_builtin("flat", &json!({"n": 3})).unwrap();
        let p = geodesic(&g, &[0.0, 0.0, 0.0], &[1.0, 2.0, 2.0], 0.9, 0.1).unwrap();
        let e = p.last().unwrap();
        assert!((e[0] - 0.3).abs() < 1e-14 && (e[1] - 0.6).abs() < 1e-14 && (e[2] - 0.6).abs() < 1e-14);
    }
}
