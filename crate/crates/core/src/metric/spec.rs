//! Declarative metric descriptions: family name plus parameter object.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::constructions::{self, FaceSide};
use super::families::{
    AnalyticField, ConeTube, Flat, PerturbedFlat, PolarFlat, SpaceForm, SpaceFormChart,
    WarpProfile,
};
use super::grid::GridField;
use super::{ChartBox, FieldKind, MetricField, Provenance, QuadraticFormField};
use crate::error::{Error, Result};
use crate::linalg::SMat;
use crate::num::MAX_DIM;

/// Family names accepted by [`build_builtin`] and the `family` tag of [`MetricSpec`].
pub const FAMILY_NAMES: &[&str] = &[
    "flat",
    "space-form",
    "polar-flat",
    "product",
    "warped",
    "perturbed-flat",
    "cone-tube",
    "cone",
    "scaled",
    "interpolation",
    "double",
    "develop",
    "mollify",
    "pullback",
    "grid",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricSpec {
    Flat {
        n: usize,
        #[serde(default)]
        chart: Option<ChartBox>,
    },
    SpaceForm {
        n: usize,
        curvature: f64,
        #[serde(default)]
        coordinates: SpaceFormChart,
        #[serde(default)]
        chart: Option<ChartBox>,
    },
    PolarFlat {
        n: usize,
        #[serde(default)]
        chart: Option<ChartBox>,
    },
    Product {
        first: Box<MetricSpec>,
        second: Box<MetricSpec>,
    },
    Warped {
        base: Box<MetricSpec>,
        profile: WarpProfile,
        t_range: [f64; 2],
    },
    PerturbedFlat {
        n: usize,
        amplitude: f64,
        wavevector: Vec<f64>,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        bowl: f64,
        #[serde(default)]
        bias: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default)]
        chart: Option<ChartBox>,
    },
    ConeTube {
        radius: f64,
        strength: f64,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default)]
        chart: Option<ChartBox>,
    },
    Cone {
        base: Box<MetricSpec>,
        t_range: [f64; 2],
    },
    Scaled {
        base: Box<MetricSpec>,
        factor: f64,
    },
    Interpolation {
        g0: Box<MetricSpec>,
        a0: FormSpec,
        aplus: FormSpec,
        eps: f64,
    },
    Double {
        base: Box<MetricSpec>,
        axis: usize,
        side: FaceSide,
    },
    Develop {
        base: Box<MetricSpec>,
    },
    Mollify {
        base: Box<MetricSpec>,
        sigma: f64,
    },
    Pullback {
        base: Box<MetricSpec>,
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
        chart: ChartBox,
    },
    Grid {
        path: PathBuf,
    },
}

/// A constant quadratic form on a face chart: explicit matrix, diagonal, or multiple of I.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FormSpec {
    Matrix { matrix: Vec<Vec<f64>> },
    Diagonal { diagonal: Vec<f64> },
    Scalar { scalar: f64 },
}

impl FormSpec {
    pub fn build(&self, chart: &ChartBox) -> Result<QuadraticFormField> {
        let m = chart.dim();
        let mat = match self {
            FormSpec::Matrix { matrix } => {
                if matrix.len() != m || matrix.iter().any(|r| r.len() != m) {
                    return Err(Error::InvalidParameter(format!("form matrix must be {m}x{m}")));
                }
                SMat::from_fn(m, |i, j| matrix[i][j])
            }
            FormSpec::Diagonal { diagonal } => {
                if diagonal.len() != m {
                    return Err(Error::InvalidParameter(format!("form diagonal must have {m} entries")));
                }
                SMat::from_fn(m, |i, j| if i == j { diagonal[i] } else { 0.0 })
            }
            FormSpec::Scalar { scalar } => SMat::<f64>::identity(m).scale(*scalar),
        };
        QuadraticFormField::constant(chart.clone(), mat)
    }

    pub fn trace(&self, m: usize) -> f64 {
        match self {
            FormSpec::Matrix { matrix } => (0..m.min(matrix.len())).map(|i| matrix[i][i]).sum(),
            FormSpec::Diagonal { diagonal } => diagonal.iter().sum(),
            FormSpec::Scalar { scalar } => scalar * m as f64,
        }
    }
}

fn check_dim(n: usize, lo: usize) -> Result<()> {
    if n < lo || n > MAX_DIM {
        Err(Error::InvalidParameter(format!("dimension {n} outside [{lo}, {MAX_DIM}]")))
    } else {
        Ok(())
    }
}

fn analytic<A: super::families::Analytic>(
    a: A,
    chart: ChartBox,
    name: &str,
    params: Value,
) -> Result<MetricField> {
    let chart = chart.validated()?;
    MetricField::new(chart, FieldKind::AnalyticFamily, Provenance::new(name, params), Arc::new(AnalyticField(a)))
}

fn default_space_form_chart(n: usize, k: f64, coords: SpaceFormChart) -> Result<ChartBox> {
    match coords {
        SpaceFormChart::Polar => {
            let top = if k > 0.0 { (std::f64::consts::PI / k.sqrt() - 0.05).min(3.0) } else { 3.0 };
            ChartBox::with_periodic(vec![0.05, 0.0], vec![top, 2.0 * std::f64::consts::PI], vec![false, true])
        }
        _ => {
            let half = if k < 0.0 { 0.9 / (-k * n as f64).sqrt() } else if k > 0.0 { 1.0 / k.sqrt() } else { 1.0 };
            Ok(ChartBox::cube(n, -half, half))
        }
    }
}

impl MetricSpec {
    /// Builds the field, resolving grid file paths relative to the working directory.
    pub fn build(&self) -> Result<MetricField> {
        self.build_in(Path::new("."))
    }

    /// Builds the field, resolving relative grid file paths against `dir`.
    pub fn build_in(&self, dir: &Path) -> Result<MetricField> {
        let params = serde_json::to_value(self)?;
        match self {
            MetricSpec::Flat { n, chart } => {
                check_dim(*n, 1)?;
                let chart = chart.clone().unwrap_or_else(|| ChartBox::cube(*n, -1.0, 1.0));
                analytic(Flat { n: *n }, chart, "flat", params)
            }
            MetricSpec::SpaceForm { n, curvature, coordinates, chart } => {
                check_dim(*n, 2)?;
                if *coordinates == SpaceFormChart::Polar && *n != 2 {
                    return Err(Error::InvalidParameter("polar space-form coordinates need n = 2".into()));
                }
                let chart = match chart {
                    Some(c) => c.clone(),
                    None => default_space_form_chart(*n, *curvature, *coordinates)?,
                };
                analytic(SpaceForm { n: *n, k: *curvature, chart: *coordinates }, chart, "space-form", params)
            }
            MetricSpec::PolarFlat { n, chart } => {
                let chart = match (n, chart) {
                    (_, Some(c)) => c.clone(),
                    (2, None) => ChartBox::with_periodic(
                        vec![0.1, 0.0],
                        vec![2.0, 2.0 * std::f64::consts::PI],
                        vec![false, true],
                    )?,
                    (3, None) => ChartBox::with_periodic(
                        vec![0.1, 0.1, 0.0],
                        vec![2.0, std::f64::consts::PI - 0.1, 2.0 * std::f64::consts::PI],
                        vec![false, false, true],
                    )?,
                    _ => return Err(Error::InvalidParameter("polar-flat needs n = 2 or 3".into())),
                };
                analytic(PolarFlat { n: *n }, chart, "polar-flat", params)
            }
            MetricSpec::Product { first, second } => {
                constructions::product(&first.build_in(dir)?, &second.build_in(dir)?)
            }
            MetricSpec::Warped { base, profile, t_range } => {
                constructions::warped(&base.build_in(dir)?, *profile, *t_range)
            }
            MetricSpec::PerturbedFlat { n, amplitude, wavevector, phase, bowl, bias, center, chart } => {
                check_dim(*n, 2)?;
                if wavevector.len() != n - 1 {
                    return Err(Error::InvalidParameter(format!(
                        "wavevector must have n-1 = {} components",
                        n - 1
                    )));
                }
                let center = center.clone().unwrap_or_else(|| vec![0.0; *n]);
                if center.len() != *n {
                    return Err(Error::InvalidParameter("center must have n components".into()));
                }
                let chart = chart.clone().unwrap_or_else(|| ChartBox::cube(*n, -1.0, 1.0));
                let fam = PerturbedFlat {
                    n: *n,
                    amplitude: *amplitude,
                    wavevector: wavevector.clone(),
                    phase: *phase,
                    bowl: *bowl,
                    bias: *bias,
                    center,
                };
                analytic(fam, chart, "perturbed-flat", params)
            }
            MetricSpec::ConeTube { radius, strength, center, chart } => {
                if !(*radius > 0.0) {
                    return Err(Error::InvalidParameter("cone-tube radius must be positive".into()));
                }
                let chart = chart.clone().unwrap_or_else(|| ChartBox::cube(3, -1.0, 1.0));
                analytic(ConeTube { radius: *radius, strength: *strength, center: *center }, chart, "cone-tube", params)
            }
            MetricSpec::Cone { base, t_range } => constructions::cone_over(&base.build_in(dir)?, t_range[0], t_range[1]),
            MetricSpec::Scaled { base, factor } => constructions::scaled(&base.build_in(dir)?, *factor),
            MetricSpec::Interpolation { g0, a0, aplus, eps } => {
                let g0 = g0.build_in(dir)?;
                let a0 = a0.build(g0.chart())?;
                let ap = aplus.build(g0.chart())?;
                constructions::interpolation_family(&g0, &a0, &ap, *eps)
            }
            MetricSpec::Double { base, axis, side } => {
                Ok(constructions::double_across_face(&base.build_in(dir)?, *axis, *side)?.0)
            }
            MetricSpec::Develop { base } => constructions::reflection_develop(&base.build_in(dir)?),
            MetricSpec::Mollify { base, sigma } => constructions::mollify(&base.build_in(dir)?, *sigma),
            MetricSpec::Pullback { base, matrix, offset, chart } => {
                let n = matrix.len();
                if matrix.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidParameter("pullback matrix must be square".into()));
                }
                let m = SMat::from_fn(n, |i, j| matrix[i][j]);
                constructions::pullback_affine(&base.build_in(dir)?, m, offset.clone(), chart.validated()?)
            }
            MetricSpec::Grid { path } => {
                let p = if path.is_absolute() { path.clone() } else { dir.join(path) };
                GridField::load(&p)?.into_metric()
            }
        }
    }

    /// Family tag as written in configs.
    pub fn family(&self) -> &'static str {
        match self {
            MetricSpec::Flat { .. } => "flat",
            MetricSpec::SpaceForm { .. } => "space-form",
            MetricSpec::PolarFlat { .. } => "polar-flat",
            MetricSpec::Product { .. } => "product",
            MetricSpec::Warped { .. } => "warped",
            MetricSpec::PerturbedFlat { .. } => "perturbed-flat",
            MetricSpec::ConeTube { .. } => "cone-tube",
            MetricSpec::Cone { .. } => "cone",
            MetricSpec::Scaled { .. } => "scaled",
            MetricSpec::Interpolation { .. } => "interpolation",
            MetricSpec::Double { .. } => "double",
            MetricSpec::Develop { .. } => "develop",
            MetricSpec::Mollify { .. } => "mollify",
            MetricSpec::Pullback { .. } => "pullback",
            MetricSpec::Grid { .. } => "grid",
        }
    }
}

/// Builds a family from its name and a JSON parameter object.
pub fn build_builtin(family: &str, params: &Value) -> Result<MetricField> {
    if !FAMILY_NAMES.contains(&family) {
        return Err(Error::UnknownFamily(family.to_string()));
    }
    let mut obj = match params {
        Value::Object(m) => m.clone(),
        Value::Null => serde_json::Map::new(),
        _ => return Err(Error::InvalidParameter("family parameters must be a JSON object".into())),
    };
    obj.insert("family".into(), Value::String(family.to_string()));
    let spec: MetricSpec = serde_json::from_value(Value::Object(obj))
        .map_err(|e| Error::InvalidParameter(format!("{family}: {e}")))?;
    spec.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn unknown_family_is_rejected() {
        assert!(matches!(build_builtin("klein-bottle", &json!({})), Err(Error::UnknownFamily(_))));
    }

    #[test]
    fn zero_warp_is_not_positive_definite() {
        let r = build_builtin(
            "warped",
            &json!({"base": {"family": "flat", "n": 2}, "profile": {"kind": "const", "value": 0.0}, "t_range": [0.0, 1.0]}),
        );
        assert!(matches!(r, Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn spec_round_trips_through_json() {
        let s = MetricSpec::Warped {
            base: Box::new(MetricSpec::Flat { n: 2, chart: None }),
            profile: WarpProfile::Exp { rate: 1.0, scale: 1.0 },
            t_range: [0.0, 1.0],
        };
        let text = serde_json::to_string(&s).unwrap();
        let back: MetricSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }
}
