//! Riemannian metric fields on axis-aligned chart boxes.
//!
//! A [`MetricField`] is an immutable, thread-safe evaluator `x ↦ g(x)` with an
//! optional exact-derivative path. Analytic families obtain their derivatives
//! by forward-mode differentiation ([`crate::num::Jet`]); constructors
//! (cones, warps, doubles, mollifiers, splines) compose jets of their inputs.

mod constructions;
mod families;
mod grid;
mod spec;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SMat;
use crate::num::{Dual, Jet, Num, MAX_DIM};

pub use constructions::{
    concatenate, cone_over, double_across_face, interface_jumps, interpolation_family, mollify, pullback_affine,
    reflection_develop, scaled, warped, product, DoublingDiagnostic, FaceSide, QUARTIC_NODES,
};
pub use families::{
    AnalyticField, ConeTube, Flat, PerturbedFlat, PolarFlat, SpaceForm, SpaceFormChart,
    WarpProfile, ConstantForm,
};
pub use grid::{GridField, GridMetricFile};
pub use spec::{build_builtin, MetricSpec, FormSpec};

/// Coordinate box hosting a metric field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default)]
    pub periodic: Vec<bool>,
}

impl ChartBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = lower.len();
        Self::with_periodic(lower, upper, vec![false; n])
    }

    pub fn with_periodic(lower: Vec<f64>, upper: Vec<f64>, periodic: Vec<bool>) -> Result<Self> {
        let n = lower.len();
        if !(1..=MAX_DIM).contains(&n) || upper.len() != n || periodic.len() != n {
            return Err(Error::InvalidParameter(format!(
                "chart dimension mismatch: lower {} upper {} periodic {}",
                n,
                upper.len(),
                periodic.len()
            )));
        }
        for k in 0..n {
            if !(lower[k] < upper[k]) {
                return Err(Error::InvalidParameter(format!(
                    "chart axis {k}: lower {} must be below upper {}",
                    lower[k], upper[k]
                )));
            }
        }
        Ok(ChartBox { lower, upper, periodic })
    }

    /// Re-checks invariants after deserialization, filling missing periodicity flags.
    pub fn validated(&self) -> Result<Self> {
        let mut periodic = self.periodic.clone();
        periodic.resize(self.lower.len(), false);
        Self::with_periodic(self.lower.clone(), self.upper.clone(), periodic)
    }

    pub fn cube(n: usize, lo: f64, hi: f64) -> Self {
        ChartBox { lower: vec![lo; n], upper: vec![hi; n], periodic: vec![false; n] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.periodic.get(axis).copied().unwrap_or(false)
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim()).all(|k| self.is_periodic(k) || (x[k] >= self.lower[k] && x[k] <= self.upper[k]))
    }

    /// Distance from `x` to the nearest non-periodic face (∞ if all axes periodic).
    pub fn margin(&self, x: &[f64]) -> f64 {
        (0..self.dim())
            .filter(|&k| !self.is_periodic(k))
            .map(|k| (x[k] - self.lower[k]).min(self.upper[k] - x[k]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn require_margin(&self, x: &[f64], margin: f64) -> Result<()> {
        if self.margin(x) < margin {
            Err(Error::Margin { point: x.to_vec(), margin })
        } else {
            Ok(())
        }
    }

    /// Tensor grid of `per_axis` points per axis (endpoints included).
    pub fn sample_grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let per_axis = per_axis.max(2);
        let total = per_axis.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                (0..n)
                    .map(|k| {
                        let i = idx % per_axis;
                        idx /= per_axis;
                        self.lower[k] + self.width(k) * i as f64 / (per_axis - 1) as f64
                    })
                    .collect()
            })
            .collect()
    }

    /// Wrap periodic coordinates into `[lower, upper)`.
    pub fn wrap(&self, x: &mut [f64]) {
        for k in 0..self.dim() {
            if self.is_periodic(k) {
                let w = self.width(k);
                x[k] = self.lower[k] + (x[k] - self.lower[k]).rem_euclid(w);
            }
        }
    }
}

/// A field of symmetric matrices over a chart, with optional exact derivatives.
pub trait TensorField: Send + Sync + fmt::Debug {
    /// Number of chart coordinates.
    fn dim(&self) -> usize;

    /// Matrix size (equals `dim` for metrics).
    fn rank(&self) -> usize {
        self.dim()
    }

    fn value(&self, x: &[f64]) -> SMat<f64>;

    /// Value with first and second partials, when an exact path exists.
    fn jet(&self, x: &[f64]) -> Option<SMat<Jet>>;

    fn first(&self, x: &[f64]) -> Option<SMat<Dual>> {
        self.jet(x).map(|m| jet_to_dual(&m))
    }
}

pub(crate) fn jet_to_dual(m: &SMat<Jet>) -> SMat<Dual> {
    let mut out = SMat::<Dual>::zeros(m.n);
    for i in 0..m.n {
        for j in 0..m.n {
            out.a[i][j] = m.a[i][j].to_dual();
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    AnalyticFamily,
    SampledGrid,
    Derived,
}

/// Constructor name plus parameters, carried for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub constructor: String,
    pub params: serde_json::Value,
}

impl Provenance {
    pub fn new(constructor: &str, params: serde_json::Value) -> Self {
        Provenance { constructor: constructor.to_string(), params }
    }
}

/// Symmetric-matrix field on a chart (shared plumbing of metrics and forms).
#[derive(Clone)]
pub struct FieldHandle {
    pub chart: ChartBox,
    pub kind: FieldKind,
    pub provenance: Provenance,
    field: Arc<dyn TensorField>,
}

impl fmt::Debug for FieldHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldHandle")
            .field("chart", &self.chart)
            .field("kind", &self.kind)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl FieldHandle {
    pub fn dim(&self) -> usize {
        self.field.dim()
    }
    pub fn rank(&self) -> usize {
        self.field.rank()
    }
    pub fn value(&self, x: &[f64]) -> SMat<f64> {
        self.field.value(x)
    }
    pub fn jet(&self, x: &[f64]) -> Option<SMat<Jet>> {
        self.field.jet(x)
    }
    pub fn first(&self, x: &[f64]) -> Option<SMat<Dual>> {
        self.field.first(x)
    }
    pub fn field(&self) -> &Arc<dyn TensorField> {
        &self.field
    }
}

/// A Riemannian metric on a chart box.
#[derive(Clone, Debug)]
pub struct MetricField(FieldHandle);

impl MetricField {
    /// Wraps an evaluator; positive-definiteness is checked on the default 17-per-axis grid.
    pub fn new(
        chart: ChartBox,
        kind: FieldKind,
        provenance: Provenance,
        field: Arc<dyn TensorField>,
    ) -> Result<Self> {
        let m = Self::new_unchecked(chart, kind, provenance, field)?;
        m.check_positive_definite(DEFAULT_PD_SAMPLES)?;
        Ok(m)
    }

    pub fn new_unchecked(
        chart: ChartBox,
        kind: FieldKind,
        provenance: Provenance,
        field: Arc<dyn TensorField>,
    ) -> Result<Self> {
        if field.dim() != chart.dim() || field.rank() != field.dim() {
            return Err(Error::InvalidParameter(format!(
                "metric evaluator has dim {} rank {}, chart has dim {}",
                field.dim(),
                field.rank(),
                chart.dim()
            )));
        }
        Ok(MetricField(FieldHandle { chart, kind, provenance, field }))
    }

    /// Value-only metric from a closure; curvature falls back to finite differences.
    pub fn from_fn(
        chart: ChartBox,
        name: &str,
        f: impl Fn(&[f64]) -> SMat<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        let n = chart.dim();
        Self::new(
            chart,
            FieldKind::Derived,
            Provenance::new(name, serde_json::Value::Null),
            Arc::new(ClosureField { n, f: Box::new(f) }),
        )
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
    pub fn chart(&self) -> &ChartBox {
        &self.0.chart
    }
    pub fn kind(&self) -> FieldKind {
        self.0.kind
    }
    pub fn provenance(&self) -> &Provenance {
        &self.0.provenance
    }
    pub fn eval(&self, x: &[f64]) -> SMat<f64> {
        self.0.value(x)
    }
    pub fn jet(&self, x: &[f64]) -> Option<SMat<Jet>> {
        self.0.jet(x)
    }
    pub fn first(&self, x: &[f64]) -> Option<SMat<Dual>> {
        self.0.first(x)
    }
    pub fn has_exact_derivatives(&self) -> bool {
        let c: Vec<f64> =
            (0..self.dim()).map(|k| 0.5 * (self.chart().lower[k] + self.chart().upper[k])).collect();
        self.jet(&c).is_some()
    }
    pub fn handle(&self) -> &FieldHandle {
        &self.0
    }
    pub fn evaluator(&self) -> &Arc<dyn TensorField> {
        self.0.field()
    }

    /// Same evaluator on a different chart box.
    pub fn with_chart(&self, chart: ChartBox) -> Result<Self> {
        if chart.dim() != self.dim() {
            return Err(Error::InvalidParameter("chart dimension mismatch".into()));
        }
        let mut h = self.0.clone();
        h.chart = chart;
        Ok(MetricField(h))
    }

    /// Leading-principal-minor test on a `per_axis`-point tensor grid.
    pub fn check_positive_definite(&self, per_axis: usize) -> Result<()> {
        for x in self.chart().sample_grid(per_axis) {
            let g = self.eval(&x);
            if !g.a.iter().flatten().all(|v| v.is_finite()) || !g.is_positive_definite() {
                return Err(Error::NotPositiveDefinite { point: x });
            }
        }
        Ok(())
    }
}

/// Default sample density for positive-definiteness checks.
pub const DEFAULT_PD_SAMPLES: usize = 17;

/// A field of symmetric bilinear forms on a face chart (no definiteness requirement).
#[derive(Clone, Debug)]
pub struct QuadraticFormField(FieldHandle);

impl QuadraticFormField {
    pub fn new(chart: ChartBox, provenance: Provenance, field: Arc<dyn TensorField>) -> Result<Self> {
        if field.dim() != chart.dim() {
            return Err(Error::InvalidParameter("form evaluator and chart disagree in dimension".into()));
        }
        Ok(QuadraticFormField(FieldHandle { chart, kind: FieldKind::AnalyticFamily, provenance, field }))
    }

    /// Constant form `m` over the chart.
    pub fn constant(chart: ChartBox, m: SMat<f64>) -> Result<Self> {
        if m.max_asymmetry() > 0.0 {
            return Err(Error::InvalidParameter("quadratic form must be symmetric".into()));
        }
        let params = serde_json::json!({ "matrix": (0..m.n).map(|i| (0..m.n).map(|j| m.a[i][j]).collect::<Vec<_>>()).collect::<Vec<_>>() });
        let dim = chart.dim();
        Self::new(chart, Provenance::new("constant-form", params), Arc::new(ConstantForm { dim, m }))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
    pub fn rank(&self) -> usize {
        self.0.rank()
    }
    pub fn chart(&self) -> &ChartBox {
        &self.0.chart
    }
    pub fn eval(&self, x: &[f64]) -> SMat<f64> {
        self.0.value(x)
    }
    pub fn jet(&self, x: &[f64]) -> Option<SMat<Jet>> {
        self.0.jet(x)
    }
}

struct ClosureField {
    n: usize,
    f: Box<dyn Fn(&[f64]) -> SMat<f64> + Send + Sync>,
}

impl fmt::Debug for ClosureField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClosureField(n={})", self.n)
    }
}

impl TensorField for ClosureField {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> SMat<f64> {
        (self.f)(x)
    }
    fn jet(&self, _x: &[f64]) -> Option<SMat<Jet>> {
        None
    }
}

/// Jet variables for a point: coordinate `k` becomes variable `k`.
pub(crate) fn jet_point(x: &[f64]) -> [Jet; MAX_DIM] {
    let mut p = [Jet::zero(); MAX_DIM];
    for (k, &v) in x.iter().enumerate() {
        p[k] = Jet::var(v, k);
    }
    p
}

pub(crate) fn dual_point(x: &[f64]) -> [Dual; MAX_DIM] {
    let mut p = [Dual::zero(); MAX_DIM];
    for (k, &v) in x.iter().enumerate() {
        p[k] = Dual::var(v, k);
    }
    p
}
