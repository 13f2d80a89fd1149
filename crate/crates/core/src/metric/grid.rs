//! Sampled-grid metrics: tensor-product cubic splines (not-a-knot ends,
//! periodic on periodic axes) evaluated through their Hermite form.
//!
//! A tensor spline is determined by node values together with the mixed
//! node derivatives `∂_S f` for every axis subset `S`, each obtained by applying
//! the 1D spline slope operator along the axes of `S`. The Hermite cubic
//! assembled from that data reproduces the spline exactly.

use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{ChartBox, FieldKind, MetricField, Provenance, TensorField};
use crate::error::{Error, Result};
use crate::linalg::SMat;
use crate::num::{Jet, Num, MAX_DIM};

/// On-disk grid metric document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMetricFile {
    pub n: usize,
    pub shape: Vec<usize>,
    pub bbox: [Vec<f64>; 2],
    pub periodic: Vec<bool>,
    /// Upper-triangle coefficient grids `(0,0), (0,1), …, (n−1,n−1)`, each row-major.
    pub components: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Axis {
    lo: f64,
    h: f64,
    count: usize,
    periodic: bool,
    /// Dense spline slope operator: slopes = op · values.
    op: DMatrix<f64>,
}

impl Axis {
    fn new(lo: f64, hi: f64, count: usize, periodic: bool) -> Result<Self> {
        let min = if periodic { 3 } else { 4 };
        if count < min {
            return Err(Error::InvalidParameter(format!(
                "spline axis needs at least {min} nodes, got {count}"
            )));
        }
        let h = if periodic { (hi - lo) / count as f64 } else { (hi - lo) / (count - 1) as f64 };
        let op = slope_operator(count, h, periodic)?;
        Ok(Axis { lo, h, count, periodic, op })
    }

    /// Cell index and local coordinate in [0, 1].
    fn locate(&self, x: f64) -> (usize, usize, f64) {
        let mut s = (x - self.lo) / self.h;
        // snap to nodes so samples are reproduced bit-for-bit
        if (s - s.round()).abs() < 1e-11 {
            s = s.round();
        }
        if self.periodic {
            s = s.rem_euclid(self.count as f64);
            let i = (s.floor() as usize).min(self.count - 1);
            (i, (i + 1) % self.count, s - i as f64)
        } else {
            let i = (s.floor().max(0.0) as usize).min(self.count - 2);
            (i, i + 1, s - i as f64)
        }
    }
}

/// Linear map from node values to spline node slopes.
fn slope_operator(m: usize, h: f64, periodic: bool) -> Result<DMatrix<f64>> {
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut b = DMatrix::<f64>::zeros(m, m);
    let c = 3.0 / h;
    if periodic {
        for i in 0..m {
            let ip = (i + 1) % m;
            let im = (i + m - 1) % m;
            a[(i, im)] += 1.0;
            a[(i, i)] += 4.0;
            a[(i, ip)] += 1.0;
            b[(i, ip)] += c;
            b[(i, im)] -= c;
        }
    } else {
        // not-a-knot: third derivative continuous at the second and penultimate nodes
        let e = 2.0 / h;
        a[(0, 0)] = 1.0;
        a[(0, 2)] = -1.0;
        b[(0, 1)] = 2.0 * e;
        b[(0, 0)] = -e;
        b[(0, 2)] = -e;
        for i in 1..m - 1 {
            a[(i, i - 1)] = 1.0;
            a[(i, i)] = 4.0;
            a[(i, i + 1)] = 1.0;
            b[(i, i + 1)] = c;
            b[(i, i - 1)] = -c;
        }
        let l = m - 1;
        a[(l, l)] = 1.0;
        a[(l, l - 2)] = -1.0;
        b[(l, l)] = e;
        b[(l, l - 2)] = e;
        b[(l, l - 1)] = -2.0 * e;
    }
    let lu = a.lu();
    lu.solve(&b).ok_or_else(|| Error::Degenerate("singular spline system".into()))
}

/// Cubic Hermite basis on [0,1] (value/slope at 0, value/slope at 1), with
/// derivatives in `x`; slope bases are pre-multiplied by `h`.
fn hermite(t: f64, h: f64) -> [[f64; 3]; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    let ih = 1.0 / h;
    let ih2 = ih * ih;
    [
        [2.0 * t3 - 3.0 * t2 + 1.0, (6.0 * t2 - 6.0 * t) * ih, (12.0 * t - 6.0) * ih2],
        [(t3 - 2.0 * t2 + t) * h, 3.0 * t2 - 4.0 * t + 1.0, (6.0 * t - 4.0) * ih],
        [-2.0 * t3 + 3.0 * t2, (-6.0 * t2 + 6.0 * t) * ih, (-12.0 * t + 6.0) * ih2],
        [(t3 - t2) * h, 3.0 * t2 - 2.0 * t, (6.0 * t - 2.0) * ih],
    ]
}

#[derive(Debug, Clone)]
pub struct GridField {
    file: GridMetricFile,
    axes: Vec<Axis>,
    strides: Vec<usize>,
    /// data[component][subset] = node array of ∂_subset of the component.
    data: Vec<Vec<Vec<f64>>>,
}

fn component_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..n {
        for j in i..n {
            v.push((i, j));
        }
    }
    v
}

impl GridField {
    pub fn from_file(file: GridMetricFile) -> Result<Self> {
        let n = file.n;
        if !(1..=MAX_DIM).contains(&n)
            || file.shape.len() != n
            || file.bbox[0].len() != n
            || file.bbox[1].len() != n
            || file.periodic.len() != n
        {
            return Err(Error::InvalidParameter("grid metric: n, shape, bbox and periodic disagree".into()));
        }
        let nodes: usize = file.shape.iter().product();
        let ncomp = n * (n + 1) / 2;
        if file.components.len() != nodes * ncomp {
            return Err(Error::InvalidParameter(format!(
                "grid metric: expected {} component values, found {}",
                nodes * ncomp,
                file.components.len()
            )));
        }
        let axes = (0..n)
            .map(|k| Axis::new(file.bbox[0][k], file.bbox[1][k], file.shape[k], file.periodic[k]))
            .collect::<Result<Vec<_>>>()?;
        // row-major: first axis slowest
        let mut strides = vec![1; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * file.shape[k + 1];
        }
        let mut data = Vec::with_capacity(ncomp);
        for c in 0..ncomp {
            let base = file.components[c * nodes..(c + 1) * nodes].to_vec();
            let mut per_subset = vec![Vec::new(); 1 << n];
            per_subset[0] = base;
            for s in 1usize..(1 << n) {
                let k = s.trailing_zeros() as usize;
                let prev = &per_subset[s & !(1 << k)];
                per_subset[s] = apply_along(prev, &axes[k], &file.shape, &strides, k);
            }
            data.push(per_subset);
        }
        Ok(GridField { file, axes, strides, data })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: GridMetricFile = serde_json::from_str(&text)?;
        Self::from_file(file)
    }

    /// Samples `g` at the nodes of a grid over its chart (periodic axes drop the closing node).
    pub fn sample(g: &MetricField, shape: &[usize]) -> Result<Self> {
        let chart = g.chart();
        let n = chart.dim();
        if shape.len() != n {
            return Err(Error::InvalidParameter("sample shape must have one entry per axis".into()));
        }
        let periodic: Vec<bool> = (0..n).map(|k| chart.is_periodic(k)).collect();
        let nodes: usize = shape.iter().product();
        let pairs = component_pairs(n);
        let mut components = vec![0.0; nodes * pairs.len()];
        for flat in 0..nodes {
            let mut rem = flat;
            let mut x = vec![0.0; n];
            for k in (0..n).rev() {
                let i = rem % shape[k];
                rem /= shape[k];
                let steps = if periodic[k] { shape[k] } else { shape[k] - 1 };
                x[k] = chart.lower[k] + chart.width(k) * i as f64 / steps as f64;
            }
            let m = g.eval(&x);
            for (c, &(i, j)) in pairs.iter().enumerate() {
                components[c * nodes + flat] = m.a[i][j];
            }
        }
        Self::from_file(GridMetricFile {
            n,
            shape: shape.to_vec(),
            bbox: [chart.lower.clone(), chart.upper.clone()],
            periodic,
            components,
        })
    }

    pub fn file(&self) -> &GridMetricFile {
        &self.file
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(&self.file)?)?;
        Ok(())
    }

    pub fn chart(&self) -> Result<ChartBox> {
        ChartBox::with_periodic(self.file.bbox[0].clone(), self.file.bbox[1].clone(), self.file.periodic.clone())
    }

    pub fn into_metric(self) -> Result<MetricField> {
        let chart = self.chart()?;
        let prov = Provenance::new(
            "grid",
            serde_json::json!({ "shape": self.file.shape, "bbox": self.file.bbox, "periodic": self.file.periodic }),
        );
        MetricField::new(chart, FieldKind::SampledGrid, prov, Arc::new(self))
    }

    fn eval_generic(&self, x: &[f64], derivs: bool) -> SMat<Jet> {
        let n = self.file.n;
        let mut cell = [(0usize, 0usize); MAX_DIM];
        let mut basis = [[[0.0; 3]; 4]; MAX_DIM];
        for k in 0..n {
            let (i0, i1, t) = self.axes[k].locate(x[k]);
            cell[k] = (i0, i1);
            basis[k] = hermite(t, self.axes[k].h);
        }
        let pairs = component_pairs(n);
        let mut out = SMat::<Jet>::zeros(n);
        let mut acc = vec![Jet::zero(); pairs.len()];
        for corner in 0usize..(1 << n) {
            let mut node = 0;
            for k in 0..n {
                let idx = if corner >> k & 1 == 1 { cell[k].1 } else { cell[k].0 };
                node += idx * self.strides[k];
            }
            for s in 0usize..(1 << n) {
                let mut w = Jet::cst(1.0);
                for k in 0..n {
                    let which = 2 * (corner >> k & 1) + (s >> k & 1);
                    let b = basis[k][which];
                    if derivs {
                        let mut f = Jet::cst(b[0]);
                        f.d[k] = b[1];
                        f.h[k][k] = b[2];
                        w = w * f;
                    } else {
                        w.v *= b[0];
                    }
                }
                for (c, a) in acc.iter_mut().enumerate() {
                    let v = self.data[c][s][node];
                    if v != 0.0 {
                        *a += w * v;
                    }
                }
            }
        }
        for (c, &(i, j)) in pairs.iter().enumerate() {
            out.set_sym(i, j, acc[c]);
        }
        out
    }
}

/// Applies the axis-`k` slope operator to every grid line along `k`.
fn apply_along(values: &[f64], axis: &Axis, shape: &[usize], strides: &[usize], k: usize) -> Vec<f64> {
    let m = shape[k];
    let stride = strides[k];
    let total = values.len();
    let mut out = vec![0.0; total];
    let mut line = vec![0.0; m];
    for start in 0..total {
        if (start / stride) % m != 0 {
            continue;
        }
        for i in 0..m {
            line[i] = values[start + i * stride];
        }
        for i in 0..m {
            let mut s = 0.0;
            for j in 0..m {
                s += axis.op[(i, j)] * line[j];
            }
            out[start + i * stride] = s;
        }
    }
    out
}

impl TensorField for GridField {
    fn dim(&self) -> usize {
        self.file.n
    }
    fn value(&self, x: &[f64]) -> SMat<f64> {
        self.eval_generic(x, false).map_f64()
    }
    fn jet(&self, x: &[f64]) -> Option<SMat<Jet>> {
        Some(self.eval_generic(x, true))
    }
}
