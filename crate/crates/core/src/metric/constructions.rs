//! Metric constructors: warps, products, cones, the interpolation family,
//! doubling, reflection development, mollification, rescaling, pullbacks.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::families::WarpProfile;
use super::{ChartBox, FieldKind, MetricField, Provenance, QuadraticFormField, TensorField};
use crate::error::{Error, Result};
use crate::linalg::SMat;
use crate::num::{Jet, Num, MAX_DIM};

fn kind_of(inputs: &[&MetricField]) -> FieldKind {
    if inputs.iter().all(|m| m.kind() == FieldKind::AnalyticFamily) {
        FieldKind::AnalyticFamily
    } else {
        FieldKind::Derived
    }
}

#[derive(Debug)]
struct Warped {
    base: MetricField,
    profile: WarpProfile,
}

impl TensorField for Warped {
    fn dim(&self) -> usize {
        self.base.dim() + 1
    }
    fn value(&self, x: &[f64]) -> SMat<f64> {
        let m = self.base.dim();
        let a = self.profile.eval(x[m]);
        let gb = self.base.eval(&x[..m]);
        let mut g = SMat::zeros(m + 1);
        for i in 0..m {
            for j in 0..m {
                g.a[i][j] = a * a * gb.a[i][j];
            }
        }
        g.a[m][m] = 1.0;
        g
    }
    fn jet(&self, x: &[f64]) -> Option<SMat<Jet>> {
        let m = self.base.dim();
        let gb = self.base.jet(&x[..m])?;
        let a = self.profile.eval(Jet::var(x[m], m));
        let a2 = a * a;
        let mut g = SMat::zeros(m + 1);
        for i in 0..m {
            for j in 0..m {
                g.a[i][j] = a2 * gb.a[i][j];
            }
        }
        g.a[m][m] = Jet::one();
        Some(g)
    }
}

/// `a(t)²·g_base(y) + dt²` over `base chart × [t0, t1]`.
pub fn warped(base: &MetricField, profile: WarpProfile, t_range: [f64; 2]) -> Result<MetricField> {
    let m = base.dim();
    if m + 1 > MAX_DIM {
        return Err(Error::InvalidParameter(format!("warped product would have dimension {}", m + 1)));
    }
    let mut lower = base.chart().lower.clone();
    let mut upper = base.chart().upper.clone();
    let mut periodic = base.chart().periodic.clone();
    periodic.resize(m, false);
    lower.push(t_range[0]);
    upper.push(t_range[1]);
    periodic.push(false);
    let chart = ChartBox::with_periodic(lower, upper, periodic)?;
    let prov = Provenance::new(
        "warped",
        json!({ "base": base.provenance(), "profile": profile, "t_range": t_range }),
    );
    let kind = kind_of(&[base]);
    let f = Arc::new(Warped { base: base.clone(), profile });
    MetricField::new(chart, kind, prov, f)
}

/// `ǧ(x, t) = t²·g(x) + dt²` on `chart × [t_min, t_max]`, `t_min > 0`.
pub fn cone_over(g: &MetricField, t_min: f64, t_max: f64) -> Result<MetricField> {
    if !(t_min > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cone t-range must exclude the vertex: t_min = {t_min}"
        )));
    }
    let m = warped(g, WarpProfile::Linear { slope: 1.0, offset: 0.0 }, [t_min, t_max])?;
    let mut h = m.handle().clone();
    h.provenance = Provenance::new("cone", json!({ "base": g.provenance(), "t_range": [t_min, t_max] }));
    MetricField::new_unchecked(h.chart.clone(), h.kind, h.provenance.clone(), h.field().clone())
}

#[derive(Debug)]
struct Product {
    a: MetricField,
    b: MetricField,
}

impl TensorField for Product {
    fn dim(&self) -> usize {
        self.a.dim() + self.b.dim()
    }
    fn value(&self, x: &[f64]) -> SMat<f64> {
        let m = self.a.dim();
        let ga = self.a.eval(&x[..m]);
        let gb = self.b.eval(&x[m..self.dim()]);
        let mut g = SMat::zeros(self.dim());
        for i in 0..m {
            for j in 0..m {
                g.a[i][j] = ga.a[i][j];
            }
        }
        for i in 0..gb.n {
            for j in 0..gb.n {
                g.a[m + i][m + j] = gb.a[i][j];
            }
        }
        g
    }
    fn jet(&self, x: &[f64]) -> Option<SMat<Jet>> {
        let m = self.a.dim();
        let ga = self.a.jet(&x[..m])?;
        let gb = self.b.jet(&x[m..self.dim()])?;
        let mut g = SMat::zeros(self.dim());
        for i in 0..m {
            for j in 0..m {
                g.a[i][j] = ga.a[i][j];
            }
        }
        for i in 0..gb.n {
            for j in 0..gb.n {
                g.a[m + i][m + j] = gb.a[i][j].shifted(m);
            }
        }
        Some(g)
    }
}

/// Riemannian product `g1 ⊕ g2` on the product chart.
pub fn product(g1: &MetricField, g2: &MetricField) -> Result<MetricField> {
    let n = g1.dim() + g2.dim();
    if n > MAX_DIM {
        return Err(Error::InvalidParameter(format!("product would have dimension {n}")));
    }
    let c1 = g1.chart();
    let c2 = g2.chart();
    let cat = |a: &Vec<f64>, b: &Vec<f64>| a.iter().chain(b.iter()).copied().collect::<Vec<_>>();
    let mut p1 = c1.periodic.clone();
    p1.resize(c1.dim(), false);
    let mut p2 = c2.periodic.clone();
    p2.resize(c2.dim(), false);
    let chart = ChartBox::with_periodic(
        cat(&c1.lower, &c2.lower),
        cat(&c1.upper, &c2.upper),
        p1.into_iter().chain(p2).collect(),
    )?;
    let prov = Provenance::new("product", json!({ "first": g1.provenance(), "second": g2.provenance() }));
    let kind = kind_of(&[g1, g2]);
    MetricField::new(chart, kind, prov, Arc::new(Product { a: g1.clone(), b: g2.clone() }))
}

#[derive(Debug)]
struct Interpolation {
    g0: MetricField,
    a0: QuadraticFormField,
    ap: QuadraticFormField,
    eps: f64,
}

impl TensorField for Interpolation {
    fn dim(&self) -> usize {
        self.g0.dim() + 1
    }
    fn value(&self, x: &[f64]) -> SMat<f64> {
        let m = self.g0.dim();
        let y = &x[..m];
        let t = x[m];
        let g0 = self.g0.eval(y);
        let a0 = self.a0.eval(y);
        let ap = self.ap.eval(y);
        let q = t * t / (2.0 * self.eps);
        let mut g = SMat::zeros(m + 1);
        for i in 0..m {
            for j in 0..m {
                g.a[i][j] = g0.a[i][j] + t * a0.a[i][j] + q * (ap.a[i][j] - a0.a[i][j]);
            }
        }
        g.a[m][m] = 1.0;
        g
    }
    fn jet(&self, x: &[f64]) -> Option<SMat<Jet>> {
        let m = self.g0.dim();
        let y = &x[..m];
        let g0 = self.g0.jet(y)?;
        let a0 = self.a0.jet(y)?;
        let ap = self.ap.jet(y)?;
        let t = Jet::var(x[m], m);
        let q = t * t / (2.0 * self.eps);
        let mut g = SMat::zeros(m + 1);
        for i in 0..m {
            for j in 0..m {
                g.a[i][j] = g0.a[i][j] + t * a0.a[i][j] + q * (ap.a[i][j] - a0.a[i][j]);
            }
        }
        g.a[m][m] = Jet::one();
        Some(g)
    }
}

/// `g_ε(y,t) = g0(y) + t·A0(y) + t²/(2ε)·(A₊(y) − A0(y))`, block-summed with `dt²`,
/// on `Y × [0, ε]`.
pub fn interpolation_family(
    g0: &MetricField,
    a0: &QuadraticFormField,
    aplus: &QuadraticFormField,
    eps: f64,
) -> Result<MetricField> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let m = g0.dim();
    if m + 1 > MAX_DIM {
        return Err(Error::InvalidParameter("interpolation family dimension exceeds 4".into()));
    }
    for (name, f) in [("A0", a0), ("A+", aplus)] {
        if f.rank() != m || f.dim() != m {
            return Err(Error::InvalidParameter(format!(
                "{name} must be a {m}x{m} form on the face chart"
            )));
        }
    }
    let c = g0.chart();
    let mut lower = c.lower.clone();
    let mut upper = c.upper.clone();
    let mut periodic = c.periodic.clone();
    periodic.resize(m, false);
    lower.push(0.0);
    upper.push(eps);
    periodic.push(false);
    let chart = ChartBox::with_periodic(lower, upper, periodic)?;
    let prov = Provenance::new(
        "interpolation",
        json!({ "g0": g0.provenance(), "eps": eps, "a0": a0.0.provenance, "aplus": aplus.0.provenance }),
    );
    let kind = kind_of(&[g0]);
    MetricField::new(
        chart,
        kind,
        prov,
        Arc::new(Interpolation { g0: g0.clone(), a0: a0.clone(), ap: aplus.clone(), eps }),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaceSide {
    Lower,
    Upper,
}

/// Interface continuity of a doubled or developed field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingDiagnostic {
    /// Step of the one-sided differences.
    pub h: f64,
    /// Sup over interface samples and components of `|g(p⁺) − g(p⁻)|`.
    pub coefficient_jump: f64,
    /// Sup of `|(g(p+h) − g(p))/h − (g(p) − g(p−h))/h|` across the interface.
    pub first_difference_jump: f64,
}

#[derive(Debug)]
struct Doubled {
    base: MetricField,
    axis: usize,
    face: f64,
    side: FaceSide,
}

impl Doubled {
    fn mirrored(&self, x: &[f64]) -> bool {
        match self.side {
            FaceSide::Upper => x[self.axis] > self.face,
            FaceSide::Lower => x[self.axis] < self.face,
        }
    }
    fn reflect(&self, x: &[f64]) -> [f64; MAX_DIM] {
        let mut y = [0.0; MAX_DIM];
        y[..x.len()].copy_from_slice(x);
        y[self.axis] = 2.0 * self.face - x[self.axis];
        y
    }
}

fn flip_mixed<T: Num>(g: &mut SMat<T>, axis: usize) {
    for i in 0..g.n {
        if i != axis {
            g.a[i][axis] = -g.a[i][axis];
            g.a[axis][i] = -g.a[axis][i];
        }
    }
}

impl TensorField for Doubled {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn value(&self, x: &[f64]) -> SMat<f64> {
        if !self.mirrored(x) {
            return self.base.eval(x);
        }
        let y = self.reflect(x);
        let mut g = self.base.eval(&y[..x.len()]);
        flip_mixed(&mut g, self.axis);
        g
    }
    fn jet(&self, x: &[f64]) -> Option<SMat<Jet>> {
        if !self.mirrored(x) {
            return self.base.jet(x);
        }
        let y = self.reflect(x);
        let mut g = self.base.jet(&y[..x.len()])?;
        for i in 0..g.n {
            for j in 0..g.n {
                g.a[i][j] = g.a[i][j].reflected(self.axis);
            }
        }
        flip_mixed(&mut g, self.axis);
        Some(g)
    }
}

/// Evenly doubles `g` across the chart face `x_axis = lower/upper`; mixed
/// normal–tangent components are extended oddly (pullback by the reflection).
pub fn double_across_face(
    g: &MetricField,
    axis: usize,
    side: FaceSide,
) -> Result<(MetricField, DoublingDiagnostic)> {
    let c = g.chart();
    if axis >= c.dim() {
        return Err(Error::InvalidParameter(format!("axis {axis} out of range")));
    }
    if c.is_periodic(axis) {
        return Err(Error::InvalidParameter(format!("axis {axis} is periodic and has no face")));
    }
    let mut lower = c.lower.clone();
    let mut upper = c.upper.clone();
    let face = match side {
        FaceSide::Upper => {
            upper[axis] = 2.0 * c.upper[axis] - c.lower[axis];
            c.upper[axis]
        }
        FaceSide::Lower => {
            lower[axis] = 2.0 * c.lower[axis] - c.upper[axis];
            c.lower[axis]
        }
    };
    let mut periodic = c.periodic.clone();
    periodic.resize(c.dim(), false);
    let chart = ChartBox::with_periodic(lower, upper, periodic)?;
    let prov = Provenance::new("double", json!({ "base": g.provenance(), "axis": axis, "side": side }));
    let f = Arc::new(Doubled { base: g.clone(), axis, face, side });
    let doubled = MetricField::new_unchecked(chart, FieldKind::Derived, prov, f)?;
    let h = 1e-3 * c.width(axis);
    let diag = interface_jumps(&doubled, axis, face, h, 9);
    Ok((doubled, diag))
}

#[derive(Debug)]
struct Concatenated {
    below: MetricField,
    above: MetricField,
    axis: usize,
    at: f64,
}

impl Concatenated {
    fn pick(&self, x: &[f64]) -> &MetricField {
        if x[self.axis] <= self.at {
            &self.below
        } else {
            &self.above
        }
    }
}

impl TensorField for Concatenated {
    fn dim(&self) -> usize {
        self.below.dim()
    }
    fn value(&self, x: &[f64]) -> SMat<f64> {
        self.pick(x).eval(x)
    }
    fn jet(&self, x: &[f64]) -> Option<SMat<Jet>> {
        self.pick(x).jet(x)
    }
}

/// `g₁` for `x_axis ≤ at`, `g₂` above: the raw (generally discontinuous) glue of two
/// fields meeting along a coordinate hyperplane. The chart is `g₁`'s below and `g₂`'s above,
/// intersected across the other axes.
pub fn concatenate(g1: &MetricField, g2: &MetricField, axis: usize, at: f64) -> Result<MetricField> {
    let (c1, c2) = (g1.chart(), g2.chart());
    let n = c1.dim();
    if c2.dim() != n || axis >= n {
        return Err(Error::InvalidParameter("concatenated fields need equal dimension and a valid axis".into()));
    }
    if !(c1.lower[axis] < at && at <= c1.upper[axis] && c2.lower[axis] <= at && at < c2.upper[axis]) {
        return Err(Error::InvalidParameter(format!("hyperplane x_{axis} = {at} is not shared by both charts")));
    }
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for k in 0..n {
        if k == axis {
            lower.push(c1.lower[k]);
            upper.push(c2.upper[k]);
        } else {
            lower.push(c1.lower[k].max(c2.lower[k]));
            upper.push(c1.upper[k].min(c2.upper[k]));
        }
    }
    let chart = ChartBox::new(lower, upper)?;
    let prov = Provenance::new(
        "concatenate",
        json!({ "below": g1.provenance(), "above": g2.provenance(), "axis": axis, "at": at }),
    );
    let f = Arc::new(Concatenated { below: g1.clone(), above: g2.clone(), axis, at });
    MetricField::new_unchecked(chart, FieldKind::Derived, prov, f)
}

/// Coefficient and first-difference jumps across the hyperplane `x_axis = face`,
/// sampled on a `per_axis` tensor grid of the interface (chart interior).
pub fn interface_jumps(g: &MetricField, axis: usize, face: f64, h: f64, per_axis: usize) -> DoublingDiagnostic {
    let c = g.chart();
    let n = c.dim();
    let mut coeff: f64 = 0.0;
    let mut first: f64 = 0.0;
    let pts = c.sample_grid(per_axis);
    for mut p in pts {
        // keep tangential samples off the chart boundary so both sides are evaluable
        let mut skip = false;
        for k in 0..n {
            if k != axis && !c.is_periodic(k) && (p[k] <= c.lower[k] || p[k] >= c.upper[k]) {
                skip = true;
            }
        }
        if skip || p[axis] != c.lower[axis] {
            continue;
        }
        p[axis] = face;
        let at = |s: f64| {
            let mut q = p.clone();
            q[axis] = face + s;
            g.eval(&q)
        };
        let g0 = at(0.0);
        let gp = at(h);
        let gm = at(-h);
        let gp0 = at(1e-12 * (1.0 + face.abs()));
        let gm0 = at(-1e-12 * (1.0 + face.abs()));
        for i in 0..n {
            for j in 0..n {
                coeff = coeff.max((gp0.a[i][j] - gm0.a[i][j]).abs());
                let d = (gp.a[i][j] - g0.a[i][j]) / h - (g0.a[i][j] - gm.a[i][j]) / h;
                first = first.max(d.abs());
            }
        }
    }
    DoublingDiagnostic { h, coefficient_jump: coeff, first_difference_jump: first }
}

#[derive(Debug)]
struct Developed {
    base: MetricField,
    lower: Vec<f64>,
    width: Vec<f64>,
}

impl Developed {
    fn fold(&self, x: &[f64]) -> ([f64; MAX_DIM], [bool; MAX_DIM]) {
        let mut y = [0.0; MAX_DIM];
        let mut flip = [false; MAX_DIM];
        for k in 0..x.len() {
            let w = self.width[k];
            let s = (x[k] - self.lower[k]).rem_euclid(2.0 * w);
            if s > w {
                y[k] = self.lower[k] + 2.0 * w - s;
                flip[k] = true;
            } else {
                y[k] = self.lower[k] + s;
            }
        }
        (y, flip)
    }
}

impl TensorField for Developed {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn value(&self, x: &[f64]) -> SMat<f64> {
        let n = x.len();
        let (y, flip) = self.fold(x);
        let mut g = self.base.eval(&y[..n]);
        for k in 0..n {
            if flip[k] {
                flip_mixed(&mut g, k);
            }
        }
        g
    }
    fn jet(&self, x: &[f64]) -> Option<SMat<Jet>> {
        let n = x.len();
        let (y, flip) = self.fold(x);
        let mut g = self.base.jet(&y[..n])?;
        for k in 0..n {
            if flip[k] {
                for i in 0..n {
                    for j in 0..n {
                        g.a[i][j] = g.a[i][j].reflected(k);
                    }
                }
                flip_mixed(&mut g, k);
            }
        }
        Some(g)
    }
}

/// Even periodic extension of `g` from its chart box `B` (typically `[0,1]^n`)
/// to the torus of period `2·width(B)` per axis.
pub fn reflection_develop(g: &MetricField) -> Result<MetricField> {
    let c = g.chart();
    let n = c.dim();
    let width: Vec<f64> = (0..n).map(|k| c.width(k)).collect();
    let upper: Vec<f64> = (0..n).map(|k| c.lower[k] + 2.0 * width[k]).collect();
    let chart = ChartBox::with_periodic(c.lower.clone(), upper, vec![true; n])?;
    let prov = Provenance::new("develop", json!({ "base": g.provenance() }));
    let f = Arc::new(Developed { base: g.clone(), lower: c.lower.clone(), width });
    MetricField::new_unchecked(chart, FieldKind::Derived, prov, f)
}

/// Nodes per axis of the composite Simpson rule used by [`mollify`].
pub const QUARTIC_NODES: usize = 33;

/// Support of the mollifier relative to `sigma` that the output chart keeps clear of.
const MOLLIFY_MARGIN: f64 = 3.0;

fn quartic(r: f64) -> [f64; 3] {
    // normalized (15/16)(1-r²)² on [-1,1] with its first two derivatives
    let q = 1.0 - r * r;
    [15.0 / 16.0 * q * q, -15.0 / 4.0 * r * q, -15.0 / 4.0 * (1.0 - 3.0 * r * r)]
}

#[derive(Debug)]
struct Mollified {
    base: MetricField,
    sigma: f64,
    nodes: Vec<f64>,
    /// Simpson weight times kernel value, first and second derivative.
    weights: Vec<[f64; 3]>,
}

impl Mollified {
    fn new(base: MetricField, sigma: f64) -> Self {
        let m = QUARTIC_NODES;
        let step = 2.0 / (m - 1) as f64;
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for i in 0..m {
            let s = -1.0 + step * i as f64;
            let w = if i == 0 || i == m - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            } * step
                / 3.0;
            let k = quartic(s);
            nodes.push(s);
            weights.push([w * k[0], w * k[1], w * k[2]]);
        }
        // Simpson is exact only to cubics; renormalize so constants are reproduced
        let total: f64 = weights.iter().map(|w| w[0]).sum();
        for w in &mut weights {
            w[0] /= total;
        }
        Mollified { base, sigma, nodes, weights }
    }

    /// Accumulates `∫ g(x + σs) w(s) ds` for value, gradient and Hessian weights.
    fn convolve(&self, x: &[f64], with_derivs: bool) -> SMat<Jet> {
        let n = x.len();
        let m = self.nodes.len();
        let chart = self.base.chart();
        let total = m.pow(n as u32);
        let mut acc = SMat::<Jet>::zeros(n);
        let inv = 1.0 / self.sigma;
        let mut idx = [0usize; MAX_DIM];
        let mut y = [0.0; MAX_DIM];
        for _ in 0..total {
            for k in 0..n {
                y[k] = x[k] + self.sigma * self.nodes[idx[k]];
            }
            chart.wrap(&mut y[..n]);
            let g = self.base.eval(&y[..n]);
            let mut w = Jet::cst(1.0);
            if with_derivs {
                // per-axis factor: value k(s), d/dx = −k'(s)/σ, d²/dx² = k''(s)/σ²
                for k in 0..n {
                    let kw = self.weights[idx[k]];
                    let mut f = Jet::cst(kw[0]);
                    f.d[k] = -kw[1] * inv;
                    f.h[k][k] = kw[2] * inv * inv;
                    w = w * f;
                }
            } else {
                let mut v = 1.0;
                for k in 0..n {
                    v *= self.weights[idx[k]][0];
                }
                w = Jet::cst(v);
            }
            for i in 0..n {
                for j in i..n {
                    acc.a[i][j] += w * g.a[i][j];
                }
            }
            for k in 0..n {
                idx[k] += 1;
                if idx[k] < m {
                    break;
                }
                idx[k] = 0;
            }
        }
        for i in 0..n {
            for j in 0..i {
                acc.a[i][j] = acc.a[j][i];
            }
        }
        acc
    }
}

impl TensorField for Mollified {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn value(&self, x: &[f64]) -> SMat<f64> {
        self.convolve(x, false).map_f64()
    }
    fn jet(&self, x: &[f64]) -> Option<SMat<Jet>> {
        Some(self.convolve(x, true))
    }
}

/// Convolution with the tensorized quartic bump of half-width `sigma`.
/// The output chart is the input chart shrunk by `3σ` on non-periodic axes.
pub fn mollify(g: &MetricField, sigma: f64) -> Result<MetricField> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let c = g.chart();
    let n = c.dim();
    let mut lower = c.lower.clone();
    let mut upper = c.upper.clone();
    for k in 0..n {
        if !c.is_periodic(k) {
            lower[k] += MOLLIFY_MARGIN * sigma;
            upper[k] -= MOLLIFY_MARGIN * sigma;
            if !(lower[k] < upper[k]) {
                return Err(Error::Margin { point: c.lower.clone(), margin: MOLLIFY_MARGIN * sigma });
            }
        }
    }
    let mut periodic = c.periodic.clone();
    periodic.resize(n, false);
    let chart = ChartBox::with_periodic(lower, upper, periodic)?;
    let prov = Provenance::new("mollify", json!({ "base": g.provenance(), "sigma": sigma }));
    let f = Arc::new(Mollified::new(g.clone(), sigma));
    // sparse positivity check: the full 17^n grid would cost 33^n base evaluations per point
    let out = MetricField::new_unchecked(chart, FieldKind::Derived, prov, f)?;
    out.check_positive_definite(3)?;
    Ok(out)
}

#[derive(Debug)]
struct Scaled {
    base: MetricField,
    c: f64,
}

impl TensorField for Scaled {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn value(&self, x: &[f64]) -> SMat<f64> {
        self.base.eval(x).scale(self.c)
    }
    fn jet(&self, x: &[f64]) -> Option<SMat<Jet>> {
        self.base.jet(x).map(|g| g.scale(Jet::cst(self.c)))
    }
}

/// Constant rescaling `c·g`, `c > 0`.
pub fn scaled(g: &MetricField, c: f64) -> Result<MetricField> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("scale factor must be positive, got {c}")));
    }
    let prov = Provenance::new("scaled", json!({ "base": g.provenance(), "factor": c }));
    let kind = kind_of(&[g]);
    MetricField::new_unchecked(g.chart().clone(), kind, prov, Arc::new(Scaled { base: g.clone(), c }))
}

#[derive(Debug)]
struct Pullback {
    base: MetricField,
    m: SMat<f64>,
    b: Vec<f64>,
}

impl Pullback {
    fn image(&self, x: &[f64]) -> [f64; MAX_DIM] {
        let mut y = self.m.mul_vec(x);
        for k in 0..x.len() {
            y[k] += self.b[k];
        }
        y
    }
}

impl TensorField for Pullback {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn value(&self, x: &[f64]) -> SMat<f64> {
        let n = x.len();
        let y = self.image(x);
        let g = self.base.eval(&y[..n]);
        SMat::from_fn(n, |i, j| {
            let mut s = 0.0;
            for k in 0..n {
                for l in 0..n {
                    s += self.m.a[k][i] * g.a[k][l] * self.m.a[l][j];
                }
            }
            s
        })
    }
    fn jet(&self, x: &[f64]) -> Option<SMat<Jet>> {
        let n = x.len();
        let y = self.image(x);
        let g = self.base.jet(&y[..n])?;
        // chain rule for y = Mx + b: ∇_x = Mᵀ∇_y, Hess_x = Mᵀ Hess_y M
        let mut gx = SMat::<Jet>::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let src = g.a[i][j];
                let mut out = Jet::cst(src.v);
                for a in 0..n {
                    out.d[a] = (0..n).map(|k| self.m.a[k][a] * src.d[k]).sum();
                    for b in 0..n {
                        let mut s = 0.0;
                        for k in 0..n {
                            for l in 0..n {
                                s += self.m.a[k][a] * src.h[k][l] * self.m.a[l][b];
                            }
                        }
                        out.h[a][b] = s;
                    }
                }
                gx.a[i][j] = out;
            }
        }
        let mut r = SMat::<Jet>::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = Jet::zero();
                for k in 0..n {
                    for l in 0..n {
                        let c = self.m.a[k][i] * self.m.a[l][j];
                        if c != 0.0 {
                            s += gx.a[k][l] * c;
                        }
                    }
                }
                r.a[i][j] = s;
            }
        }
        Some(r)
    }
}

/// Pullback of `g` by the affine map `x ↦ Mx + b`, defined on `chart`, whose image
/// must lie in the chart of `g`.
pub fn pullback_affine(g: &MetricField, m: SMat<f64>, b: Vec<f64>, chart: ChartBox) -> Result<MetricField> {
    let n = g.dim();
    if m.n != n || b.len() != n || chart.dim() != n {
        return Err(Error::InvalidParameter("affine pullback dimension mismatch".into()));
    }
    if m.determinant().abs() < 1e-14 {
        return Err(Error::InvalidParameter("affine pullback map is singular".into()));
    }
    let pb = Pullback { base: g.clone(), m, b: b.clone() };
    for corner in 0..(1usize << n) {
        let x: Vec<f64> = (0..n)
            .map(|k| if corner >> k & 1 == 1 { chart.upper[k] } else { chart.lower[k] })
            .collect();
        let y = pb.image(&x);
        if !g.chart().contains(&y[..n]) {
            return Err(Error::Margin { point: y[..n].to_vec(), margin: 0.0 });
        }
    }
    let mat: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m.a[i][j]).collect()).collect();
    let prov = Provenance::new("pullback", json!({ "base": g.provenance(), "matrix": mat, "offset": b }));
    MetricField::new(chart, kind_of(&[g]), prov, Arc::new(pb))
}
