//! Cornered domains: prisms and cubes in a chart, and boxes swept by normal geodesics.
//!
//! Every realization is described in a parameter space `(ξ₁, ξ₂, t)`: a base polygon in
//! `(ξ₁, ξ₂)` times a `t`-interval, pushed into the chart by an embedding `Φ`. Faces are
//! `side-i` (over polygon side `i`), `bottom` (`t = t₀`) and `top` (`t = t₁`).

mod audit;
mod scheme;
mod swept;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curvature::DerivMode;
use crate::error::{Error, Result};
use crate::linalg::cross3;
use crate::metric::MetricField;
use crate::surface::{angle_between_normals, local_geometry, unit_normal, LocalGeometry};

pub use audit::{audit, AuditOptions, AuditReport, EdgeAudit, FaceAudit};
pub use scheme::{halton2, radical_inverse, CombinatorialScheme, EdgeBound};
pub use swept::{normal_thickening, CurvedQuad, SweptMap, ThickeningOptions, ThickeningReport};

/// Geometric realization of a cornered domain.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Realization {
    /// Counter-clockwise simple polygon times an interval, in chart coordinates.
    Prism { base: Vec<[f64; 2]>, t_range: [f64; 2] },
    /// Axis-aligned box.
    Cube { lower: [f64; 3], upper: [f64; 3] },
    /// Unit parameter square times `[−ε, ε]` pushed forward by a normal sweep.
    #[serde(skip)]
    Swept(Arc<SweptMap>),
}

/// Outward-oriented embedding jet of a face at one point.
#[derive(Clone, Copy, Debug)]
pub struct FaceJet {
    pub x: [f64; 3],
    pub xa: [[f64; 3]; 2],
    pub xab: [[[f64; 3]; 2]; 2],
    /// Orientation making `X₁ × X₂` outward.
    pub sign: f64,
}

/// A point on an edge with the two face jets there and into-face tangents.
#[derive(Clone, Copy, Debug)]
pub struct EdgeSample {
    pub point: [f64; 3],
    pub faces: (usize, usize),
    pub jets: (FaceJet, FaceJet),
    /// Chart tangent of the second face pointing away from the edge.
    pub into_second: [f64; 3],
}

/// Parameter-space description of a face.
#[derive(Clone, Copy, Debug)]
struct FaceFrame {
    origin: [f64; 3],
    e: [[f64; 3]; 2],
    outward: [f64; 3],
}

impl Realization {
    pub fn polygon(&self) -> Vec<[f64; 2]> {
        match self {
            Realization::Prism { base, .. } => base.clone(),
            Realization::Cube { lower, upper } => {
                vec![[lower[0], lower[1]], [upper[0], lower[1]], [upper[0], upper[1]], [lower[0], upper[1]]]
            }
            Realization::Swept(_) => vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        }
    }

    pub fn t_range(&self) -> [f64; 2] {
        match self {
            Realization::Prism { t_range, .. } => *t_range,
            Realization::Cube { lower, upper } => [lower[2], upper[2]],
            Realization::Swept(s) => [-s.eps, s.eps],
        }
    }

    pub fn side_count(&self) -> usize {
        self.polygon().len()
    }

    pub fn face_count(&self) -> usize {
        self.side_count() + 2
    }

    pub fn bottom(&self) -> usize {
        self.side_count()
    }

    pub fn top(&self) -> usize {
        self.side_count() + 1
    }

    fn frame(&self, face: usize) -> Result<FaceFrame> {
        let poly = self.polygon();
        let k = poly.len();
        let [t0, t1] = self.t_range();
        if face < k {
            let (p, q) = (poly[face], poly[(face + 1) % k]);
            let d = [q[0] - p[0], q[1] - p[1]];
            let l = d[0].hypot(d[1]);
            Ok(FaceFrame {
                origin: [p[0], p[1], t0],
                e: [[d[0], d[1], 0.0], [0.0, 0.0, 1.0]],
                outward: [d[1] / l, -d[0] / l, 0.0],
            })
        } else if face == k || face == k + 1 {
            let t = if face == k { t0 } else { t1 };
            let o = if face == k { -1.0 } else { 1.0 };
            Ok(FaceFrame { origin: [0.0, 0.0, t], e: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], outward: [0.0, 0.0, o] })
        } else {
            Err(Error::InvalidParameter(format!("no face {face}")))
        }
    }

    /// Parameter-space point of a face at face coordinates `(a, b)`: `(s, t)` along a side,
    /// `(ξ₁, ξ₂)` on top and bottom.
    fn param_point(&self, face: usize, ab: [f64; 2]) -> Result<[f64; 3]> {
        let f = self.frame(face)?;
        if face < self.side_count() {
            Ok([f.origin[0] + ab[0] * f.e[0][0], f.origin[1] + ab[0] * f.e[0][1], ab[1]])
        } else {
            Ok([ab[0], ab[1], f.origin[2]])
        }
    }

    /// Chart point of parameter point `q`.
    pub fn embed(&self, q: [f64; 3]) -> Result<[f64; 3]> {
        match self {
            Realization::Swept(s) => s.eval(q),
            _ => Ok(q),
        }
    }

    fn jet_at(&self, face: usize, q: [f64; 3]) -> Result<FaceJet> {
        let f = self.frame(face)?;
        let (x, xa, xab, out) = match self {
            Realization::Swept(s) => s.directional_jet(q, f.e, f.outward)?,
            _ => (q, f.e, [[[0.0; 3]; 2]; 2], f.outward),
        };
        let c = cross3(&xa[0], &xa[1]);
        let dotp = c[0] * out[0] + c[1] * out[1] + c[2] * out[2];
        if dotp == 0.0 || !dotp.is_finite() {
            return Err(Error::Degenerate(format!("face {face} is degenerate at {x:?}")));
        }
        Ok(FaceJet { x, xa, xab, sign: dotp.signum() })
    }

    /// Face jet at face coordinates `ab`.
    pub fn face_jet(&self, face: usize, ab: [f64; 2]) -> Result<FaceJet> {
        let q = self.param_point(face, ab)?;
        self.jet_at(face, q)
    }

    /// Face-coordinate box: `[0,1] × [t₀,t₁]` for sides, the polygon bounding box otherwise.
    pub fn face_box(&self, face: usize) -> Result<([f64; 2], [f64; 2])> {
        let k = self.side_count();
        let [t0, t1] = self.t_range();
        if face < k {
            Ok(([0.0, t0], [1.0, t1]))
        } else if face < k + 2 {
            let poly = self.polygon();
            let mut lo = [f64::INFINITY; 2];
            let mut hi = [f64::NEG_INFINITY; 2];
            for p in &poly {
                for a in 0..2 {
                    lo[a] = lo[a].min(p[a]);
                    hi[a] = hi[a].max(p[a]);
                }
            }
            Ok((lo, hi))
        } else {
            Err(Error::InvalidParameter(format!("no face {face}")))
        }
    }

    /// Whether face coordinates lie in the face (polygon test for top and bottom).
    pub fn face_contains(&self, face: usize, ab: [f64; 2]) -> bool {
        if face < self.side_count() {
            let [t0, t1] = self.t_range();
            (0.0..=1.0).contains(&ab[0]) && ab[1] >= t0 && ab[1] <= t1
        } else {
            point_in_polygon(&self.polygon(), ab)
        }
    }

    /// Whether faces `i` and `j` meet along an edge.
    pub fn edge_exists(&self, i: usize, j: usize) -> bool {
        let k = self.side_count();
        let (a, b) = (i.min(j), i.max(j));
        if b >= k + 2 || a == b {
            return false;
        }
        if b < k {
            return b == a + 1 || (a == 0 && b == k - 1);
        }
        a < k && b >= k
    }

    /// Sample of edge `(i, j)` at parameter `s ∈ [0, 1]`; faces are ordered so that `i < j`.
    pub fn edge_sample(&self, i: usize, j: usize, s: f64) -> Result<EdgeSample> {
        if !self.edge_exists(i, j) {
            return Err(Error::InvalidParameter(format!("faces {i} and {j} do not share an edge")));
        }
        let (a, b) = (i.min(j), i.max(j));
        let k = self.side_count();
        let poly = self.polygon();
        let [t0, t1] = self.t_range();
        let (q, into) = if b < k {
            // vertical edge over the shared polygon vertex
            let t = t0 + s * (t1 - t0);
            if b == a + 1 {
                let (v, n) = (poly[b], poly[(b + 1) % k]);
                ([v[0], v[1], t], [n[0] - v[0], n[1] - v[1], 0.0])
            } else {
                let (v, pr) = (poly[0], poly[b]);
                ([v[0], v[1], t], [pr[0] - v[0], pr[1] - v[1], 0.0])
            }
        } else {
            let (p, n) = (poly[a], poly[(a + 1) % k]);
            let d = [n[0] - p[0], n[1] - p[1]];
            let t = if b == k { t0 } else { t1 };
            ([p[0] + s * d[0], p[1] + s * d[1], t], [-d[1], d[0], 0.0])
        };
        let ja = self.jet_at(a, q)?;
        let jb = self.jet_at(b, q)?;
        let into_second = match self {
            Realization::Swept(sw) => sw.directional_first(q, into)?,
            _ => into,
        };
        Ok(EdgeSample { point: ja.x, faces: (a, b), jets: (ja, jb), into_second })
    }

    /// Locates a chart point on edge `(i, j)` of a prism or cube; returns the edge parameter.
    pub fn locate_on_edge(&self, i: usize, j: usize, x: &[f64]) -> Option<f64> {
        if matches!(self, Realization::Swept(_)) || x.len() != 3 || !self.edge_exists(i, j) {
            return None;
        }
        let tol = 1e-9;
        let [t0, t1] = self.t_range();
        let k = self.side_count();
        let poly = self.polygon();
        let (a, b) = (i.min(j), i.max(j));
        if b < k {
            let v = if b == a + 1 { b } else { 0 };
            let p = poly[v];
            let ok = (x[0] - p[0]).hypot(x[1] - p[1]) <= tol && x[2] >= t0 - tol && x[2] <= t1 + tol;
            return ok.then(|| ((x[2] - t0) / (t1 - t0)).clamp(0.0, 1.0));
        }
        let t = if b == k { t0 } else { t1 };
        if (x[2] - t).abs() > tol {
            return None;
        }
        let (p, n) = (poly[a], poly[(a + 1) % k]);
        let d = [n[0] - p[0], n[1] - p[1]];
        let l2 = d[0] * d[0] + d[1] * d[1];
        let s = ((x[0] - p[0]) * d[0] + (x[1] - p[1]) * d[1]) / l2;
        let off = (x[0] - p[0] - s * d[0]).hypot(x[1] - p[1] - s * d[1]);
        (off <= tol && s >= -tol && s <= 1.0 + tol).then(|| s.clamp(0.0, 1.0))
    }

    /// Face coordinates of a chart point on a prism or cube face.
    pub fn locate_on_face(&self, face: usize, x: &[f64]) -> Option<[f64; 2]> {
        if matches!(self, Realization::Swept(_)) || x.len() != 3 || face >= self.face_count() {
            return None;
        }
        let tol = 1e-9;
        let k = self.side_count();
        let [t0, t1] = self.t_range();
        if face < k {
            let poly = self.polygon();
            let (p, n) = (poly[face], poly[(face + 1) % k]);
            let d = [n[0] - p[0], n[1] - p[1]];
            let l2 = d[0] * d[0] + d[1] * d[1];
            let s = ((x[0] - p[0]) * d[0] + (x[1] - p[1]) * d[1]) / l2;
            let off = (x[0] - p[0] - s * d[0]).hypot(x[1] - p[1] - s * d[1]);
            (off <= tol && (-tol..=1.0 + tol).contains(&s) && x[2] >= t0 - tol && x[2] <= t1 + tol)
                .then_some([s, x[2]])
        } else {
            let t = if face == k { t0 } else { t1 };
            ((x[2] - t).abs() <= tol && point_in_polygon(&self.polygon(), [x[0], x[1]])).then_some([x[0], x[1]])
        }
    }
}

/// Even-odd point-in-polygon test (boundary counts as inside within 1e-12).
pub fn point_in_polygon(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    let k = poly.len();
    let mut inside = false;
    for i in 0..k {
        let (a, b) = (poly[i], poly[(i + 1) % k]);
        let d = [b[0] - a[0], b[1] - a[1]];
        let cr = d[0] * (p[1] - a[1]) - d[1] * (p[0] - a[0]);
        let dot = (p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1];
        if cr.abs() <= 1e-12 * (1.0 + d[0].abs() + d[1].abs()) && dot >= 0.0 && dot <= d[0] * d[0] + d[1] * d[1] {
            return true;
        }
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let xc = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * d[0];
            if p[0] < xc {
                inside = !inside;
            }
        }
    }
    inside
}

/// Scheme plus realization.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorneredDomain {
    pub scheme: CombinatorialScheme,
    pub realization: Realization,
}

impl CorneredDomain {
    pub fn prism(base: Vec<[f64; 2]>, t_range: [f64; 2]) -> Result<Self> {
        if base.len() < 3 || !(t_range[0] < t_range[1]) {
            return Err(Error::InvalidParameter("prism needs ≥ 3 base vertices and t₀ < t₁".into()));
        }
        let area2: f64 = (0..base.len())
            .map(|i| {
                let (a, b) = (base[i], base[(i + 1) % base.len()]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum();
        if !(area2 > 0.0) {
            return Err(Error::InvalidParameter("prism base must be counter-clockwise".into()));
        }
        let scheme = CombinatorialScheme::prism(base.len());
        let d = CorneredDomain { scheme, realization: Realization::Prism { base, t_range } };
        d.validate()?;
        Ok(d)
    }

    pub fn cube(lower: [f64; 3], upper: [f64; 3]) -> Result<Self> {
        if (0..3).any(|a| !(lower[a] < upper[a])) {
            return Err(Error::InvalidParameter("cube needs lower < upper".into()));
        }
        Ok(CorneredDomain { scheme: CombinatorialScheme::cube(), realization: Realization::Cube { lower, upper } })
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        if self.scheme.faces.len() != self.realization.face_count() {
            return Err(Error::Invalid(format!(
                "scheme has {} faces, realization {}",
                self.scheme.faces.len(),
                self.realization.face_count()
            )));
        }
        for &(i, j) in &self.scheme.adjacency {
            if !self.realization.edge_exists(i, j) {
                return Err(Error::Invalid(format!("faces {i} and {j} do not meet in the realization")));
            }
        }
        Ok(())
    }

    fn edge_index(&self, i: usize, j: usize) -> Result<usize> {
        self.scheme
            .adjacency
            .iter()
            .position(|&(a, b)| (a, b) == (i, j) || (a, b) == (j, i))
            .ok_or_else(|| Error::InvalidParameter(format!("faces {i} and {j} are not adjacent")))
    }
}

/// Dihedral angle `arccos(−g(ν_i, ν_j))` from an edge sample, reflex wedges reported above `π`.
pub fn dihedral_from_sample(g: &MetricField, e: &EdgeSample) -> Result<f64> {
    let gm = g.eval(&e.point);
    let (a, b) = e.jets;
    let na = unit_normal(&gm, &a.xa, a.sign)?;
    let nb = unit_normal(&gm, &b.xa, b.sign)?;
    let theta = angle_between_normals(&gm, &na, &nb)?;
    // the second face bends beyond the first face's tangent plane in a reflex wedge
    let reach = gm.quad(&na, &e.into_second);
    Ok(if reach > 0.0 { 2.0 * PI - theta } else { theta })
}

/// Dihedral angle along edge `(i, j)` at edge parameter `s ∈ [0, 1]`; symmetric in `(i, j)`.
pub fn dihedral_angle_at(g: &MetricField, p: &CorneredDomain, i: usize, j: usize, s: f64) -> Result<f64> {
    p.edge_index(i, j)?;
    dihedral_from_sample(g, &p.realization.edge_sample(i, j, s)?)
}

/// Dihedral angle along edge `(i, j)` at chart point `x` (prism and cube realizations).
pub fn dihedral_angle(g: &MetricField, p: &CorneredDomain, i: usize, j: usize, x: &[f64]) -> Result<f64> {
    let idx = p.edge_index(i, j)?;
    let s = p
        .realization
        .locate_on_edge(i, j, x)
        .ok_or_else(|| Error::NotOnEdge { edge: idx, point: x.to_vec() })?;
    dihedral_angle_at(g, p, i, j, s)
}

/// Local geometry of a face with its outward normal, at face coordinates.
pub fn face_geometry_at(g: &MetricField, p: &CorneredDomain, face: usize, ab: [f64; 2], mode: DerivMode) -> Result<LocalGeometry> {
    let j = p.realization.face_jet(face, ab)?;
    local_geometry(g, j.x, j.xa, j.xab, j.sign, mode)
}

/// Mean curvature of a face at a chart point, positive when inward motion decreases area.
pub fn face_mean_curvature(g: &MetricField, p: &CorneredDomain, face: usize, x: &[f64]) -> Result<f64> {
    let ab = p
        .realization
        .locate_on_face(face, x)
        .ok_or_else(|| Error::NotOnFace { face, point: x.to_vec() })?;
    Ok(face_geometry_at(g, p, face, ab, DerivMode::Auto)?.mean)
}
