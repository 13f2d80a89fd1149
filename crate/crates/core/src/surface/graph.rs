use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::height::{HeightProfile, LocalHeight};
use super::local::{graph_embedding, graph_geometry, unit_normal, LocalGeometry};
use super::mesh::BaseMesh;
use crate::curvature::DerivMode;
use crate::error::{Error, Result};
use crate::metric::MetricField;

/// Which side of the graph is the in-region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Coorientation {
    #[default]
    BelowIn,
    AboveIn,
}

impl Coorientation {
    /// `+1` when the outward normal points toward increasing `t`.
    pub fn sign(self) -> f64 {
        match self {
            Coorientation::BelowIn => 1.0,
            Coorientation::AboveIn => -1.0,
        }
    }
}

/// A point of a graph surface: a mesh vertex or a base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SurfacePoint {
    Vertex(usize),
    Base([f64; 2]),
}

/// Graph `t = u(x)` over a triangulated base.
#[derive(Clone, Debug)]
pub struct GraphSurface {
    pub base: Arc<BaseMesh>,
    pub heights: Vec<f64>,
    pub t_range: [f64; 2],
    pub coorientation: Coorientation,
    /// Closed form the heights were sampled from, if any.
    pub profile: Option<HeightProfile>,
}

/// JSON exchange form of a [`GraphSurface`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceFile {
    pub base: BaseMesh,
    pub heights: Vec<f64>,
    pub t_range: [f64; 2],
    #[serde(default)]
    pub coorientation: Coorientation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<HeightProfile>,
}

const RANGE_SLACK: f64 = 1e-12;

impl GraphSurface {
    pub fn new(base: Arc<BaseMesh>, heights: Vec<f64>, t_range: [f64; 2], coorientation: Coorientation) -> Result<Self> {
        if heights.len() != base.vertices.len() {
            return Err(Error::InvalidParameter(format!(
                "{} heights for {} vertices",
                heights.len(),
                base.vertices.len()
            )));
        }
        if !(t_range[0] < t_range[1]) {
            return Err(Error::InvalidParameter("t-range must satisfy lo < hi".into()));
        }
        let slack = RANGE_SLACK * (1.0 + t_range[0].abs().max(t_range[1].abs()));
        if let Some((i, u)) =
            heights.iter().enumerate().find(|(_, &u)| !(u >= t_range[0] - slack && u <= t_range[1] + slack))
        {
            return Err(Error::InvalidParameter(format!("height {u} at vertex {i} is outside {t_range:?}")));
        }
        Ok(GraphSurface { base, heights, t_range, coorientation, profile: None })
    }

    /// Samples a closed-form profile at the vertices and keeps it for exact evaluation.
    pub fn from_profile(
        base: Arc<BaseMesh>,
        profile: HeightProfile,
        t_range: [f64; 2],
        coorientation: Coorientation,
    ) -> Result<Self> {
        let heights = base.vertices.iter().map(|&p| profile.value(p)).collect();
        let mut s = Self::new(base, heights, t_range, coorientation)?;
        s.profile = Some(profile);
        Ok(s)
    }

    pub fn constant(base: Arc<BaseMesh>, value: f64, t_range: [f64; 2]) -> Result<Self> {
        Self::from_profile(base, HeightProfile::Constant { value }, t_range, Coorientation::BelowIn)
    }

    /// Same base and range with new heights; the closed form is dropped.
    pub fn with_heights(&self, heights: Vec<f64>) -> Result<Self> {
        Self::new(self.base.clone(), heights, self.t_range, self.coorientation)
    }

    pub fn vertex_point(&self, v: usize) -> [f64; 3] {
        let p = self.base.vertices[v];
        [p[0], p[1], self.heights[v]]
    }

    fn vertex_of(&self, at: SurfacePoint) -> Result<Option<usize>> {
        match at {
            SurfacePoint::Vertex(v) if v >= self.heights.len() => {
                Err(Error::InvalidParameter(format!("vertex {v} out of range")))
            }
            SurfacePoint::Vertex(v) => Ok(Some(v)),
            SurfacePoint::Base(_) => Ok(None),
        }
    }

    pub fn base_point(&self, at: SurfacePoint) -> [f64; 2] {
        match at {
            SurfacePoint::Vertex(v) => self.base.vertices[v],
            SurfacePoint::Base(p) => p,
        }
    }

    fn nearest_vertex(&self, p: [f64; 2]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, q) in self.base.vertices.iter().enumerate() {
            let d = (q[0] - p[0]).hypot(q[1] - p[1]);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    /// Least-squares quadratic through the vertex height, fitted over the 2-ring in base coordinates.
    pub fn quadratic_fit(&self, v: usize) -> Result<LocalHeight> {
        let ring = self.base.two_ring(v);
        if ring.len() < 5 {
            return Err(Error::InsufficientRing(v));
        }
        let c = self.base.vertices[v];
        let u0 = self.heights[v];
        let scale = ring
            .iter()
            .map(|&w| {
                let q = self.base.vertices[w];
                (q[0] - c[0]).hypot(q[1] - c[1])
            })
            .sum::<f64>()
            / ring.len() as f64;
        let a = DMatrix::from_fn(ring.len(), 5, |r, k| {
            let q = self.base.vertices[ring[r]];
            let (dx, dy) = ((q[0] - c[0]) / scale, (q[1] - c[1]) / scale);
            [dx, dy, 0.5 * dx * dx, dx * dy, 0.5 * dy * dy][k]
        });
        let b = DVector::from_fn(ring.len(), |r, _| self.heights[ring[r]] - u0);
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        if svd.singular_values.min() <= 1e-10 * smax {
            return Err(Error::InsufficientRing(v));
        }
        let x = svd.solve(&b, 0.0).map_err(|_| Error::InsufficientRing(v))?;
        let s2 = scale * scale;
        Ok(LocalHeight::Fit {
            center: c,
            u0,
            grad: [x[0] / scale, x[1] / scale],
            hess: [[x[2] / s2, x[3] / s2], [x[3] / s2, x[4] / s2]],
        })
    }

    /// Height model used at a point: the closed form when present, otherwise the vertex fit
    /// (nearest vertex for base points).
    pub fn local_height(&self, at: SurfacePoint) -> Result<LocalHeight> {
        if let Some(p) = &self.profile {
            return Ok(LocalHeight::Profile(p.clone()));
        }
        let v = match self.vertex_of(at)? {
            Some(v) => v,
            None => self.nearest_vertex(self.base_point(at)),
        };
        self.quadratic_fit(v)
    }

    pub fn geometry(&self, g: &MetricField, at: SurfacePoint, mode: DerivMode) -> Result<LocalGeometry> {
        let model = self.local_height(at)?;
        graph_geometry(g, &model, self.base_point(at), self.coorientation.sign(), mode)
    }

    pub fn induced_metric(&self, g: &MetricField, at: SurfacePoint) -> Result<[[f64; 2]; 2]> {
        Ok(self.geometry(g, at, DerivMode::Auto)?.induced)
    }

    pub fn second_fundamental_form(&self, g: &MetricField, at: SurfacePoint) -> Result<[[f64; 2]; 2]> {
        Ok(self.geometry(g, at, DerivMode::Auto)?.second)
    }

    pub fn mean_curvature(&self, g: &MetricField, at: SurfacePoint) -> Result<f64> {
        Ok(self.geometry(g, at, DerivMode::Auto)?.mean)
    }

    /// Outward unit g-normal (only first derivatives of the height are used).
    pub fn normal(&self, g: &MetricField, at: SurfacePoint) -> Result<([f64; 3], [f64; 3])> {
        let model = self.local_height(at)?;
        let p = self.base_point(at);
        let (x, xa, _) = graph_embedding(p, &model.jet(p));
        Ok((x, unit_normal(&g.eval(&x), &xa, self.coorientation.sign())?))
    }

    /// Angle between the surface and side face `side` at a boundary point: `arccos(−g(ν_Y, ν_F))`.
    pub fn contact_angle(&self, g: &MetricField, side: usize, at: SurfacePoint) -> Result<f64> {
        let shape = self
            .base
            .sides
            .get(side)
            .ok_or_else(|| Error::InvalidParameter(format!("no side {side}")))?;
        let p = self.base_point(at);
        let on_side = match self.vertex_of(at)? {
            Some(v) => self.base.vertex_sides(v).contains(&side),
            None => shape.distance(p) <= 1e-9,
        };
        if !on_side {
            return Err(Error::NotOnFace { face: side, point: p.to_vec() });
        }
        let (x, nu) = self.normal(g, at)?;
        let gm = g.eval(&x);
        let n = shape.outward_normal(p);
        let nf = unit_normal_of_covector(&gm, [n[0], n[1], 0.0])?;
        angle_between_normals(&gm, &nu, &nf)
    }

    pub fn to_file(&self) -> SurfaceFile {
        SurfaceFile {
            base: (*self.base).clone(),
            heights: self.heights.clone(),
            t_range: self.t_range,
            coorientation: self.coorientation,
            profile: self.profile.clone(),
        }
    }

    pub fn from_file(f: SurfaceFile) -> Result<Self> {
        let base = Arc::new(f.base.rebuilt()?);
        let mut s = Self::new(base, f.heights, f.t_range, f.coorientation)?;
        s.profile = f.profile;
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(&self.to_file())?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f: SurfaceFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::from_file(f)
    }
}

impl Serialize for GraphSurface {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

/// Unit g-normal vector `g⁻¹c / |c|` of the hyperplane annihilated by covector `c`.
pub fn unit_normal_of_covector(gm: &crate::linalg::SMat<f64>, c: [f64; 3]) -> Result<[f64; 3]> {
    let ginv = gm.inverse().ok_or(Error::SingularMetric { point: vec![] })?;
    let v = ginv.mul_vec(&c);
    let n2 = c[0] * v[0] + c[1] * v[1] + c[2] * v[2];
    if !(n2 > 0.0) {
        return Err(Error::Degenerate("zero covector".into()));
    }
    let s = 1.0 / n2.sqrt();
    Ok([v[0] * s, v[1] * s, v[2] * s])
}

/// `arccos(−g(a, b))` for outward unit normals; tangential contact is an error.
pub fn angle_between_normals(gm: &crate::linalg::SMat<f64>, a: &[f64], b: &[f64]) -> Result<f64> {
    // symmetrized so the angle does not depend on the argument order
    let c = -0.5 * (gm.quad(a, b) + gm.quad(b, a));
    if c.abs() > 1.0 - 1e-9 {
        return Err(Error::TangentialContact { cos: c });
    }
    Ok(c.acos())
}
