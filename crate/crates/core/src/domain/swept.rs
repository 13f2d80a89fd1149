//! Cubical domains swept out by normal geodesics of a surface patch.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::audit::{audit, AuditOptions, AuditReport};
use super::scheme::CombinatorialScheme;
use super::{face_geometry_at, CorneredDomain, Realization};
use crate::curvature::{accel, curvature, DerivMode};
use crate::error::{Error, Result};
use crate::metric::MetricField;
use crate::surface::{graph_embedding, unit_normal, GraphSurface, SurfacePoint};

/// Square of half-width `half` around `center` whose four sides bow inward by `sagitta`
/// (parabolic arcs), blended into a Coons patch over the unit square.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvedQuad {
    pub center: [f64; 2],
    pub half: f64,
    #[serde(default)]
    pub sagitta: f64,
}

impl CurvedQuad {
    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        let [s, t] = xi;
        let b4 = 4.0 * self.sagitta;
        [
            self.center[0] + (2.0 * s - 1.0) * self.half + b4 * t * (1.0 - t) * (1.0 - 2.0 * s),
            self.center[1] + (2.0 * t - 1.0) * self.half + b4 * s * (1.0 - s) * (1.0 - 2.0 * t),
        ]
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ThickeningOptions {
    /// RK4 steps per normal geodesic.
    pub steps: usize,
    /// Parameter-space finite-difference step for the face jets.
    pub fd_step: f64,
    /// Outward flare (radians, approximately) of the sides at the top and bottom; positive
    /// values make the horizontal edges strictly acute.
    pub taper: f64,
    /// Largest admissible `|H|` of the patch at its center.
    pub h_tolerance: f64,
    pub mode: DerivMode,
    pub audit: AuditOptions,
}

impl Default for ThickeningOptions {
    fn default() -> Self {
        ThickeningOptions {
            steps: 16,
            fd_step: 1e-3,
            taper: 0.0,
            h_tolerance: 1e-3,
            mode: DerivMode::Auto,
            audit: AuditOptions { face_samples: 16, edge_samples: 8, ..Default::default() },
        }
    }
}

/// `Φ(ξ₁, ξ₂, t) = exp_{P(ξ)}(t·ν(ξ))` for the patch point `P` over `quad(ξ)`.
#[derive(Clone, Debug)]
pub struct SweptMap {
    pub metric: MetricField,
    pub patch: GraphSurface,
    pub quad: CurvedQuad,
    pub eps: f64,
    pub steps: usize,
    pub fd_step: f64,
    pub taper: f64,
    pub mode: DerivMode,
}

fn add3(a: &[f64; 3], b: &[f64; 3], c: f64) -> [f64; 3] {
    [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]]
}

impl SweptMap {
    /// Patch point and upward unit normal over base point `p`.
    fn foot(&self, p: [f64; 2]) -> Result<([f64; 3], [f64; 3])> {
        let jet = self.patch.local_height(SurfacePoint::Base(p))?.jet(p);
        let (x, xa, _) = graph_embedding(p, &jet);
        Ok((x, unit_normal(&self.metric.eval(&x), &xa, 1.0)?))
    }

    pub fn eval(&self, q: [f64; 3]) -> Result<[f64; 3]> {
        let t = q[2];
        let shrink = 1.0 + self.taper * t * t / (2.0 * self.eps * self.quad.half);
        let xi = [0.5 + shrink * (q[0] - 0.5), 0.5 + shrink * (q[1] - 0.5)];
        let (x0, nu) = self.foot(self.quad.map(xi))?;
        let exit = |x: &[f64; 3], s: f64| Error::ChartExit { arc_length: s * t.abs(), point: x.to_vec() };
        let mut x = x0;
        let mut v = [t * nu[0], t * nu[1], t * nu[2]];
        let h = 1.0 / self.steps as f64;
        let acc = |x: &[f64; 3], v: &[f64; 3], s: f64| -> Result<[f64; 3]> {
            let a = accel(&self.metric, x, v, self.mode).map_err(|_| exit(x, s))?;
            Ok([a[0], a[1], a[2]])
        };
        for i in 0..self.steps {
            let s = i as f64 * h;
            let k1v = acc(&x, &v, s)?;
            let (x2, v2) = (add3(&x, &v, 0.5 * h), add3(&v, &k1v, 0.5 * h));
            let k2v = acc(&x2, &v2, s)?;
            let (x3, v3) = (add3(&x, &v2, 0.5 * h), add3(&v, &k2v, 0.5 * h));
            let k3v = acc(&x3, &v3, s)?;
            let (x4, v4) = (add3(&x, &v3, h), add3(&v, &k3v, h));
            let k4v = acc(&x4, &v4, s)?;
            for k in 0..3 {
                x[k] += h / 6.0 * (v[k] + 2.0 * v2[k] + 2.0 * v3[k] + v4[k]);
                v[k] += h / 6.0 * (k1v[k] + 2.0 * k2v[k] + 2.0 * k3v[k] + k4v[k]);
            }
        }
        if !self.metric.chart().contains(&x) {
            return Err(exit(&x, 1.0));
        }
        Ok(x)
    }

    /// Pushforward of parameter direction `d` at `q` (central difference).
    pub fn directional_first(&self, q: [f64; 3], d: [f64; 3]) -> Result<[f64; 3]> {
        let h = self.fd_step;
        let p = self.eval(add3(&q, &d, h))?;
        let m = self.eval(add3(&q, &d, -h))?;
        Ok([(p[0] - m[0]) / (2.0 * h), (p[1] - m[1]) / (2.0 * h), (p[2] - m[2]) / (2.0 * h)])
    }

    /// `(Φ, ∂_a Φ, ∂_a∂_b Φ, Φ_* outward)` along parameter directions `e`.
    #[allow(clippy::type_complexity)]
    pub fn directional_jet(
        &self,
        q: [f64; 3],
        e: [[f64; 3]; 2],
        outward: [f64; 3],
    ) -> Result<([f64; 3], [[f64; 3]; 2], [[[f64; 3]; 2]; 2], [f64; 3])> {
        let h = self.fd_step;
        let at = |a: f64, b: f64| self.eval(add3(&add3(&q, &e[0], a * h), &e[1], b * h));
        let x = at(0.0, 0.0)?;
        let mut xa = [[0.0; 3]; 2];
        let mut xab = [[[0.0; 3]; 2]; 2];
        for a in 0..2 {
            let (da, db) = if a == 0 { (1.0, 0.0) } else { (0.0, 1.0) };
            let p = at(da, db)?;
            let m = at(-da, -db)?;
            for k in 0..3 {
                xa[a][k] = (p[k] - m[k]) / (2.0 * h);
                xab[a][a][k] = (p[k] - 2.0 * x[k] + m[k]) / (h * h);
            }
        }
        let (pp, pm, mp, mm) = (at(1.0, 1.0)?, at(1.0, -1.0)?, at(-1.0, 1.0)?, at(-1.0, -1.0)?);
        for k in 0..3 {
            let v = (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h);
            xab[0][1][k] = v;
            xab[1][0][k] = v;
        }
        Ok((x, xa, xab, self.directional_first(q, outward)?))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThickeningReport {
    pub eps: f64,
    /// Patch point over the quad center.
    pub center: [f64; 3],
    pub patch_mean_curvature: f64,
    /// `|A|²` of the patch at the center.
    pub a_norm2: f64,
    pub ricci_normal: f64,
    pub scal_center: f64,
    /// Top and bottom mean curvature over the quad center.
    pub h_top: f64,
    pub h_bottom: f64,
    /// First-order prediction `−ε(Ric(ν,ν) + |A|²)` for both.
    pub predicted: f64,
    pub audit: AuditReport,
    #[serde(skip)]
    pub domain: CorneredDomain,
}

/// Sweeps `patch` over `quad` by normal geodesics of length up to `eps` each way and audits
/// the resulting cubical domain.
pub fn normal_thickening(
    g: &MetricField,
    patch: &GraphSurface,
    quad: CurvedQuad,
    eps: f64,
    opts: &ThickeningOptions,
) -> Result<ThickeningReport> {
    if g.dim() != 3 {
        return Err(Error::InvalidParameter("normal thickening needs a 3-dimensional metric".into()));
    }
    if !(eps > 0.0) || !(quad.half > 0.0) || opts.steps == 0 || !(opts.fd_step > 0.0) {
        return Err(Error::InvalidParameter("thickening needs eps, half, steps and fd_step positive".into()));
    }
    let at = SurfacePoint::Base(quad.center);
    let geo = patch.geometry(g, at, opts.mode)?;
    if geo.mean.abs() > opts.h_tolerance {
        return Err(Error::InvalidParameter(format!(
            "patch mean curvature {} at the center exceeds {}",
            geo.mean, opts.h_tolerance
        )));
    }
    let map = SweptMap {
        metric: g.clone(),
        patch: patch.clone(),
        quad,
        eps,
        steps: opts.steps,
        fd_step: opts.fd_step,
        taper: opts.taper,
        mode: opts.mode,
    };
    let (_, up) = map.foot(quad.center)?;
    let cs = curvature(g, &geo.point, opts.mode)?;
    let ricci_normal = cs.ricci_quad(&up);
    // |A|² does not depend on the normal's orientation
    let a_norm2 = geo.norm_sq();
    let domain = CorneredDomain { scheme: CombinatorialScheme::cube(), realization: Realization::Swept(Arc::new(map)) };
    domain.scheme.validate()?;
    let r = &domain.realization;
    let h_top = face_geometry_at(g, &domain, r.top(), [0.5, 0.5], opts.mode)?.mean;
    let h_bottom = face_geometry_at(g, &domain, r.bottom(), [0.5, 0.5], opts.mode)?.mean;
    let report = audit(g, &domain, &opts.audit)?;
    Ok(ThickeningReport {
        eps,
        center: geo.point,
        patch_mean_curvature: geo.mean,
        a_norm2,
        ricci_normal,
        scal_center: cs.scalar,
        h_top,
        h_bottom,
        predicted: -eps * (ricci_normal + a_norm2),
        audit: report,
        domain,
    })
}
