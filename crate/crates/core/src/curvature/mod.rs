//! Levi-Civita connection and curvature of a [`MetricField`].
//!
//! Index convention (fixed once):
//! `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`,
//! `R^ρ_{σμν} = ∂_μ Γ^ρ_{νσ} − ∂_ν Γ^ρ_{μσ} + Γ^ρ_{μλ}Γ^λ_{νσ} − Γ^ρ_{νλ}Γ^λ_{μσ}`,
//! `Ric_{σν} = R^ρ_{σρν}`, `scal = g^{σν} Ric_{σν}`, and
//! `K(u,v) = R_{ρσμν}u^ρ v^σ u^μ v^ν / (|u|²|v|² − ⟨u,v⟩²)`, so the unit sphere has `K = 1`.

mod geodesic;
mod tube;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SMat;
use crate::metric::MetricField;
use crate::num::MAX_DIM;

pub use geodesic::{geodesic, geodesic_with_velocity, GeodesicPath};
pub(crate) use geodesic::accel;
pub use tube::{tube_evolve, BlowUp, ShapeState, TubeTrajectory};

/// Default finite-difference step in chart units.
pub const DEFAULT_STEP: f64 = 1e-3;

/// How metric derivatives are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum DerivMode {
    /// Exact jets when the field provides them, otherwise finite differences at the default step.
    Auto,
    Exact,
    FiniteDifference { h: f64 },
}

impl Default for DerivMode {
    fn default() -> Self {
        DerivMode::Auto
    }
}

/// Metric value with first and second partials at a point.
#[derive(Clone, Copy, Debug)]
pub struct MetricDerivs {
    pub n: usize,
    pub g: SMat<f64>,
    /// `dg[k] = ∂_k g`.
    pub dg: [SMat<f64>; MAX_DIM],
    /// `ddg[k][l] = ∂_k ∂_l g`.
    pub ddg: [[SMat<f64>; MAX_DIM]; MAX_DIM],
    /// Finite-difference step, or `None` for exact derivatives.
    pub step: Option<f64>,
}

type Arr3 = [[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM];
type Arr4 = [[[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM]; MAX_DIM];

/// Curvature data at one chart point.
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureSample {
    pub point: Vec<f64>,
    pub n: usize,
    /// `christoffel[k][i][j] = Γ^k_ij`.
    pub christoffel: Arr3,
    /// `riemann[ρ][σ][μ][ν] = R^ρ_{σμν}`.
    pub riemann: Arr4,
    pub ricci: [[f64; MAX_DIM]; MAX_DIM],
    pub scalar: f64,
    /// Step used, `None` when derivatives were exact.
    pub step: Option<f64>,
    #[serde(skip)]
    pub metric: SMat<f64>,
    #[serde(skip)]
    pub inverse: SMat<f64>,
}

fn zero_mats() -> [SMat<f64>; MAX_DIM] {
    [SMat::zeros(0); MAX_DIM]
}

/// 4th-order central differences of a matrix-valued function.
pub fn fd_derivs(f: impl Fn(&[f64]) -> SMat<f64>, x: &[f64], h: f64) -> MetricDerivs {
    let n = x.len();
    let g = f(x);
    let at = |shifts: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(k, s) in shifts {
            y[k] += s;
        }
        f(&y)
    };
    let comb = |terms: &[(f64, SMat<f64>)], scale: f64| {
        let mut m = SMat::zeros(g.n);
        for (c, t) in terms {
            for i in 0..g.n {
                for j in 0..g.n {
                    m.a[i][j] += c * t.a[i][j];
                }
            }
        }
        m.scale(scale)
    };
    let mut dg = zero_mats();
    let mut ddg = [zero_mats(); MAX_DIM];
    let mut line = vec![[SMat::zeros(g.n); 5]; n];
    for k in 0..n {
        for (idx, s) in [-2.0, -1.0, 1.0, 2.0].iter().enumerate() {
            let slot = if idx < 2 { idx } else { idx + 1 };
            line[k][slot] = at(&[(k, s * h)]);
        }
        line[k][2] = g;
        let l = &line[k];
        dg[k] = comb(&[(1.0, l[0]), (-8.0, l[1]), (8.0, l[3]), (-1.0, l[4])], 1.0 / (12.0 * h));
        ddg[k][k] = comb(
            &[(-1.0, l[0]), (16.0, l[1]), (-30.0, l[2]), (16.0, l[3]), (-1.0, l[4])],
            1.0 / (12.0 * h * h),
        );
    }
    let w = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
    for k in 0..n {
        for l in 0..k {
            let mut m = SMat::zeros(g.n);
            for &(sk, ck) in &w {
                for &(sl, cl) in &w {
                    let v = at(&[(k, sk * h), (l, sl * h)]);
                    for i in 0..g.n {
                        for j in 0..g.n {
                            m.a[i][j] += ck * cl * v.a[i][j];
                        }
                    }
                }
            }
            let m = m.scale(1.0 / (144.0 * h * h));
            ddg[k][l] = m;
            ddg[l][k] = m;
        }
    }
    MetricDerivs { n, g, dg, ddg, step: Some(h) }
}

/// Metric derivatives at `x`, checking the chart margin the stencil needs.
pub fn metric_derivs(g: &MetricField, x: &[f64], mode: DerivMode, margin_steps: f64) -> Result<MetricDerivs> {
    let n = g.dim();
    if x.len() != n {
        return Err(Error::InvalidParameter(format!("point has {} coordinates, metric has {n}", x.len())));
    }
    let exact = match mode {
        DerivMode::Exact => {
            Some(g.jet(x).ok_or_else(|| Error::InvalidParameter("metric has no exact derivatives".into()))?)
        }
        DerivMode::Auto => g.jet(x),
        DerivMode::FiniteDifference { .. } => None,
    };
    if let Some(j) = exact {
        g.chart().require_margin(x, 0.0)?;
        let mut d = MetricDerivs { n, g: j.map_f64(), dg: zero_mats(), ddg: [zero_mats(); MAX_DIM], step: None };
        for k in 0..n {
            d.dg[k] = SMat::from_fn(n, |a, b| j.a[a][b].d[k]);
            for l in 0..n {
                d.ddg[k][l] = SMat::from_fn(n, |a, b| j.a[a][b].h[k][l]);
            }
        }
        return Ok(d);
    }
    let h = match mode {
        DerivMode::FiniteDifference { h } => h,
        _ => DEFAULT_STEP,
    };
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("finite-difference step must be positive, got {h}")));
    }
    g.chart().require_margin(x, margin_steps * h)?;
    Ok(fd_derivs(|y| g.eval(y), x, h))
}

/// Christoffel symbols and their first derivatives from metric derivatives.
pub fn connection(d: &MetricDerivs) -> Result<(SMat<f64>, Arr3, Arr4)> {
    let n = d.n;
    let ginv = d.g.inverse().ok_or(Error::SingularMetric { point: vec![] })?;
    let mut gam = [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM];
    // lowered: L_{lij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let mut low = [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                low[l][i][j] = 0.5 * (d.dg[i].a[j][l] + d.dg[j].a[i][l] - d.dg[l].a[i][j]);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                gam[k][i][j] = (0..n).map(|l| ginv.a[k][l] * low[l][i][j]).sum();
            }
        }
    }
    // ∂_m Γ^k_ij = ∂_m g^{kl} L_{lij} + g^{kl} ∂_m L_{lij},  ∂_m g^{kl} = −g^{ka} ∂_m g_ab g^{bl}
    let mut dgam = [[[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM]; MAX_DIM];
    for m in 0..n {
        let mut dinv = [[0.0; MAX_DIM]; MAX_DIM];
        for k in 0..n {
            for l in 0..n {
                let mut s = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        s -= ginv.a[k][a] * d.dg[m].a[a][b] * ginv.a[b][l];
                    }
                }
                dinv[k][l] = s;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        let dlow = 0.5
                            * (d.ddg[m][i].a[j][l] + d.ddg[m][j].a[i][l] - d.ddg[m][l].a[i][j]);
                        s += dinv[k][l] * low[l][i][j] + ginv.a[k][l] * dlow;
                    }
                    dgam[m][k][i][j] = s;
                }
            }
        }
    }
    Ok((ginv, gam, dgam))
}

/// Full curvature data from metric derivatives.
pub fn curvature_from_derivs(d: &MetricDerivs, point: &[f64]) -> Result<CurvatureSample> {
    let n = d.n;
    let (ginv, gam, dgam) = connection(d).map_err(|_| Error::SingularMetric { point: point.to_vec() })?;
    let mut riem = [[[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM]; MAX_DIM];
    for r in 0..n {
        for s in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    let mut v = dgam[mu][r][nu][s] - dgam[nu][r][mu][s];
                    for l in 0..n {
                        v += gam[r][mu][l] * gam[l][nu][s] - gam[r][nu][l] * gam[l][mu][s];
                    }
                    riem[r][s][mu][nu] = v;
                }
            }
        }
    }
    let mut ric = [[0.0; MAX_DIM]; MAX_DIM];
    for s in 0..n {
        for nu in 0..n {
            ric[s][nu] = (0..n).map(|r| riem[r][s][r][nu]).sum();
        }
    }
    let mut scal = 0.0;
    for s in 0..n {
        for nu in 0..n {
            scal += ginv.a[s][nu] * ric[s][nu];
        }
    }
    Ok(CurvatureSample {
        point: point.to_vec(),
        n,
        christoffel: gam,
        riemann: riem,
        ricci: ric,
        scalar: scal,
        step: d.step,
        metric: d.g,
        inverse: ginv,
    })
}

/// Curvature at `x`; finite differences require a chart margin of `3h`.
pub fn curvature(g: &MetricField, x: &[f64], mode: DerivMode) -> Result<CurvatureSample> {
    let d = metric_derivs(g, x, mode, 3.0)?;
    curvature_from_derivs(&d, x)
}

/// `Γ^k_ij` at `x` (finite-difference margin `2h`).
pub fn christoffel(g: &MetricField, x: &[f64], mode: DerivMode) -> Result<Arr3> {
    let d = metric_derivs(g, x, mode, 2.0)?;
    let n = d.n;
    let ginv = d.g.inverse().ok_or_else(|| Error::SingularMetric { point: x.to_vec() })?;
    let mut gam = [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                gam[k][i][j] = (0..n)
                    .map(|l| ginv.a[k][l] * 0.5 * (d.dg[i].a[j][l] + d.dg[j].a[i][l] - d.dg[l].a[i][j]))
                    .sum();
            }
        }
    }
    Ok(gam)
}

pub fn scalar_curvature(g: &MetricField, x: &[f64], mode: DerivMode) -> Result<f64> {
    Ok(curvature(g, x, mode)?.scalar)
}

impl CurvatureSample {
    /// Lowered tensor `R_{ρσμν} = g_{ρα} R^α_{σμν}`.
    pub fn riemann_lowered(&self) -> Arr4 {
        let n = self.n;
        let mut out = [[[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM]; MAX_DIM];
        for r in 0..n {
            for s in 0..n {
                for mu in 0..n {
                    for nu in 0..n {
                        out[r][s][mu][nu] = (0..n).map(|a| self.metric.a[r][a] * self.riemann[a][s][mu][nu]).sum();
                    }
                }
            }
        }
        out
    }

    pub fn ricci_matrix(&self) -> SMat<f64> {
        SMat::from_fn(self.n, |i, j| self.ricci[i][j])
    }

    /// `Ric(v, v)` for a tangent vector `v`.
    pub fn ricci_quad(&self, v: &[f64]) -> f64 {
        self.ricci_matrix().quad(v, v)
    }

    /// Sectional curvature of the plane spanned by `u` and `v`.
    pub fn sectional(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        let r = self.riemann_lowered();
        let n = self.n;
        let mut num = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        num += r[a][b][c][d] * u[a] * v[b] * u[c] * v[d];
                    }
                }
            }
        }
        let uu = self.metric.quad(u, u);
        let vv = self.metric.quad(v, v);
        let uv = self.metric.quad(u, v);
        let den = uu * vv - uv * uv;
        if den <= 1e-14 * uu * vv {
            return Err(Error::Degenerate("sectional curvature of a degenerate plane".into()));
        }
        Ok(num / den)
    }

    /// Largest violation among the algebraic Riemann symmetries and the first Bianchi identity.
    pub fn symmetry_residual(&self) -> f64 {
        let r = self.riemann_lowered();
        let n = self.n;
        let mut res: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        res = res.max((r[a][b][c][d] + r[b][a][c][d]).abs());
                        res = res.max((r[a][b][c][d] + r[a][b][d][c]).abs());
                        res = res.max((r[a][b][c][d] - r[c][d][a][b]).abs());
                        res = res.max((r[a][b][c][d] + r[a][c][d][b] + r[a][d][b][c]).abs());
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                res = res.max((self.ricci[i][j] - self.ricci[j][i]).abs());
            }
        }
        res
    }
}
