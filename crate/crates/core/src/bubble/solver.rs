use nalgebra::DMatrix;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::BubbleProblem;
use crate::curvature::DerivMode;
use crate::error::{Error, Result};
use crate::surface::{GraphSurface, SurfacePoint};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Exit threshold on the projected gradient, normalized per unit base area.
    pub gtol: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub initial_step: f64,
    /// Largest trial step; the preconditioned direction is Newton-like, so 1 is natural.
    pub max_step: f64,
    /// Step floor of the backtracking search.
    pub min_step: f64,
    /// Precondition with the slope-weighted base stiffness matrix.
    pub precondition: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iter: 500,
            gtol: 1e-6,
            armijo: 1e-4,
            initial_step: 1.0,
            max_step: 1.0,
            min_step: 1e-10,
            precondition: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// No sufficient decrease even after halving the step floor.
    LineSearchStall,
}

#[derive(Clone, Debug, Serialize)]
pub struct Residuals {
    /// `sup |H − φ|` over vertices whose one-ring is interior.
    pub interior_sup: f64,
    pub interior_at: [f64; 3],
    pub interior_samples: usize,
    /// `sup |cos∠ − ψ|` over non-corner boundary vertices.
    pub boundary_sup: f64,
    pub boundary_at: [f64; 3],
    pub boundary_samples: usize,
    /// Largest deviation of a contact angle from `arccos ψ`, radians.
    pub boundary_angle_sup: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BubbleSolution {
    pub surface: GraphSurface,
    pub energy: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub status: SolveStatus,
    pub residuals: Residuals,
    /// Energy after every accepted step, starting with the initial surface.
    pub energy_history: Vec<f64>,
    /// Vertices clamped to the bottom and top faces.
    pub contact_bottom: Vec<usize>,
    pub contact_top: Vec<usize>,
}

impl BubbleSolution {
    pub fn touches_horizontal(&self) -> bool {
        !self.contact_bottom.is_empty() || !self.contact_top.is_empty()
    }
}

/// Base dual area per vertex (one third of each incident triangle).
fn dual_areas(p: &BubbleProblem) -> Vec<f64> {
    let mut a = vec![0.0; p.base.vertices.len()];
    for t in &p.tris {
        for &i in &t.idx {
            a[i] += t.base_area / 3.0;
        }
    }
    a
}

/// `K_w + αM` with per-triangle weights `1/√(1 + |∇u|²)`; rows of active vertices are decoupled.
fn preconditioner(p: &BubbleProblem, u: &[f64], active: &[bool]) -> Result<CscCholesky<f64>> {
    let n = u.len();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for v in &p.base.vertices {
        for a in 0..2 {
            lo[a] = lo[a].min(v[a]);
            hi[a] = hi[a].max(v[a]);
        }
    }
    let alpha = 1.0 / ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2));
    let mut coo = CooMatrix::new(n, n);
    for t in &p.tris {
        let gu = (0..3).fold([0.0; 2], |acc, k| {
            [acc[0] + u[t.idx[k]] * t.hat_grad[k][0], acc[1] + u[t.idx[k]] * t.hat_grad[k][1]]
        });
        let w = 1.0 / (1.0 + gu[0] * gu[0] + gu[1] * gu[1]).sqrt();
        for a in 0..3 {
            let i = t.idx[a];
            if active[i] {
                continue;
            }
            coo.push(i, i, alpha * t.base_area / 3.0);
            for b in 0..3 {
                let j = t.idx[b];
                if active[j] {
                    continue;
                }
                let k = t.hat_grad[a][0] * t.hat_grad[b][0] + t.hat_grad[a][1] * t.hat_grad[b][1];
                coo.push(i, j, w * t.base_area * k);
            }
        }
    }
    for (i, &on) in active.iter().enumerate() {
        if on {
            coo.push(i, i, 1.0);
        }
    }
    CscCholesky::factor(&CscMatrix::from(&coo))
        .map_err(|e| Error::Degenerate(format!("preconditioner factorization failed: {e:?}")))
}

/// Projected-gradient descent with Armijo backtracking on the vertex heights.
pub fn solve(p: &BubbleProblem, init: &GraphSurface, opts: &SolveOptions) -> Result<BubbleSolution> {
    p.check_surface(init)?;
    if opts.max_iter == 0 || !(opts.min_step > 0.0) || !(opts.initial_step > 0.0) {
        return Err(Error::InvalidParameter("solver needs max_iter, min_step and initial_step positive".into()));
    }
    let [t0, t1] = p.t_range();
    let clamp = |v: f64| v.clamp(t0, t1);
    let area = dual_areas(p);
    let n = init.heights.len();
    let mut u: Vec<f64> = init.heights.iter().map(|&v| clamp(v)).collect();
    let (mut e, mut grad) = p.energy_grad(&u);
    let mut history = vec![e];
    let mut step = opts.initial_step;
    let mut floor = opts.min_step;
    let mut halved = false;
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    let mut gnorm;
    loop {
        // active bounds: clamped heights whose descent direction points outward
        let active: Vec<bool> = (0..n).map(|i| (u[i] <= t0 && grad[i] > 0.0) || (u[i] >= t1 && grad[i] < 0.0)).collect();
        gnorm = (0..n).filter(|&i| !active[i]).map(|i| grad[i].abs() / area[i]).fold(0.0, f64::max);
        if gnorm < opts.gtol {
            status = SolveStatus::Converged;
            break;
        }
        if iterations == opts.max_iter {
            break;
        }
        let gf: Vec<f64> = (0..n).map(|i| if active[i] { 0.0 } else { grad[i] }).collect();
        let dir: Vec<f64> = if opts.precondition {
            let chol = preconditioner(p, &u, &active)?;
            let sol = chol.solve(&DMatrix::from_column_slice(n, 1, &gf));
            (0..n).map(|i| if active[i] { 0.0 } else { sol[(i, 0)] }).collect()
        } else {
            (0..n).map(|i| gf[i] / area[i]).collect()
        };
        let mut alpha = (2.0 * step).min(opts.max_step);
        let accepted = loop {
            let trial: Vec<f64> = (0..n).map(|i| clamp(u[i] - alpha * dir[i])).collect();
            let decrease: f64 = (0..n).map(|i| grad[i] * (u[i] - trial[i])).sum();
            if decrease > 0.0 {
                let et = p.energy(&trial);
                if et <= e - opts.armijo * decrease {
                    break Some(trial);
                }
            }
            alpha *= 0.5;
            if alpha < floor {
                if halved {
                    break None;
                }
                floor *= 0.5;
                halved = true;
            }
        };
        match accepted {
            Some(trial) => {
                u = trial;
                step = alpha;
                (e, grad) = p.energy_grad(&u);
                history.push(e);
                iterations += 1;
            }
            None => {
                status = SolveStatus::LineSearchStall;
                break;
            }
        }
    }
    let surface = p.surface(u.clone())?;
    let residuals = residuals(p, &surface)?;
    let tol = 1e-12 * (1.0 + t0.abs().max(t1.abs()));
    Ok(BubbleSolution {
        energy: e,
        iterations,
        grad_norm: gnorm,
        status,
        residuals,
        energy_history: history,
        contact_bottom: (0..n).filter(|&i| u[i] <= t0 + tol).collect(),
        contact_top: (0..n).filter(|&i| u[i] >= t1 - tol).collect(),
        surface,
    })
}

/// Pointwise Euler–Lagrange residuals: `H = φ` inside, `cos∠ = ψ` on the sides.
pub fn residuals(p: &BubbleProblem, y: &GraphSurface) -> Result<Residuals> {
    p.check_surface(y)?;
    let base = &p.base;
    let nv = base.vertices.len();
    let interior: Vec<usize> =
        (0..nv).filter(|&v| !base.is_boundary(v) && base.neighbors(v).iter().all(|&w| !base.is_boundary(w))).collect();
    let inner: Vec<Result<(f64, [f64; 3])>> = interior
        .par_iter()
        .map(|&v| {
            let geo = y.geometry(&p.metric, SurfacePoint::Vertex(v), DerivMode::Auto)?;
            Ok(((geo.mean - p.phi.value_dt(geo.point).0).abs(), geo.point))
        })
        .collect();
    let mut interior_sup = (0.0, [f64::NAN; 3]);
    for r in inner {
        let (d, x) = r?;
        if d > interior_sup.0 || d.is_nan() {
            interior_sup = (d, x);
        }
    }
    let edge: Vec<usize> = (0..nv).filter(|&v| base.vertex_sides(v).len() == 1).collect();
    let bdry: Vec<Result<(f64, f64, [f64; 3])>> = edge
        .par_iter()
        .map(|&v| {
            let side = base.vertex_sides(v)[0];
            let ang = y.contact_angle(&p.metric, side, SurfacePoint::Vertex(v))?;
            let x = y.vertex_point(v);
            let psi = p.psi.value_dt(base, side, x).0;
            Ok(((ang.cos() - psi).abs(), (ang - psi.clamp(-1.0, 1.0).acos()).abs(), x))
        })
        .collect();
    let mut boundary_sup = (0.0, [f64::NAN; 3]);
    let mut angle_sup: f64 = 0.0;
    for r in bdry {
        let (d, a, x) = r?;
        if d > boundary_sup.0 || d.is_nan() {
            boundary_sup = (d, x);
        }
        angle_sup = angle_sup.max(a);
    }
    Ok(Residuals {
        interior_sup: interior_sup.0,
        interior_at: interior_sup.1,
        interior_samples: interior.len(),
        boundary_sup: boundary_sup.0,
        boundary_at: boundary_sup.1,
        boundary_samples: edge.len(),
        boundary_angle_sup: angle_sup,
    })
}

