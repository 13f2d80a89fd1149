//! Discrete μ-bubbles: graph surfaces minimizing `area − φ·vol − ψ·wall area` in a prism.

mod measure;
mod solver;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{CorneredDomain, Realization};
use crate::error::{Error, Result};
use crate::metric::MetricField;
use crate::num::{Dual, Num};
use crate::surface::{
    triangle_area_grad, triangle_column_grad, triangle_geoms, wall_term_grad, BaseMesh, Coorientation, GraphSurface,
    TriangleGeom,
};

pub use measure::{
    eps_minimization_transfer, is_eps_minimization, multibubble_measure, trap_margin, EpsTransfer, TrapReport,
};
pub use solver::{residuals, solve, BubbleSolution, Residuals, SolveOptions, SolveStatus};

/// Volume density `φ` (units 1/length).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhiSpec {
    Constant { value: f64 },
    /// `coefficient · |x − center|^{−power}` in chart coordinates.
    Radial { center: [f64; 3], coefficient: f64, power: f64 },
}

impl PhiSpec {
    pub fn zero() -> Self {
        PhiSpec::Constant { value: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PhiSpec::Constant { value } if *value == 0.0)
    }

    pub fn eval<T: Num>(&self, x: &[T; 3]) -> T {
        match self {
            PhiSpec::Constant { value } => T::cst(*value),
            PhiSpec::Radial { center, coefficient, power } => {
                let mut r2 = T::zero();
                for k in 0..3 {
                    let d = x[k] - center[k];
                    r2 += d * d;
                }
                r2.powf(-0.5 * power) * *coefficient
            }
        }
    }

    /// `(φ, ∂_t φ)`.
    pub fn value_dt(&self, x: [f64; 3]) -> (f64, f64) {
        let d = self.eval(&[Dual::cst(x[0]), Dual::cst(x[1]), Dual::var(x[2], 0)]);
        (d.v, d.d[0])
    }

    /// Chart gradient of `φ`.
    pub fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        let d = self.eval(&[Dual::var(x[0], 0), Dual::var(x[1], 1), Dual::var(x[2], 2)]);
        [d.d[0], d.d[1], d.d[2]]
    }
}

/// Boundary density `ψ` on the side faces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PsiSpec {
    Constant { value: f64 },
    /// One value per side of the base polygon.
    PerSide { values: Vec<f64> },
    /// `−⟨x − center, n_side⟩ / |x − center|` (Euclidean chart geometry): the contact law of
    /// spheres about `center`.
    Radial { center: [f64; 3] },
}

impl PsiSpec {
    pub fn zero() -> Self {
        PsiSpec::Constant { value: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PsiSpec::Constant { value } => *value == 0.0,
            PsiSpec::PerSide { values } => values.iter().all(|v| *v == 0.0),
            PsiSpec::Radial { .. } => false,
        }
    }

    /// `(ψ, ∂_t ψ)` at chart point `x` on side `side`.
    pub fn value_dt(&self, base: &BaseMesh, side: usize, x: [f64; 3]) -> (f64, f64) {
        match self {
            PsiSpec::Constant { value } => (*value, 0.0),
            PsiSpec::PerSide { values } => (values.get(side).copied().unwrap_or(0.0), 0.0),
            PsiSpec::Radial { center } => {
                let n = base.sides[side].outward_normal([x[0], x[1]]);
                let r = [x[0] - center[0], x[1] - center[1], x[2] - center[2]];
                let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
                let q = r[0] * n[0] + r[1] * n[1];
                (-q / len, q * r[2] / (len * len * len))
            }
        }
    }
}

/// `area_μ(Y) = area(Y) − ∫_{anchor}^{Y} φ dvol − [∫_{anchor}^{Y} ψ dA_sides]` over a prism.
#[derive(Clone, Debug)]
pub struct BubbleProblem {
    pub metric: MetricField,
    pub domain: CorneredDomain,
    pub base: Arc<BaseMesh>,
    pub phi: PhiSpec,
    pub psi: PsiSpec,
    /// Whether the wall term enters the measure.
    pub side_weight: bool,
    /// Lower end of the in-region germ columns.
    pub anchor: f64,
    /// Required margin `|ψ| ≤ 1 − β`.
    pub beta: f64,
    tris: Vec<TriangleGeom>,
}

impl BubbleProblem {
    /// Problem over the domain's base polygon meshed at `resolution` (per side).
    pub fn new(metric: MetricField, domain: CorneredDomain, phi: PhiSpec, psi: PsiSpec, resolution: usize) -> Result<Self> {
        let base = match &domain.realization {
            Realization::Cube { lower, upper } => {
                BaseMesh::rectangle([lower[0], lower[1]], [upper[0], upper[1]], resolution, resolution)?
            }
            Realization::Prism { base, .. } => BaseMesh::polygon(base, resolution)?,
            Realization::Swept(_) => {
                return Err(Error::InvalidParameter("bubble problems need a prism or cube realization".into()))
            }
        };
        Self::with_base(metric, domain, phi, psi, Arc::new(base))
    }

    /// Problem over a caller-supplied base mesh whose sides match the polygon's.
    pub fn with_base(
        metric: MetricField,
        domain: CorneredDomain,
        phi: PhiSpec,
        psi: PsiSpec,
        base: Arc<BaseMesh>,
    ) -> Result<Self> {
        let anchor = domain.realization.t_range()[0];
        let tris = triangle_geoms(&base);
        let p = BubbleProblem { metric, domain, base, phi, psi, side_weight: true, anchor, beta: 1e-3, tris };
        p.validate()?;
        Ok(p)
    }

    pub fn with_anchor(mut self, anchor: f64) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn with_side_weight(mut self, on: bool) -> Self {
        self.side_weight = on;
        self
    }

    pub fn t_range(&self) -> [f64; 2] {
        self.domain.realization.t_range()
    }

    /// Checks dimensions, side counts, `|ψ| ≤ 1 − β` and finiteness of `φ` on sampled points.
    pub fn validate(&self) -> Result<()> {
        if self.metric.dim() != 3 {
            return Err(Error::InvalidParameter("bubble problems need a 3-dimensional metric".into()));
        }
        if matches!(self.domain.realization, Realization::Swept(_)) {
            return Err(Error::InvalidParameter("bubble problems need a prism or cube realization".into()));
        }
        let k = self.domain.realization.side_count();
        if self.base.sides.len() != k {
            return Err(Error::InvalidParameter(format!(
                "base mesh has {} sides, domain has {k}",
                self.base.sides.len()
            )));
        }
        if let PsiSpec::PerSide { values } = &self.psi {
            if values.len() != k {
                return Err(Error::InvalidParameter(format!("psi has {} values for {k} sides", values.len())));
            }
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParameter(format!("beta = {} must lie in (0, 1)", self.beta)));
        }
        let [t0, t1] = self.t_range();
        let heights: Vec<f64> = (0..5).map(|i| t0 + (t1 - t0) * i as f64 / 4.0).collect();
        for e in &self.base.boundary {
            let (a, b) = (self.base.vertices[e.a], self.base.vertices[e.b]);
            let m = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            for &t in &heights {
                let x = [m[0], m[1], t];
                let (v, _) = self.psi.value_dt(&self.base, e.side, x);
                if !(v.abs() <= 1.0 - self.beta) {
                    return Err(Error::InvalidParameter(format!(
                        "psi = {v} at {x:?} on side {} violates |psi| <= 1 - beta = {}",
                        e.side,
                        1.0 - self.beta
                    )));
                }
            }
        }
        for v in &self.base.vertices {
            for &t in &heights {
                let x = [v[0], v[1], t];
                if !self.phi.value_dt(x).0.is_finite() {
                    return Err(Error::InvalidParameter(format!("phi is not finite at {x:?}")));
                }
            }
        }
        Ok(())
    }

    /// Flat slice at `height` (mid-height by default).
    pub fn slice(&self, height: Option<f64>) -> Result<GraphSurface> {
        let [t0, t1] = self.t_range();
        let h = height.unwrap_or(0.5 * (t0 + t1));
        GraphSurface::new(self.base.clone(), vec![h; self.base.vertices.len()], [t0, t1], Coorientation::BelowIn)
    }

    /// Surface over the problem's base with the given heights.
    pub fn surface(&self, heights: Vec<f64>) -> Result<GraphSurface> {
        GraphSurface::new(self.base.clone(), heights, self.t_range(), Coorientation::BelowIn)
    }

    fn check_surface(&self, y: &GraphSurface) -> Result<()> {
        let same = Arc::ptr_eq(&y.base, &self.base)
            || (y.base.vertices == self.base.vertices && y.base.triangles == self.base.triangles);
        if !same {
            return Err(Error::InvalidParameter("surface is not over the problem's base mesh".into()));
        }
        Ok(())
    }

    /// Energy and its exact gradient in the vertex heights.
    pub fn energy_grad(&self, u: &[f64]) -> (f64, Vec<f64>) {
        self.assemble(u, true)
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        self.assemble(u, false).0
    }

    fn assemble(&self, u: &[f64], want_grad: bool) -> (f64, Vec<f64>) {
        let g = &self.metric;
        let phi_zero = self.phi.is_zero();
        let phi = |x: [f64; 3]| self.phi.value_dt(x);
        let parts: Vec<(f64, [f64; 3])> = self
            .tris
            .par_iter()
            .map(|t| {
                let h = t.idx.map(|i| u[i]);
                let (a, ga) = triangle_area_grad(g, t, h);
                if phi_zero {
                    return (a, ga);
                }
                let (c, gc) = triangle_column_grad(g, t, h, self.anchor, &phi);
                (a - c, [ga[0] - gc[0], ga[1] - gc[1], ga[2] - gc[2]])
            })
            .collect();
        let walls: Vec<(f64, [f64; 2])> = if self.side_weight && !self.psi.is_zero() {
            self.base
                .boundary
                .par_iter()
                .map(|e| {
                    let psi = |x: [f64; 3]| self.psi.value_dt(&self.base, e.side, x);
                    let (pa, pb) = (self.base.vertices[e.a], self.base.vertices[e.b]);
                    wall_term_grad(g, pa, pb, [u[e.a], u[e.b]], self.anchor, &psi)
                })
                .collect()
        } else {
            Vec::new()
        };
        let mut energy = 0.0;
        let mut grad = if want_grad { vec![0.0; u.len()] } else { Vec::new() };
        for (t, (v, gr)) in self.tris.iter().zip(&parts) {
            energy += v;
            if want_grad {
                for k in 0..3 {
                    grad[t.idx[k]] += gr[k];
                }
            }
        }
        for (e, (v, gr)) in self.base.boundary.iter().zip(&walls) {
            energy -= v;
            if want_grad {
                grad[e.a] -= gr[0];
                grad[e.b] -= gr[1];
            }
        }
        (energy, grad)
    }
}

/// μ-area of a graph surface over the problem's base.
pub fn mu_area(problem: &BubbleProblem, y: &GraphSurface) -> Result<f64> {
    problem.check_surface(y)?;
    Ok(problem.energy(&y.heights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::build_builtin;
    use serde_json::json;

    fn flat() -> MetricField {
        build_builtin("flat", &json!({"n": 3, "chart": {"lower": [-2.0, -2.0, -2.0], "upper": [3.0, 3.0, 3.0]}})).unwrap()
    }

    #[test]
    fn definition_arithmetic_on_unit_cube() {
        let cube = CorneredDomain::cube([0.0; 3], [1.0; 3]).unwrap();
        let p = BubbleProblem::new(flat(), cube.clone(), PhiSpec::zero(), PsiSpec::zero(), 8).unwrap();
        let y = p.slice(Some(0.5)).unwrap();
        assert!((mu_area(&p, &y).unwrap() - 1.0).abs() < 1e-13);
        let c = 0.7;
        let p = BubbleProblem::new(flat(), cube, PhiSpec::Constant { value: c }, PsiSpec::zero(), 8).unwrap();
        assert!((mu_area(&p, &y).unwrap() - (1.0 - c / 2.0)).abs() < 1e-13);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let cube = CorneredDomain::cube([0.0; 3], [1.0; 3]).unwrap();
        let g = build_builtin(
            "perturbed-flat",
            &json!({"n": 3, "amplitude": 0.05, "wavevector": [3.0, 2.0], "bowl": 0.0, "bias": 0.02, "center": [0.5, 0.5, 0.5],
                    "chart": {"lower": [-0.5, -0.5, -0.5], "upper": [1.5, 1.5, 1.5]}}),
        )
        .unwrap();
        let p = BubbleProblem::new(g, cube, PhiSpec::Constant { value: 0.3 }, PsiSpec::PerSide { values: vec![0.2, -0.1, 0.4, 0.0] }, 4)
            .unwrap();
        let u: Vec<f64> = p.base.vertices.iter().map(|v| 0.4 + 0.1 * v[0] - 0.2 * v[1] * v[1]).collect();
        let (_, grad) = p.energy_grad(&u);
        let h = 1e-6;
        for i in [0, 3, 7, 12, 20] {
            let mut up = u.clone();
            up[i] += h;
            let mut dn = u.clone();
            dn[i] -= h;
            let fd = (p.energy(&up) - p.energy(&dn)) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-7, "{i}: {fd} vs {}", grad[i]);
        }
    }

    #[test]
    fn psi_out_of_range_is_rejected() {
        let cube = CorneredDomain::cube([0.0; 3], [1.0; 3]).unwrap();
        let r = BubbleProblem::new(flat(), cube, PhiSpec::zero(), PsiSpec::Constant { value: 1.0 }, 4);
        assert!(r.is_err());
    }
}
