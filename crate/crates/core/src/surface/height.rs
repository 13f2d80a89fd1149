use serde::{Deserialize, Serialize};

use crate::num::{Jet, Num};

/// Height, gradient and Hessian of a graph at a base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeightJet {
    pub u: f64,
    pub du: [f64; 2],
    pub ddu: [[f64; 2]; 2],
}

/// Closed-form height functions `t = u(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HeightProfile {
    Constant { value: f64 },
    Plane { offset: f64, slope: [f64; 2] },
    /// `c_t ± √(R² − |x − c_xy|²)`; upper sheet when `upper`.
    SphereCap { center: [f64; 3], radius: f64, upper: bool },
    Quadratic { offset: f64, slope: [f64; 2], hessian: [[f64; 2]; 2] },
    Wave { offset: f64, amplitude: f64, wavevector: [f64; 2], phase: f64 },
}

impl HeightProfile {
    pub fn eval<T: Num>(&self, x: [T; 2]) -> T {
        match *self {
            HeightProfile::Constant { value } => T::cst(value),
            HeightProfile::Plane { offset, slope } => x[0] * slope[0] + x[1] * slope[1] + offset,
            HeightProfile::SphereCap { center, radius, upper } => {
                let dx = x[0] - center[0];
                let dy = x[1] - center[1];
                let mut r2 = T::cst(radius * radius) - dx * dx - dy * dy;
                // rim points may round to slightly negative
                if r2.re() < 0.0 && r2.re() > -1e-12 * radius * radius {
                    r2 = T::cst(0.0);
                }
                let r = r2.sqrt();
                if upper {
                    r + center[2]
                } else {
                    -r + center[2]
                }
            }
            HeightProfile::Quadratic { offset, slope, hessian } => {
                let q = x[0] * x[0] * hessian[0][0]
                    + x[0] * x[1] * (hessian[0][1] + hessian[1][0])
                    + x[1] * x[1] * hessian[1][1];
                q * 0.5 + x[0] * slope[0] + x[1] * slope[1] + offset
            }
            HeightProfile::Wave { offset, amplitude, wavevector, phase } => {
                (x[0] * wavevector[0] + x[1] * wavevector[1] + phase).sin() * amplitude + offset
            }
        }
    }

    pub fn value(&self, p: [f64; 2]) -> f64 {
        self.eval(p)
    }

    pub fn jet(&self, p: [f64; 2]) -> HeightJet {
        let j: Jet = self.eval([Jet::var(p[0], 0), Jet::var(p[1], 1)]);
        HeightJet { u: j.v, du: [j.d[0], j.d[1]], ddu: [[j.h[0][0], j.h[0][1]], [j.h[1][0], j.h[1][1]]] }
    }
}

/// A local height model: either a closed-form profile or a quadratic fitted at a vertex.
#[derive(Clone, Debug, PartialEq)]
pub enum LocalHeight {
    Profile(HeightProfile),
    Fit { center: [f64; 2], u0: f64, grad: [f64; 2], hess: [[f64; 2]; 2] },
}

impl LocalHeight {
    pub fn jet(&self, p: [f64; 2]) -> HeightJet {
        match self {
            LocalHeight::Profile(h) => h.jet(p),
            LocalHeight::Fit { center, u0, grad, hess } => {
                let d = [p[0] - center[0], p[1] - center[1]];
                let hd = [hess[0][0] * d[0] + hess[0][1] * d[1], hess[1][0] * d[0] + hess[1][1] * d[1]];
                HeightJet {
                    u: u0 + grad[0] * d[0] + grad[1] * d[1] + 0.5 * (d[0] * hd[0] + d[1] * hd[1]),
                    du: [grad[0] + hd[0], grad[1] + hd[1]],
                    ddu: *hess,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_cap_jet_at_apex() {
        let h = HeightProfile::SphereCap { center: [0.0, 0.0, 0.0], radius: 2.0, upper: true };
        let j = h.jet([0.0, 0.0]);
        assert!((j.u - 2.0).abs() < 1e-15);
        assert!(j.du[0].abs() < 1e-15);
        assert!((j.ddu[0][0] + 0.5).abs() < 1e-15 && (j.ddu[1][1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn fit_reproduces_quadratic() {
        let q = HeightProfile::Quadratic { offset: 0.3, slope: [0.1, -0.2], hessian: [[1.0, 0.4], [0.4, -2.0]] };
        let c = [0.2, 0.1];
        let j = q.jet(c);
        let fit = LocalHeight::Fit { center: c, u0: j.u, grad: j.du, hess: j.ddu };
        let p = [-0.3, 0.7];
        let (a, b) = (q.jet(p), fit.jet(p));
        assert!((a.u - b.u).abs() < 1e-14 && (a.du[1] - b.du[1]).abs() < 1e-14);
    }
}
