//! Parallel hypersurfaces along the normal exponential map.
//!
//! The shape operator `S = A*_t` obeys the Riccati equation `dS/dt = −S² + B_t`
//! and the induced metric evolves by `dg/dt = 2·g·S` (the second fundamental
//! form `A_t = g_t S` is half the normal derivative of `g_t`).

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::generalized_symmetric_eigenvalues;

#[derive(Clone, Debug, Serialize)]
pub struct ShapeState {
    pub t: f64,
    pub gform: DMatrix<f64>,
    pub shapeop: DMatrix<f64>,
    pub bop: DMatrix<f64>,
}

impl ShapeState {
    /// Second fundamental form `A_t = g_t·S`.
    pub fn second_form(&self) -> DMatrix<f64> {
        &self.gform * &self.shapeop
    }

    /// `max |g S − (g S)ᵀ|`: failure of `S` to be `g`-self-adjoint.
    pub fn self_adjoint_residual(&self) -> f64 {
        let a = self.second_form();
        (&a - a.transpose()).amax()
    }

    /// Principal curvatures (eigenvalues of `S`), ascending.
    pub fn principal(&self) -> Option<Vec<f64>> {
        let a = self.second_form();
        let sym = (&a + a.transpose()) * 0.5;
        generalized_symmetric_eigenvalues(&sym, &self.gform)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BlowUp {
    /// Time at which `‖S‖` first exceeded `1/step`.
    pub t: f64,
    /// Focal distance estimate `t + 1/|λ_max|`.
    pub focal_estimate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TubeTrajectory {
    pub states: Vec<ShapeState>,
    pub blowup: Option<BlowUp>,
}

fn rhs(g: &DMatrix<f64>, s: &DMatrix<f64>, b: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    (g * s * 2.0, b - s * s)
}

/// RK4 integration of the coupled `(g, S)` system on `[t0, t0 + T]`.
pub fn tube_evolve(
    state0: &ShapeState,
    bfun: &dyn Fn(f64) -> DMatrix<f64>,
    total: f64,
    step: f64,
) -> Result<TubeTrajectory> {
    if !(total > 0.0) || !(step > 0.0) {
        return Err(Error::InvalidParameter("tube_evolve needs T > 0 and step > 0".into()));
    }
    let m = state0.gform.nrows();
    if state0.gform.ncols() != m || state0.shapeop.shape() != (m, m) {
        return Err(Error::InvalidParameter("shape state matrices must be square and of equal size".into()));
    }
    if state0.gform.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite { point: vec![state0.t] });
    }
    let mut states = vec![state0.clone()];
    let mut g = state0.gform.clone();
    let mut s = state0.shapeop.clone();
    let t0 = state0.t;
    let steps = (total / step).round().max(1.0) as usize;
    let h = total / steps as f64;
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let b1 = bfun(t);
        let b2 = bfun(t + 0.5 * h);
        let b4 = bfun(t + h);
        let (k1g, k1s) = rhs(&g, &s, &b1);
        let (k2g, k2s) = rhs(&(&g + &k1g * (0.5 * h)), &(&s + &k1s * (0.5 * h)), &b2);
        let (k3g, k3s) = rhs(&(&g + &k2g * (0.5 * h)), &(&s + &k2s * (0.5 * h)), &b2);
        let (k4g, k4s) = rhs(&(&g + &k3g * h), &(&s + &k3s * h), &b4);
        g += (&k1g + &k2g * 2.0 + &k3g * 2.0 + &k4g) * (h / 6.0);
        s += (&k1s + &k2s * 2.0 + &k3s * 2.0 + &k4s) * (h / 6.0);
        let state = ShapeState { t: t + h, gform: g.clone(), shapeop: s.clone(), bop: b4 };
        let finite = g.iter().chain(s.iter()).all(|v| v.is_finite());
        let lam = if finite {
            state.principal().map(|ev| ev.iter().fold(0.0f64, |a, v| a.max(v.abs())))
        } else {
            None
        };
        match lam {
            Some(l) if l <= 1.0 / step => states.push(state),
            Some(l) => {
                return Ok(TubeTrajectory {
                    states,
                    blowup: Some(BlowUp { t: t + h, focal_estimate: t + h + 1.0 / l }),
                });
            }
            None => {
                return Ok(TubeTrajectory { states, blowup: Some(BlowUp { t: t + h, focal_estimate: t + h }) });
            }
        }
    }
    Ok(TubeTrajectory { states, blowup: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totally_geodesic_slice_stays_put() {
        let s0 = ShapeState {
            t: 0.0,
            gform: DMatrix::identity(2, 2),
            shapeop: DMatrix::zeros(2, 2),
            bop: DMatrix::zeros(2, 2),
        };
        let tr = tube_evolve(&s0, &|_| DMatrix::zeros(2, 2), 1.0, 1e-2).unwrap();
        let last = tr.states.last().unwrap();
        assert_eq!(last.shapeop, DMatrix::zeros(2, 2));
        assert_eq!(last.gform, DMatrix::identity(2, 2));
        assert!(tr.blowup.is_none());
    }
}
