//! Builtin analytic metric families, written once against [`Num`].

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use super::{dual_point, jet_point, TensorField};
use crate::linalg::SMat;
use crate::num::{Dual, Jet, Num};

/// Closed-form symmetric-matrix field generic over the scalar type.
pub trait Analytic: Send + Sync + Debug + 'static {
    fn dim(&self) -> usize;
    fn rank(&self) -> usize {
        self.dim()
    }
    fn eval<T: Num>(&self, x: &[T]) -> SMat<T>;
}

/// Adapter giving every [`Analytic`] family exact first and second partials.
#[derive(Debug, Clone)]
pub struct AnalyticField<A>(pub A);

impl<A: Analytic> TensorField for AnalyticField<A> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn rank(&self) -> usize {
        self.0.rank()
    }
    fn value(&self, x: &[f64]) -> SMat<f64> {
        self.0.eval(&x[..self.0.dim()])
    }
    fn jet(&self, x: &[f64]) -> Option<SMat<Jet>> {
        let p = jet_point(x);
        Some(self.0.eval(&p[..self.0.dim()]))
    }
    fn first(&self, x: &[f64]) -> Option<SMat<Dual>> {
        let p = dual_point(x);
        Some(self.0.eval(&p[..self.0.dim()]))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Flat {
    pub n: usize,
}

impl Analytic for Flat {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval<T: Num>(&self, _x: &[T]) -> SMat<T> {
        SMat::identity(self.n)
    }
}

/// Constant symmetric matrix over a chart of dimension `dim`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantForm {
    pub dim: usize,
    pub m: SMat<f64>,
}

impl Analytic for ConstantForm {
    fn dim(&self) -> usize {
        self.dim
    }
    fn rank(&self) -> usize {
        self.m.n
    }
    fn eval<T: Num>(&self, _x: &[T]) -> SMat<T> {
        let mut out = SMat::zeros(self.m.n);
        for i in 0..self.m.n {
            for j in 0..self.m.n {
                out.a[i][j] = T::cst(self.m.a[i][j]);
            }
        }
        out
    }
}

impl TensorField for ConstantForm {
    fn dim(&self) -> usize {
        self.dim
    }
    fn rank(&self) -> usize {
        self.m.n
    }
    fn value(&self, _x: &[f64]) -> SMat<f64> {
        self.m
    }
    fn jet(&self, x: &[f64]) -> Option<SMat<Jet>> {
        AnalyticField(*self).jet(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceFormChart {
    /// Central projection: geodesics are straight lines.
    #[default]
    Gnomonic,
    /// Stereographic (conformally flat) coordinates.
    Conformal,
    /// Geodesic polar coordinates `(θ, φ)`, two-dimensional only.
    Polar,
}

/// Constant sectional curvature `k` in one of three coordinate systems.
#[derive(Debug, Clone, Copy)]
pub struct SpaceForm {
    pub n: usize,
    pub k: f64,
    pub chart: SpaceFormChart,
}

/// `sn_K(θ)`: the Jacobi-field profile of a space form.
pub fn sn<T: Num>(k: f64, theta: T) -> T {
    if k > 0.0 {
        let s = k.sqrt();
        (theta * s).sin() / s
    } else if k < 0.0 {
        let s = (-k).sqrt();
        (theta * s).sinh() / s
    } else {
        theta
    }
}

impl Analytic for SpaceForm {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval<T: Num>(&self, x: &[T]) -> SMat<T> {
        let n = self.n;
        let k = self.k;
        match self.chart {
            SpaceFormChart::Gnomonic => {
                let mut r2 = T::zero();
                for v in x.iter().take(n) {
                    r2 += *v * *v;
                }
                let s = r2 * k + 1.0;
                let inv = s.recip();
                let inv2 = inv * inv * k;
                let mut g = SMat::zeros(n);
                for i in 0..n {
                    for j in 0..=i {
                        let mut v = -(x[i] * x[j] * inv2);
                        if i == j {
                            v += inv;
                        }
                        g.set_sym(i, j, v);
                    }
                }
                g
            }
            SpaceFormChart::Conformal => {
                let mut r2 = T::zero();
                for v in x.iter().take(n) {
                    r2 += *v * *v;
                }
                let d = r2 * k + 1.0;
                let f = (d * d).recip() * 4.0;
                SMat::identity(n).scale(f)
            }
            SpaceFormChart::Polar => {
                let mut g = SMat::zeros(2);
                g.a[0][0] = T::one();
                g.a[1][1] = sn(k, x[0]).square();
                g
            }
        }
    }
}

/// Euclidean metric in polar (n=2: r, θ) or spherical (n=3: r, θ, φ) coordinates.
#[derive(Debug, Clone, Copy)]
pub struct PolarFlat {
    pub n: usize,
}

impl Analytic for PolarFlat {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval<T: Num>(&self, x: &[T]) -> SMat<T> {
        let mut g = SMat::zeros(self.n);
        let r2 = x[0] * x[0];
        g.a[0][0] = T::one();
        g.a[1][1] = r2;
        if self.n == 3 {
            g.a[2][2] = r2 * x[1].sin().square();
        }
        g
    }
}

/// Conformally flat perturbation `g = u^{4/(n-2)} δ` (n ≥ 3) or `e^{2(u-1)} δ` (n = 2) with
/// `u = 1 + amplitude·cos(k·x' + phase)·cosh(|k| x_n) + bowl·(|x'-c'|² − (n−1)(x_n−c_n)²) + bias·|x−c|²`.
///
/// The first two terms of `u` are harmonic, so for n ≥ 3 the scalar curvature is
/// `−4(n−1)/(n−2) · u^{−(n+2)/(n−2)} · 2n·bias`: its sign is the opposite of `bias`.
#[derive(Debug, Clone)]
pub struct PerturbedFlat {
    pub n: usize,
    pub amplitude: f64,
    pub wavevector: Vec<f64>,
    pub phase: f64,
    pub bowl: f64,
    pub bias: f64,
    pub center: Vec<f64>,
}

impl PerturbedFlat {
    pub fn potential<T: Num>(&self, x: &[T]) -> T {
        let n = self.n;
        let m = n - 1;
        let mut arg = T::cst(self.phase);
        let mut kn = 0.0;
        for i in 0..m {
            let ki = self.wavevector.get(i).copied().unwrap_or(0.0);
            arg += x[i] * ki;
            kn += ki * ki;
        }
        let kn = kn.sqrt();
        let mut u = T::one() + arg.cos() * (x[m] * kn).cosh() * self.amplitude;
        let mut tang = T::zero();
        let mut all = T::zero();
        for i in 0..n {
            let d = x[i] - self.center[i];
            let d2 = d * d;
            all += d2;
            if i < m {
                tang += d2;
            }
        }
        let dn = x[m] - self.center[m];
        u += (tang - dn * dn * (m as f64)) * self.bowl;
        u += all * self.bias;
        u
    }

    /// Closed-form scalar curvature (n ≥ 3).
    pub fn scalar_closed_form(&self, x: &[f64]) -> f64 {
        let n = self.n as f64;
        let u = self.potential(x);
        -4.0 * (n - 1.0) / (n - 2.0) * u.powf(-(n + 2.0) / (n - 2.0)) * 2.0 * n * self.bias
    }
}

impl Analytic for PerturbedFlat {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval<T: Num>(&self, x: &[T]) -> SMat<T> {
        let u = self.potential(x);
        let f = if self.n == 2 {
            ((u - 1.0) * 2.0).exp()
        } else {
            u.powf(4.0 / (self.n as f64 - 2.0))
        };
        SMat::identity(self.n).scale(f)
    }
}

/// `e^{2w}(dx² + dy²) + dt²`, `w = −(c/2)·ln(1 + r²/a²)`: a positively curved tube of
/// core radius `a` along the t-axis, with total base curvature `∫K = 2πc`.
#[derive(Debug, Clone, Copy)]
pub struct ConeTube {
    pub radius: f64,
    pub strength: f64,
    pub center: [f64; 2],
}

impl ConeTube {
    /// Gauss curvature of the base disk factor at `(x, y)`.
    pub fn base_curvature(&self, x: f64, y: f64) -> f64 {
        let a2 = self.radius * self.radius;
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        let r2 = dx * dx + dy * dy;
        (1.0 + r2 / a2).powf(self.strength) * 2.0 * self.strength * a2 / (a2 + r2).powi(2)
    }
}

impl Analytic for ConeTube {
    fn dim(&self) -> usize {
        3
    }
    fn eval<T: Num>(&self, x: &[T]) -> SMat<T> {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        let q = (dx * dx + dy * dy) / (self.radius * self.radius) + 1.0;
        let conf = q.powf(-self.strength);
        let mut g = SMat::zeros(3);
        g.a[0][0] = conf;
        g.a[1][1] = conf;
        g.a[2][2] = T::one();
        g
    }
}

/// Warping function `a(t)` for `a(t)²g + dt²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WarpProfile {
    Exp {
        #[serde(default = "one")]
        rate: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Linear {
        #[serde(default = "one")]
        slope: f64,
        #[serde(default)]
        offset: f64,
    },
    Cosh {
        #[serde(default = "one")]
        rate: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Sinh {
        #[serde(default = "one")]
        rate: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Cos {
        #[serde(default = "one")]
        rate: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Sin {
        #[serde(default = "one")]
        rate: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Const {
        value: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl WarpProfile {
    pub fn eval<T: Num>(&self, t: T) -> T {
        match *self {
            WarpProfile::Exp { rate, scale } => (t * rate).exp() * scale,
            WarpProfile::Linear { slope, offset } => t * slope + offset,
            WarpProfile::Cosh { rate, scale } => (t * rate).cosh() * scale,
            WarpProfile::Sinh { rate, scale } => (t * rate).sinh() * scale,
            WarpProfile::Cos { rate, scale } => (t * rate).cos() * scale,
            WarpProfile::Sin { rate, scale } => (t * rate).sin() * scale,
            WarpProfile::Const { value } => T::cst(value),
        }
    }

    /// `a'(t)/a(t)`.
    pub fn log_derivative(&self, t: f64) -> f64 {
        let j = self.eval(Dual::var(t, 0));
        j.d[0] / j.v
    }
}
