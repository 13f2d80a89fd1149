//! Scalar types for exact differentiation of analytic metric families.
//!
//! Every analytic family writes its coefficients once against [`Num`]; the
//! same code then yields plain values (`f64`), first partials ([`Dual`]) or
//! first and second partials ([`Jet`]) in up to [`MAX_DIM`] variables.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Largest chart dimension supported anywhere in the crate.
pub const MAX_DIM: usize = 4;

pub trait Num:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
{
    fn cst(v: f64) -> Self;
    fn re(&self) -> f64;
    /// Apply a scalar function given its value and first two derivatives at `self.re()`.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
    fn sin(self) -> Self {
        let x = self.re();
        self.chain(x.sin(), x.cos(), -x.sin())
    }
    fn cos(self) -> Self {
        let x = self.re();
        self.chain(x.cos(), -x.sin(), -x.cos())
    }
    fn tan(self) -> Self {
        let x = self.re();
        let t = x.tan();
        let s = 1.0 + t * t;
        self.chain(t, s, 2.0 * t * s)
    }
    fn exp(self) -> Self {
        let e = self.re().exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let x = self.re();
        self.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
    }
    fn sqrt(self) -> Self {
        let x = self.re();
        let s = x.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * x))
    }
    fn sinh(self) -> Self {
        let x = self.re();
        self.chain(x.sinh(), x.cosh(), x.sinh())
    }
    fn cosh(self) -> Self {
        let x = self.re();
        self.chain(x.cosh(), x.sinh(), x.cosh())
    }
    fn tanh(self) -> Self {
        let x = self.re();
        let t = x.tanh();
        let s = 1.0 - t * t;
        self.chain(t, s, -2.0 * t * s)
    }
    fn powf(self, p: f64) -> Self {
        let x = self.re();
        self.chain(x.powf(p), p * x.powf(p - 1.0), p * (p - 1.0) * x.powf(p - 2.0))
    }
    fn powi(self, p: i32) -> Self {
        let x = self.re();
        let pf = p as f64;
        self.chain(
            x.powi(p),
            pf * x.powi(p - 1),
            pf * (pf - 1.0) * x.powi(p - 2),
        )
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
    fn square(self) -> Self {
        self * self
    }
}

impl Num for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn re(&self) -> f64 {
        *self
    }
    #[inline]
    fn chain(self, f0: f64, _f1: f64, _f2: f64) -> Self {
        f0
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, p: i32) -> Self {
        f64::powi(self, p)
    }
}

/// Value plus gradient.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dual {
    pub v: f64,
    pub d: [f64; MAX_DIM],
}

impl Dual {
    pub fn var(v: f64, index: usize) -> Self {
        let mut d = [0.0; MAX_DIM];
        d[index] = 1.0;
        Dual { v, d }
    }
}

impl Num for Dual {
    #[inline]
    fn cst(v: f64) -> Self {
        Dual { v, d: [0.0; MAX_DIM] }
    }
    #[inline]
    fn re(&self) -> f64 {
        self.v
    }
    #[inline]
    fn chain(self, f0: f64, f1: f64, _f2: f64) -> Self {
        let mut d = self.d;
        for x in d.iter_mut() {
            *x *= f1;
        }
        Dual { v: f0, d }
    }
}

/// Value, gradient and Hessian.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub d: [f64; MAX_DIM],
    pub h: [[f64; MAX_DIM]; MAX_DIM],
}

impl Jet {
    pub fn var(v: f64, index: usize) -> Self {
        let mut j = Jet::cst(v);
        j.d[index] = 1.0;
        j
    }

    /// Lift a jet in variables `0..` to variables `offset..`.
    pub fn shifted(&self, offset: usize) -> Self {
        let mut out = Jet::cst(self.v);
        for i in 0..MAX_DIM - offset {
            out.d[i + offset] = self.d[i];
            for j in 0..MAX_DIM - offset {
                out.h[i + offset][j + offset] = self.h[i][j];
            }
        }
        out
    }

    /// Chain rule for the reflection `x_axis -> c - x_axis`.
    pub fn reflected(&self, axis: usize) -> Self {
        let mut out = *self;
        out.d[axis] = -out.d[axis];
        for j in 0..MAX_DIM {
            if j != axis {
                out.h[axis][j] = -out.h[axis][j];
                out.h[j][axis] = -out.h[j][axis];
            }
        }
        out
    }

    pub fn to_dual(&self) -> Dual {
        Dual { v: self.v, d: self.d }
    }
}

impl Num for Jet {
    #[inline]
    fn cst(v: f64) -> Self {
        Jet { v, d: [0.0; MAX_DIM], h: [[0.0; MAX_DIM]; MAX_DIM] }
    }
    #[inline]
    fn re(&self) -> f64 {
        self.v
    }
    #[inline]
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Jet::cst(f0);
        for i in 0..MAX_DIM {
            out.d[i] = f1 * self.d[i];
            for j in 0..MAX_DIM {
                out.h[i][j] = f1 * self.h[i][j] + f2 * self.d[i] * self.d[j];
            }
        }
        out
    }
}

macro_rules! impl_ops {
    ($t:ty, $mul:expr, $div:expr) => {
        impl Add for $t {
            type Output = $t;
            #[inline]
            fn add(self, o: $t) -> $t {
                let mut r = self;
                r += o;
                r
            }
        }
        impl Sub for $t {
            type Output = $t;
            #[inline]
            fn sub(self, o: $t) -> $t {
                let mut r = self;
                r -= o;
                r
            }
        }
        impl Neg for $t {
            type Output = $t;
            #[inline]
            fn neg(self) -> $t {
                self * -1.0
            }
        }
        impl Mul for $t {
            type Output = $t;
            #[inline]
            fn mul(self, o: $t) -> $t {
                $mul(self, o)
            }
        }
        impl Div for $t {
            type Output = $t;
            #[inline]
            fn div(self, o: $t) -> $t {
                $div(self, o)
            }
        }
        impl Add<f64> for $t {
            type Output = $t;
            #[inline]
            fn add(self, o: f64) -> $t {
                let mut r = self;
                r.v += o;
                r
            }
        }
        impl Sub<f64> for $t {
            type Output = $t;
            #[inline]
            fn sub(self, o: f64) -> $t {
                let mut r = self;
                r.v -= o;
                r
            }
        }
        impl Div<f64> for $t {
            type Output = $t;
            #[inline]
            fn div(self, o: f64) -> $t {
                self * (1.0 / o)
            }
        }
        impl MulAssign<f64> for $t {
            #[inline]
            fn mul_assign(&mut self, o: f64) {
                *self = *self * o;
            }
        }
    };
}

fn dual_mul(a: Dual, b: Dual) -> Dual {
    let mut d = [0.0; MAX_DIM];
    for i in 0..MAX_DIM {
        d[i] = a.d[i] * b.v + a.v * b.d[i];
    }
    Dual { v: a.v * b.v, d }
}

fn dual_div(a: Dual, b: Dual) -> Dual {
    let inv = b.chain(1.0 / b.v, -1.0 / (b.v * b.v), 0.0);
    dual_mul(a, inv)
}

fn jet_mul(a: Jet, b: Jet) -> Jet {
    let mut r = Jet::cst(a.v * b.v);
    for i in 0..MAX_DIM {
        r.d[i] = a.d[i] * b.v + a.v * b.d[i];
        for j in 0..MAX_DIM {
            r.h[i][j] =
                a.h[i][j] * b.v + a.v * b.h[i][j] + a.d[i] * b.d[j] + a.d[j] * b.d[i];
        }
    }
    r
}

fn jet_div(a: Jet, b: Jet) -> Jet {
    let x = b.v;
    let inv = b.chain(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x));
    jet_mul(a, inv)
}

impl_ops!(Dual, dual_mul, dual_div);
impl_ops!(Jet, jet_mul, jet_div);

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, o: Dual) {
        self.v += o.v;
        for i in 0..MAX_DIM {
            self.d[i] += o.d[i];
        }
    }
}
impl SubAssign for Dual {
    #[inline]
    fn sub_assign(&mut self, o: Dual) {
        self.v -= o.v;
        for i in 0..MAX_DIM {
            self.d[i] -= o.d[i];
        }
    }
}
impl Mul<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, o: f64) -> Dual {
        let mut r = self;
        r.v *= o;
        for x in r.d.iter_mut() {
            *x *= o;
        }
        r
    }
}

impl AddAssign for Jet {
    #[inline]
    fn add_assign(&mut self, o: Jet) {
        self.v += o.v;
        for i in 0..MAX_DIM {
            self.d[i] += o.d[i];
            for j in 0..MAX_DIM {
                self.h[i][j] += o.h[i][j];
            }
        }
    }
}
impl SubAssign for Jet {
    #[inline]
    fn sub_assign(&mut self, o: Jet) {
        self.v -= o.v;
        for i in 0..MAX_DIM {
            self.d[i] -= o.d[i];
            for j in 0..MAX_DIM {
                self.h[i][j] -= o.h[i][j];
            }
        }
    }
}
impl Mul<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, o: f64) -> Jet {
        let mut r = self;
        r.v *= o;
        for i in 0..MAX_DIM {
            r.d[i] *= o;
            for j in 0..MAX_DIM {
                r.h[i][j] *= o;
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f<T: Num>(x: T, y: T) -> T {
        (x * y).sin() + (x / (y + 2.0)).exp() - x.powi(3) * y.sqrt()
    }

    #[test]
    fn jet_matches_finite_differences() {
        let (x0, y0) = (0.7, 1.3);
        let j = f(Jet::var(x0, 0), Jet::var(y0, 1));
        let h = 1e-5;
        let fx = (f(x0 + h, y0) - f(x0 - h, y0)) / (2.0 * h);
        let fy = (f(x0, y0 + h) - f(x0, y0 - h)) / (2.0 * h);
        let fxy = (f(x0 + h, y0 + h) - f(x0 + h, y0 - h) - f(x0 - h, y0 + h)
            + f(x0 - h, y0 - h))
            / (4.0 * h * h);
        let fxx = (f(x0 + h, y0) - 2.0 * f(x0, y0) + f(x0 - h, y0)) / (h * h);
        assert!((j.v - f(x0, y0)).abs() < 1e-14);
        assert!((j.d[0] - fx).abs() < 1e-8);
        assert!((j.d[1] - fy).abs() < 1e-8);
        assert!((j.h[0][1] - fxy).abs() < 1e-4);
        assert!((j.h[1][0] - j.h[0][1]).abs() < 1e-14);
        assert!((j.h[0][0] - fxx).abs() < 1e-4);
        let d = f(Dual::var(x0, 0), Dual::var(y0, 1));
        assert_eq!(d.d[0], j.d[0]);
        assert_eq!(d.d[1], j.d[1]);
    }

    #[test]
    fn reflection_flips_odd_derivatives() {
        // g(x) = f(c - x): derivatives flip sign on the reflected axis only
        let c = 2.0;
        let x0 = 0.4;
        let y0 = 0.9;
        let direct = f(Jet::cst(c) - Jet::var(x0, 0), Jet::var(y0, 1));
        let reflected = f(Jet::var(c - x0, 0), Jet::var(y0, 1)).reflected(0);
        for i in 0..2 {
            assert!((direct.d[i] - reflected.d[i]).abs() < 1e-12);
            for k in 0..2 {
                assert!((direct.h[i][k] - reflected.h[i][k]).abs() < 1e-12);
            }
        }
    }
}
