//! Second-order forward jets in two variables.
//!
//! A [`Jet2`] carries a value together with its first and second partial
//! derivatives with respect to the surface parameters `(u, v)`. Arithmetic
//! follows the Leibniz and chain rules exactly, so evaluating an expression on
//! jets yields machine-precision derivatives without symbolic algebra.

use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub d_u: f64,
    pub d_v: f64,
    pub d_uu: f64,
    pub d_uv: f64,
    pub d_vv: f64,
}

impl Jet2 {
    pub const fn constant(value: f64) -> Self {
        Jet2 {
            value,
            d_u: 0.0,
            d_v: 0.0,
            d_uu: 0.0,
            d_uv: 0.0,
            d_vv: 0.0,
        }
    }

    /// The coordinate function `u` seeded at `u`.
    pub const fn var_u(u: f64) -> Self {
        Jet2 {
            d_u: 1.0,
            ..Jet2::constant(u)
        }
    }

    /// The coordinate function `v` seeded at `v`.
    pub const fn var_v(v: f64) -> Self {
        Jet2 {
            d_v: 1.0,
            ..Jet2::constant(v)
        }
    }

    pub fn slots(&self) -> [f64; 6] {
        [self.value, self.d_u, self.d_v, self.d_uu, self.d_uv, self.d_vv]
    }

    pub fn is_finite(&self) -> bool {
        self.slots().iter().all(|x| x.is_finite())
    }

    /// True when every derivative slot is exactly zero.
    pub fn is_constant(&self) -> bool {
        self.d_u == 0.0 && self.d_v == 0.0 && self.d_uu == 0.0 && self.d_uv == 0.0 && self.d_vv == 0.0
    }

    /// Compose a scalar function with this jet, given `f(x)`, `f'(x)` and
    /// `f''(x)` at `x = self.value`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        Jet2 {
            value: f0,
            d_u: f1 * self.d_u,
            d_v: f1 * self.d_v,
            d_uu: f2 * self.d_u * self.d_u + f1 * self.d_uu,
            d_uv: f2 * self.d_u * self.d_v + f1 * self.d_uv,
            d_vv: f2 * self.d_v * self.d_v + f1 * self.d_vv,
        }
    }

    fn scale(&self, k: f64) -> Self {
        Jet2 {
            value: k * self.value,
            d_u: k * self.d_u,
            d_v: k * self.d_v,
            d_uu: k * self.d_uu,
            d_uv: k * self.d_uv,
            d_vv: k * self.d_vv,
        }
    }

    pub fn recip(&self) -> Self {
        let x = self.value;
        let inv = 1.0 / x;
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(&self) -> Self {
        let t = self.value.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }

    pub fn sinh(&self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(&self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(c, s, c)
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    /// Natural logarithm; the caller guarantees a positive value.
    pub fn ln(&self) -> Self {
        let x = self.value;
        self.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
    }

    /// Square root; the caller guarantees a positive value.
    pub fn sqrt(&self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }

    /// Absolute value away from zero.
    pub fn abs(&self) -> Self {
        let sg = self.value.signum();
        self.chain(self.value.abs(), sg, 0.0)
    }

    /// `self^n` for an integer exponent.
    pub fn powi(&self, n: i32) -> Self {
        let x = self.value;
        let nf = n as f64;
        let f1 = if n == 0 { 0.0 } else { nf * x.powi(n - 1) };
        let f2 = if n == 0 || n == 1 {
            0.0
        } else {
            nf * (nf - 1.0) * x.powi(n - 2)
        };
        self.chain(x.powi(n), f1, f2)
    }

    /// `self^p` for a real constant exponent and positive base.
    pub fn powf(&self, p: f64) -> Self {
        let x = self.value;
        self.chain(x.powf(p), p * x.powf(p - 1.0), p * (p - 1.0) * x.powf(p - 2.0))
    }
}

impl From<f64> for Jet2 {
    fn from(value: f64) -> Self {
        Jet2::constant(value)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            value: self.value + o.value,
            d_u: self.d_u + o.d_u,
            d_v: self.d_v + o.d_v,
            d_uu: self.d_uu + o.d_uu,
            d_uv: self.d_uv + o.d_uv,
            d_vv: self.d_vv + o.d_vv,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2 {
            value: self.value - o.value,
            d_u: self.d_u - o.d_u,
            d_v: self.d_v - o.d_v,
            d_uu: self.d_uu - o.d_uu,
            d_uv: self.d_uv - o.d_uv,
            d_vv: self.d_vv - o.d_vv,
        }
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let (f, g) = (self, o);
        Jet2 {
            value: f.value * g.value,
            d_u: f.d_u * g.value + f.value * g.d_u,
            d_v: f.d_v * g.value + f.value * g.d_v,
            d_uu: f.d_uu * g.value + 2.0 * f.d_u * g.d_u + f.value * g.d_uu,
            d_uv: f.d_uv * g.value + f.d_u * g.d_v + f.d_v * g.d_u + f.value * g.d_uv,
            d_vv: f.d_vv * g.value + 2.0 * f.d_v * g.d_v + f.value * g.d_vv,
        }
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, k: f64) -> Jet2 {
        self.scale(k)
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        if o.is_constant() {
            return self.scale(1.0 / o.value);
        }
        self * o.recip()
    }
}

/// A point of a parametric surface with its first and second partials.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet2Vec3(pub [Jet2; 3]);

impl Jet2Vec3 {
    pub fn new(x: Jet2, y: Jet2, z: Jet2) -> Self {
        Jet2Vec3([x, y, z])
    }

    fn pick(&self, f: impl Fn(&Jet2) -> f64) -> Vec3 {
        Vec3::new(f(&self.0[0]), f(&self.0[1]), f(&self.0[2]))
    }

    pub fn value(&self) -> Vec3 {
        self.pick(|j| j.value)
    }
    pub fn d_u(&self) -> Vec3 {
        self.pick(|j| j.d_u)
    }
    pub fn d_v(&self) -> Vec3 {
        self.pick(|j| j.d_v)
    }
    pub fn d_uu(&self) -> Vec3 {
        self.pick(|j| j.d_uu)
    }
    pub fn d_uv(&self) -> Vec3 {
        self.pick(|j| j.d_uv)
    }
    pub fn d_vv(&self) -> Vec3 {
        self.pick(|j| j.d_vv)
    }

    /// Apply `x -> m x + t`. The linear part acts on every slot, the
    /// translation only on the value.
    pub fn affine(&self, m: &nalgebra::Matrix3<f64>, t: &Vec3) -> Self {
        let slots = [
            m * self.value() + t,
            m * self.d_u(),
            m * self.d_v(),
            m * self.d_uu(),
            m * self.d_uv(),
            m * self.d_vv(),
        ];
        let comp = |k: usize| Jet2 {
            value: slots[0][k],
            d_u: slots[1][k],
            d_v: slots[2][k],
            d_uu: slots[3][k],
            d_uv: slots[4][k],
            d_vv: slots[5][k],
        };
        Jet2Vec3([comp(0), comp(1), comp(2)])
    }
}
