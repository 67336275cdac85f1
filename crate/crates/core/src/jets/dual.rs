//! Forward-mode carriers: [`Dual`] (value + gradient) and [`Jet2`]
//! (value + gradient + Hessian) over `N` chart coordinates.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic shared by `f64`, [`Dual`] and [`Jet2`], so linear-algebra
/// helpers can be written once and run at any differentiation order.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(c: f64) -> Self;
    fn value(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, e: f64) -> Self;
    fn scale(self, c: f64) -> Self {
        self * Self::cst(c)
    }
}

impl Scalar for f64 {
    fn cst(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
}

/// First-order jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<const N: usize> {
    pub value: f64,
    pub grad: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            grad: [0.0; N],
        }
    }

    pub fn variable(value: f64, index: usize) -> Self {
        let mut grad = [0.0; N];
        grad[index] = 1.0;
        Self { value, grad }
    }

    fn chain(self, f: f64, df: f64) -> Self {
        let mut grad = [0.0; N];
        for (g, s) in grad.iter_mut().zip(self.grad.iter()) {
            *g = df * s;
        }
        Self { value: f, grad }
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.value += rhs.value;
        for i in 0..N {
            self.grad[i] += rhs.grad[i];
        }
        self
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.value -= rhs.value;
        for i in 0..N {
            self.grad[i] -= rhs.grad[i];
        }
        self
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.value = -self.value;
        for g in self.grad.iter_mut() {
            *g = -*g;
        }
        self
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut grad = [0.0; N];
        for i in 0..N {
            grad[i] = self.value * rhs.grad[i] + rhs.value * self.grad[i];
        }
        Self {
            value: self.value * rhs.value,
            grad,
        }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.value;
        self * rhs.chain(inv, -inv * inv)
    }
}

impl<const N: usize> Scalar for Dual<N> {
    fn cst(c: f64) -> Self {
        Self::constant(c)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.value.ln(), 1.0 / self.value)
    }
    fn sin(self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }
    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::constant(1.0);
        }
        let p = self.value.powi(n - 1);
        self.chain(p * self.value, n as f64 * p)
    }
    fn powf(self, e: f64) -> Self {
        let p = self.value.powf(e - 1.0);
        self.chain(p * self.value, e * p)
    }
}

/// Second-order jet: value, gradient and (symmetric) Hessian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2<const N: usize> {
    pub value: f64,
    pub grad: [f64; N],
    pub hess: [[f64; N]; N],
}

impl<const N: usize> Jet2<N> {
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            grad: [0.0; N],
            hess: [[0.0; N]; N],
        }
    }

    pub fn variable(value: f64, index: usize) -> Self {
        let mut j = Self::constant(value);
        j.grad[index] = 1.0;
        j
    }

    /// The jet of `∂_i f`, truncated to first order.
    pub fn partial(&self, i: usize) -> Dual<N> {
        Dual {
            value: self.grad[i],
            grad: self.hess[i],
        }
    }

    pub fn to_dual(&self) -> Dual<N> {
        Dual {
            value: self.value,
            grad: self.grad,
        }
    }

    /// Apply a scalar function with derivatives `df`, `d2f` at `self.value`.
    fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        let mut out = Self::constant(f);
        for i in 0..N {
            out.grad[i] = df * self.grad[i];
            for j in 0..N {
                out.hess[i][j] = df * self.hess[i][j] + d2f * self.grad[i] * self.grad[j];
            }
        }
        out
    }
}

impl<const N: usize> Add for Jet2<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.value += rhs.value;
        for i in 0..N {
            self.grad[i] += rhs.grad[i];
            for j in 0..N {
                self.hess[i][j] += rhs.hess[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for Jet2<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.value -= rhs.value;
        for i in 0..N {
            self.grad[i] -= rhs.grad[i];
            for j in 0..N {
                self.hess[i][j] -= rhs.hess[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Neg for Jet2<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.chain(-self.value, -1.0, 0.0)
    }
}

impl<const N: usize> Mul for Jet2<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::constant(self.value * rhs.value);
        for i in 0..N {
            out.grad[i] = self.value * rhs.grad[i] + rhs.value * self.grad[i];
            for j in 0..N {
                out.hess[i][j] = self.value * rhs.hess[i][j]
                    + rhs.value * self.hess[i][j]
                    + self.grad[i] * rhs.grad[j]
                    + rhs.grad[i] * self.grad[j];
            }
        }
        out
    }
}

impl<const N: usize> Div for Jet2<N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.value;
        self * rhs.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }
}

impl<const N: usize> Scalar for Jet2<N> {
    fn cst(c: f64) -> Self {
        Self::constant(c)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let inv = 1.0 / self.value;
        self.chain(self.value.ln(), inv, -inv * inv)
    }
    fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }
    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }
    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::constant(1.0),
            1 => self,
            _ => {
                let x = self.value;
                let nf = n as f64;
                self.chain(
                    x.powi(n),
                    nf * x.powi(n - 1),
                    nf * (nf - 1.0) * x.powi(n - 2),
                )
            }
        }
    }
    fn powf(self, e: f64) -> Self {
        let x = self.value;
        self.chain(
            x.powf(e),
            e * x.powf(e - 1.0),
            e * (e - 1.0) * x.powf(e - 2.0),
        )
    }
}
