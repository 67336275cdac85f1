//! Expression trees over chart coordinates.
//!
//! Potentials (Ω, Θ, Q, ...) are expressions; metric components built from
//! their second derivatives are obtained by symbolic differentiation, and
//! everything is finally evaluated to [`Jet2`](super::Jet2) precision.
//! Subtrees are shared through `Arc`, so differentiation and evaluation are
//! memoised on node identity.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use super::dual::Scalar;
use crate::error::{GeomError, Result};

/// Denominators, log and sqrt arguments below this magnitude are treated as
/// a singular locus.
pub const SINGULAR_EPS: f64 = 1e-12;

#[derive(Debug)]
pub enum Node {
    Const(f64),
    Var(usize),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    /// Integer power.
    Powi(Expr, i32),
    /// Power with an expression exponent, evaluated as `exp(b ln a)`.
    Pow(Expr, Expr),
    Exp(Expr),
    Ln(Expr),
    Sin(Expr),
    Cos(Expr),
    Sqrt(Expr),
}

#[derive(Clone, Debug)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(c: f64) -> Self {
        Self::new(Node::Const(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn var(i: usize) -> Self {
        Self::new(Node::Var(i))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn powi(&self, n: i32) -> Expr {
        if n == 0 {
            return Expr::one();
        }
        if n == 1 {
            return self.clone();
        }
        if let Some(c) = self.as_const() {
            return Expr::constant(c.powi(n));
        }
        Expr::new(Node::Powi(self.clone(), n))
    }

    pub fn pow(&self, e: &Expr) -> Expr {
        if let Some(c) = e.as_const() {
            if c.fract() == 0.0 && c.abs() <= 64.0 {
                return self.powi(c as i32);
            }
        }
        if let (Some(a), Some(b)) = (self.as_const(), e.as_const()) {
            return Expr::constant(a.powf(b));
        }
        Expr::new(Node::Pow(self.clone(), e.clone()))
    }

    pub fn exp(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.exp()),
            None => Expr::new(Node::Exp(self.clone())),
        }
    }

    pub fn ln(&self) -> Expr {
        match self.as_const() {
            Some(c) if c > 0.0 => Expr::constant(c.ln()),
            _ => Expr::new(Node::Ln(self.clone())),
        }
    }

    pub fn sin(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.sin()),
            None => Expr::new(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.cos()),
            None => Expr::new(Node::Cos(self.clone())),
        }
    }

    pub fn sqrt(&self) -> Expr {
        match self.as_const() {
            Some(c) if c >= 0.0 => Expr::constant(c.sqrt()),
            _ => Expr::new(Node::Sqrt(self.clone())),
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        let mut seen = HashMap::new();
        self.max_var_memo(&mut seen)
    }

    fn max_var_memo(&self, seen: &mut HashMap<usize, Option<usize>>) -> Option<usize> {
        if let Some(v) = seen.get(&self.id()) {
            return *v;
        }
        let r = match self.node() {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b) => a.max_var_memo(seen).max(b.max_var_memo(seen)),
            Node::Neg(a)
            | Node::Powi(a, _)
            | Node::Exp(a)
            | Node::Ln(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Sqrt(a) => a.max_var_memo(seen),
        };
        seen.insert(self.id(), r);
        r
    }

    /// Symbolic partial derivative with respect to variable `var`.
    pub fn diff(&self, var: usize) -> Expr {
        let mut memo = HashMap::new();
        self.diff_memo(var, &mut memo)
    }

    /// Mixed second derivative `∂_i ∂_j`.
    pub fn diff2(&self, i: usize, j: usize) -> Expr {
        self.diff(i).diff(j)
    }

    fn diff_memo(&self, var: usize, memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(d) = memo.get(&self.id()) {
            return d.clone();
        }
        let d = match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(i) => {
                if *i == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(a, b) => a.diff_memo(var, memo) + b.diff_memo(var, memo),
            Node::Sub(a, b) => a.diff_memo(var, memo) - b.diff_memo(var, memo),
            Node::Mul(a, b) => {
                let da = a.diff_memo(var, memo);
                let db = b.diff_memo(var, memo);
                &da * b + a * &db
            }
            Node::Div(a, b) => {
                let da = a.diff_memo(var, memo);
                let db = b.diff_memo(var, memo);
                if db.is_zero() {
                    &da / b
                } else {
                    (&da * b - a * &db) / b.powi(2)
                }
            }
            Node::Neg(a) => -a.diff_memo(var, memo),
            Node::Powi(a, n) => {
                let da = a.diff_memo(var, memo);
                Expr::constant(*n as f64) * a.powi(n - 1) * da
            }
            Node::Pow(a, b) => {
                // d(a^b) = a^b (b' ln a + b a'/a)
                let da = a.diff_memo(var, memo);
                let db = b.diff_memo(var, memo);
                let term = &db * &a.ln() + b * &da / a;
                self * &term
            }
            Node::Exp(a) => {
                let da = a.diff_memo(var, memo);
                self * &da
            }
            Node::Ln(a) => a.diff_memo(var, memo) / a,
            Node::Sin(a) => a.cos() * a.diff_memo(var, memo),
            Node::Cos(a) => -(a.sin() * a.diff_memo(var, memo)),
            Node::Sqrt(a) => a.diff_memo(var, memo) / (Expr::constant(2.0) * self),
        };
        memo.insert(self.id(), d.clone());
        d
    }

    /// Replace every variable `i` with `subs[i]`.
    pub fn substitute(&self, subs: &[Expr]) -> Expr {
        let mut memo = HashMap::new();
        self.subst_memo(subs, &mut memo)
    }

    fn subst_memo(&self, subs: &[Expr], memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(d) = memo.get(&self.id()) {
            return d.clone();
        }
        let r = match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(i) => subs[*i].clone(),
            Node::Add(a, b) => a.subst_memo(subs, memo) + b.subst_memo(subs, memo),
            Node::Sub(a, b) => a.subst_memo(subs, memo) - b.subst_memo(subs, memo),
            Node::Mul(a, b) => a.subst_memo(subs, memo) * b.subst_memo(subs, memo),
            Node::Div(a, b) => a.subst_memo(subs, memo) / b.subst_memo(subs, memo),
            Node::Neg(a) => -a.subst_memo(subs, memo),
            Node::Powi(a, n) => a.subst_memo(subs, memo).powi(*n),
            Node::Pow(a, b) => a.subst_memo(subs, memo).pow(&b.subst_memo(subs, memo)),
            Node::Exp(a) => a.subst_memo(subs, memo).exp(),
            Node::Ln(a) => a.subst_memo(subs, memo).ln(),
            Node::Sin(a) => a.subst_memo(subs, memo).sin(),
            Node::Cos(a) => a.subst_memo(subs, memo).cos(),
            Node::Sqrt(a) => a.subst_memo(subs, memo).sqrt(),
        };
        memo.insert(self.id(), r.clone());
        r
    }

    /// Evaluate with a fresh cache.
    pub fn eval<T: Scalar>(&self, vars: &[T]) -> Result<T> {
        Evaluator::new(vars).eval(self)
    }
}

/// Memoised evaluator; one instance per chart point so that expressions
/// sharing subtrees (e.g. all components of a metric) pay for them once.
pub struct Evaluator<'a, T: Scalar> {
    vars: &'a [T],
    cache: HashMap<usize, T>,
}

impl<'a, T: Scalar> Evaluator<'a, T> {
    pub fn new(vars: &'a [T]) -> Self {
        Self {
            vars,
            cache: HashMap::new(),
        }
    }

    pub fn eval(&mut self, e: &Expr) -> Result<T> {
        if let Some(v) = self.cache.get(&e.id()) {
            return Ok(*v);
        }
        let v = match e.node() {
            Node::Const(c) => T::cst(*c),
            Node::Var(i) => *self.vars.get(*i).ok_or(GeomError::Arity {
                needed: *i + 1,
                got: self.vars.len(),
            })?,
            Node::Add(a, b) => self.eval(a)? + self.eval(b)?,
            Node::Sub(a, b) => self.eval(a)? - self.eval(b)?,
            Node::Mul(a, b) => self.eval(a)? * self.eval(b)?,
            Node::Div(a, b) => {
                let den = self.eval(b)?;
                if den.value().abs() < SINGULAR_EPS {
                    return Err(GeomError::Singular(format!(
                        "division by {:e}",
                        den.value()
                    )));
                }
                self.eval(a)? / den
            }
            Node::Neg(a) => -self.eval(a)?,
            Node::Powi(a, n) => {
                let x = self.eval(a)?;
                if *n < 0 && x.value().abs() < SINGULAR_EPS {
                    return Err(GeomError::Singular(format!(
                        "negative power of {:e}",
                        x.value()
                    )));
                }
                x.powi(*n)
            }
            Node::Pow(a, b) => {
                let x = self.eval(a)?;
                if x.value() < SINGULAR_EPS {
                    return Err(GeomError::Singular(format!(
                        "non-positive base {:e}",
                        x.value()
                    )));
                }
                match b.as_const() {
                    Some(c) => x.powf(c),
                    None => (self.eval(b)? * x.ln()).exp(),
                }
            }
            Node::Exp(a) => self.eval(a)?.exp(),
            Node::Ln(a) => {
                let x = self.eval(a)?;
                if x.value() < SINGULAR_EPS {
                    return Err(GeomError::Singular(format!("log of {:e}", x.value())));
                }
                x.ln()
            }
            Node::Sin(a) => self.eval(a)?.sin(),
            Node::Cos(a) => self.eval(a)?.cos(),
            Node::Sqrt(a) => {
                let x = self.eval(a)?;
                if x.value() < SINGULAR_EPS {
                    return Err(GeomError::Singular(format!("sqrt of {:e}", x.value())));
                }
                x.sqrt()
            }
        };
        if !v.value().is_finite() {
            return Err(GeomError::NonFinite);
        }
        self.cache.insert(e.id(), v);
        Ok(v)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(i) => write!(f, "x{i}"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "{a}*{b}"),
            Node::Div(a, b) => write!(f, "{a}/({b})"),
            Node::Neg(a) => write!(f, "-({a})"),
            Node::Powi(a, n) => write!(f, "({a})^{n}"),
            Node::Pow(a, b) => write!(f, "({a})^({b})"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Ln(a) => write!(f, "log({a})"),
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
            Node::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

fn add(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x + y),
        (Some(0.0), _) => b.clone(),
        (_, Some(0.0)) => a.clone(),
        _ => Expr::new(Node::Add(a.clone(), b.clone())),
    }
}

fn sub(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x - y),
        (Some(0.0), _) => -b,
        (_, Some(0.0)) => a.clone(),
        _ => Expr::new(Node::Sub(a.clone(), b.clone())),
    }
}

fn mul(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::zero(),
        _ if a.is_one() => b.clone(),
        _ if b.is_one() => a.clone(),
        (Some(-1.0), _) => -b,
        (_, Some(-1.0)) => -a,
        _ => Expr::new(Node::Mul(a.clone(), b.clone())),
    }
}

fn div(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if y != 0.0 => Expr::constant(x / y),
        (Some(0.0), _) => Expr::zero(),
        _ if b.is_one() => a.clone(),
        _ => Expr::new(Node::Div(a.clone(), b.clone())),
    }
}

fn neg(a: &Expr) -> Expr {
    match a.node() {
        Node::Const(c) => Expr::constant(-c),
        Node::Neg(inner) => inner.clone(),
        _ => Expr::new(Node::Neg(a.clone())),
    }
}

macro_rules! impl_binop {
    ($tr:ident, $method:ident, $f:ident) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $f(&self, &rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $f(&self, rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $f(self, &rhs)
            }
        }
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $f(self, rhs)
            }
        }
        impl $tr<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $f(&self, &Expr::constant(rhs))
            }
        }
        impl $tr<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $f(self, &Expr::constant(rhs))
            }
        }
        impl $tr<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $f(&Expr::constant(self), &rhs)
            }
        }
        impl $tr<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $f(&Expr::constant(self), rhs)
            }
        }
    };
}

impl_binop!(Add, add, add);
impl_binop!(Sub, sub, sub);
impl_binop!(Mul, mul, mul);
impl_binop!(Div, div, div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(&self)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Jet2;

    fn x(i: usize) -> Expr {
        Expr::var(i)
    }

    #[test]
    fn symbolic_derivative_matches_jet() {
        let e = (x(0) * x(1)).sin() + x(2).powi(3) / (x(0).exp() + 1.0);
        let p = [0.3, -0.7, 1.1, 0.0];
        let vars: Vec<Jet2<4>> = (0..4).map(|i| Jet2::variable(p[i], i)).collect();
        let j = e.eval(&vars).unwrap();
        for i in 0..4 {
            let d = e.diff(i).eval(&p).unwrap();
            assert!((d - j.grad[i]).abs() < 1e-13, "grad {i}");
            for k in 0..4 {
                let d2 = e.diff2(i, k).eval(&p).unwrap();
                assert!((d2 - j.hess[i][k]).abs() < 1e-12, "hess {i}{k}");
            }
        }
    }

    #[test]
    fn constant_folding_keeps_trees_small() {
        let e = x(0) * 0.0 + 1.0 * x(1);
        assert!(matches!(e.node(), Node::Var(1)));
        assert!(x(3).diff(2).is_zero());
    }

    #[test]
    fn singular_division_is_an_error() {
        let e = x(0) / x(1);
        assert!(matches!(e.eval(&[1.0, 0.0]), Err(GeomError::Singular(_))));
        assert!(matches!(
            x(0).ln().eval(&[-1.0]),
            Err(GeomError::Singular(_))
        ));
    }

    #[test]
    fn substitution_remaps_variables() {
        let e = x(0) * x(1) + x(1);
        let s = e.substitute(&[x(1), Expr::constant(2.0)]);
        assert_eq!(s.eval(&[0.0, 5.0]).unwrap(), 12.0);
    }
}
