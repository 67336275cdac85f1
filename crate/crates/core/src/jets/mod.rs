//! Exact second-order forward differentiation of scalar fields.

mod dual;
mod expr;
mod parse;

pub use dual::{Dual, Jet2, Scalar};
pub use expr::{Evaluator, Expr, Node, SINGULAR_EPS};
pub use parse::parse_expr;

use crate::error::{GeomError, Result};

/// Axis-aligned chart box.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        Self { lo, hi }
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn unbounded(dim: usize) -> Self {
        Self::cube(dim, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (a, b))| *x >= *a && *x <= *b)
    }
}

/// An expression in `arity` chart variables with a declared domain.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub expr: Expr,
    pub arity: usize,
    pub domain: DomainBox,
}

impl ScalarField {
    pub fn new(expr: Expr, arity: usize) -> Self {
        Self::with_domain(expr, DomainBox::unbounded(arity))
    }

    pub fn with_domain(expr: Expr, domain: DomainBox) -> Self {
        let arity = domain.dim();
        assert!((1..=5).contains(&arity), "arity {arity} unsupported");
        if let Some(m) = expr.max_var() {
            assert!(m < arity, "expression uses x{m} but arity is {arity}");
        }
        Self {
            expr,
            arity,
            domain,
        }
    }

    pub fn parse(src: &str, vars: &[&str]) -> Result<Self> {
        Ok(Self::new(parse_expr(src, vars)?, vars.len()))
    }

    pub fn value(&self, p: &[f64]) -> Result<f64> {
        self.check(p)?;
        self.expr.eval(p)
    }

    fn check(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.arity {
            return Err(GeomError::Arity {
                needed: self.arity,
                got: p.len(),
            });
        }
        if !self.domain.contains(p) {
            return Err(GeomError::Domain { point: p.to_vec() });
        }
        Ok(())
    }
}

/// Second-order jet of `f` at `p`, carried in `N ≥ arity` slots.
pub fn jet_eval<const N: usize>(f: &ScalarField, p: &[f64]) -> Result<Jet2<N>> {
    f.check(p)?;
    if N < f.arity {
        return Err(GeomError::Arity {
            needed: f.arity,
            got: N,
        });
    }
    let vars: Vec<Jet2<N>> = p
        .iter()
        .enumerate()
        .map(|(i, &x)| Jet2::variable(x, i))
        .collect();
    f.expr.eval(&vars)
}

/// Dynamic-size view of a jet (value, gradient, Hessian) truncated to the arity.
#[derive(Debug, Clone, PartialEq)]
pub struct JetView {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<Vec<f64>>,
}

pub fn jet_view(f: &ScalarField, p: &[f64]) -> Result<JetView> {
    let j = jet_eval::<5>(f, p)?;
    let n = f.arity;
    Ok(JetView {
        value: j.value,
        grad: j.grad[..n].to_vec(),
        hess: (0..n).map(|i| j.hess[i][..n].to_vec()).collect(),
    })
}

/// Maximum discrepancy between the exact jet and Richardson-extrapolated
/// central differences with steps `h` and `h/2`.
pub fn fd_crosscheck(f: &ScalarField, p: &[f64], h: f64) -> Result<f64> {
    assert!(h > 0.0, "step must be positive");
    let jet = jet_view(f, p)?;
    let n = f.arity;
    let eval = |q: &[f64]| f.expr.eval::<f64>(q);
    let shifted = |d: &[(usize, f64)]| -> Result<f64> {
        let mut q = p.to_vec();
        for &(i, s) in d {
            q[i] += s;
        }
        eval(&q)
    };
    let f0 = eval(p)?;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let d1 = |h: f64| -> Result<f64> {
            Ok((shifted(&[(i, h)])? - shifted(&[(i, -h)])?) / (2.0 * h))
        };
        let g = (4.0 * d1(h / 2.0)? - d1(h)?) / 3.0;
        worst = worst.max((g - jet.grad[i]).abs());
        for j in i..n {
            let d2 = |h: f64| -> Result<f64> {
                if i == j {
                    Ok((shifted(&[(i, h)])? - 2.0 * f0 + shifted(&[(i, -h)])?) / (h * h))
                } else {
                    Ok((shifted(&[(i, h), (j, h)])?
                        - shifted(&[(i, h), (j, -h)])?
                        - shifted(&[(i, -h), (j, h)])?
                        + shifted(&[(i, -h), (j, -h)])?)
                        / (4.0 * h * h))
                }
            };
            let hh = (4.0 * d2(h / 2.0)? - d2(h)?) / 3.0;
            worst = worst.max((hh - jet.hess[i][j]).abs());
        }
    }
    Ok(worst)
}
