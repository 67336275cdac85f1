use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::connection::koszul_connection;
use super::TetradFrame;
use crate::error::{GeomError, Result};
use crate::jets::{Dual, Scalar};
use crate::report::ResidualReport;

/// Sign of the ∂_λ part of the lift, b_A = LAX_SIGN·(V^{1'} − λV^{0'}).
pub const LAX_SIGN: f64 = -1.0;

/// Polynomial in λ, ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T>(pub Vec<T>);

impl<T: Scalar> Poly<T> {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: T) -> Self {
        Poly(vec![c])
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn coeff(&self, i: usize) -> T {
        self.0.get(i).copied().unwrap_or(T::cst(0.0))
    }

    pub fn eval(&self, x: f64) -> T {
        self.0
            .iter()
            .rev()
            .fold(T::cst(0.0), |acc, c| acc * T::cst(x) + *c)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.0.is_empty() || o.0.is_empty() {
            return Self::zero();
        }
        let mut out = vec![T::cst(0.0); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] = out[i + j] + *a * *b;
            }
        }
        Poly(out)
    }

    /// d/dλ
    pub fn deriv(&self) -> Self {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.scale(i as f64))
                .collect(),
        )
    }
}

impl<const N: usize> Poly<Dual<N>> {
    pub fn values(&self) -> Poly<f64> {
        Poly(self.0.iter().map(|c| c.value).collect())
    }

    /// ∂/∂x^i of every coefficient.
    pub fn partial(&self, i: usize) -> Poly<f64> {
        Poly(self.0.iter().map(|c| c.grad[i]).collect())
    }
}

/// Components of L_0, L_1 over (x⁰..x³, λ), polynomial in λ with first-order
/// jets in x for the coefficients.
pub type LaxPolys = [[Poly<Dual<4>>; 5]; 2];

/// L_A = e_{A0'} + λe_{A1'} + b_A ∂_λ with the λ-part from the primed
/// connection, V^{C'} = Γ_{AA'B'}{}^{C'} π^{A'}π^{B'}, π = (1, λ).
pub fn lax_pair(frame: &TetradFrame, p: &[f64]) -> Result<LaxPolys> {
    let kc = koszul_connection(frame, p)?;
    let pi = |a: usize| -> Poly<Dual<4>> {
        if a == 0 {
            Poly::constant(Dual::constant(1.0))
        } else {
            Poly(vec![Dual::constant(0.0), Dual::constant(1.0)])
        }
    };
    Ok(std::array::from_fn(|a| {
        let mut comps: [Poly<Dual<4>>; 5] = std::array::from_fn(|mu| {
            if mu < 4 {
                Poly(vec![
                    kc.vectors[2 * a][mu].to_dual(),
                    kc.vectors[2 * a + 1][mu].to_dual(),
                ])
            } else {
                Poly::zero()
            }
        });
        let v: [Poly<Dual<4>>; 2] = std::array::from_fn(|c| {
            let mut acc = Poly::zero();
            for ap in 0..2 {
                for bp in 0..2 {
                    let g = Poly::constant(kc.primed[2 * a + ap][bp][c]);
                    acc = acc.add(&g.mul(&pi(ap)).mul(&pi(bp)));
                }
            }
            acc
        });
        let b = v[1].sub(&pi(1).mul(&v[0]));
        comps[4] = Poly(b.0.into_iter().map(|c| c.scale(LAX_SIGN)).collect());
        comps
    }))
}

/// [L_0, L_1] as polynomials in λ with numeric coefficients.
pub fn commutator_poly(l: &LaxPolys) -> [Poly<f64>; 5] {
    // L(a) for a component polynomial a: Σ_μ L^μ ∂_μ a + L^λ ∂_λ a
    let apply = |lv: &[Poly<Dual<4>>; 5], a: &Poly<Dual<4>>| -> Poly<f64> {
        let mut out = Poly::zero();
        for mu in 0..4 {
            out = out.add(&lv[mu].values().mul(&a.partial(mu)));
        }
        out.add(&lv[4].values().mul(&a.values().deriv()))
    };
    std::array::from_fn(|nu| apply(&l[0], &l[1][nu]).sub(&apply(&l[1], &l[0][nu])))
}

#[derive(Debug, Clone, Serialize)]
pub struct LaxValue {
    pub lambda: f64,
    pub l0: [f64; 5],
    pub l1: [f64; 5],
    pub commutator: [f64; 5],
    /// ‖C − proj_{span(L0,L1)} C‖ / (‖C‖ + 1)
    pub residual: f64,
}

fn span_residual(l0: &[f64; 5], l1: &[f64; 5], c: &[f64; 5]) -> Result<f64> {
    let a = DMatrix::from_fn(5, 2, |i, j| if j == 0 { l0[i] } else { l1[i] });
    let sv = a.clone().svd(false, false).singular_values;
    if sv[1] <= 1e-10 * sv[0].max(1.0) {
        return Err(GeomError::Degenerate("L0 and L1 are parallel".into()));
    }
    let b = DVector::from_row_slice(c);
    let qr = a.clone().qr();
    let x = qr
        .r()
        .solve_upper_triangular(&(qr.q().transpose() * &b))
        .ok_or_else(|| GeomError::Degenerate("span".into()))?;
    let r = (&b - a * x).norm();
    Ok(r / (b.norm() + 1.0))
}

pub fn lax_residual_at(frame: &TetradFrame, p: &[f64], lambda: f64) -> Result<LaxValue> {
    let l = lax_pair(frame, p)?;
    let c = commutator_poly(&l);
    let l0 = std::array::from_fn(|i| l[0][i].values().eval(lambda));
    let l1 = std::array::from_fn(|i| l[1][i].values().eval(lambda));
    let commutator = std::array::from_fn(|i| c[i].eval(lambda));
    let residual = span_residual(&l0, &l1, &commutator)?;
    Ok(LaxValue {
        lambda,
        l0,
        l1,
        commutator,
        residual,
    })
}

/// The default spectral samples: {−2,−1,0,1,2} and three seeded extras.
pub fn default_lambdas(seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = vec![-2.0, -1.0, 0.0, 1.0, 2.0];
    v.extend((0..3).map(|_| rng.gen_range(-3.0..3.0)));
    v
}

/// Worst span residual over all (point, λ) pairs, named "lax".
pub fn lax_integrability(
    frame: &TetradFrame,
    samples: &[Vec<f64>],
    lambdas: &[f64],
    tolerance: f64,
) -> ResidualReport {
    if lambdas.len() < 3 {
        return ResidualReport::from_residuals("lax", &[], tolerance)
            .with_note("need at least 3 λ values");
    }
    let res: Vec<f64> = samples
        .par_iter()
        .flat_map_iter(|p| {
            let pair = lax_pair(frame, p);
            lambdas
                .iter()
                .map(move |&lam| {
                    let l = match &pair {
                        Ok(l) => l,
                        Err(_) => return f64::INFINITY,
                    };
                    let c = commutator_poly(l);
                    let l0 = std::array::from_fn(|i| l[0][i].values().eval(lam));
                    let l1 = std::array::from_fn(|i| l[1][i].values().eval(lam));
                    let cv = std::array::from_fn(|i| c[i].eval(lam));
                    span_residual(&l0, &l1, &cv).unwrap_or(f64::INFINITY)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    ResidualReport::from_residuals("lax", &res, tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_arithmetic() {
        let a = Poly(vec![1.0, 2.0]);
        let b = Poly(vec![0.0, 1.0, 3.0]);
        assert_eq!(a.mul(&b).0, vec![0.0, 1.0, 5.0, 6.0]);
        assert_eq!(b.deriv().0, vec![1.0, 6.0]);
        assert_eq!(a.sub(&b).eval(2.0), 5.0 - 14.0);
    }

    #[test]
    fn flat_frame_lax_pair() {
        let l = lax_pair(&TetradFrame::coordinate(), &[0.3, 0.1, -0.2, 0.5]).unwrap();
        assert_eq!(l[0][0].values().0, vec![1.0, 0.0]);
        assert_eq!(l[0][1].values().0, vec![0.0, 1.0]);
        assert_eq!(l[1][2].values().0, vec![1.0, 0.0]);
        assert_eq!(l[1][3].values().0, vec![0.0, 1.0]);
        assert!(l[0][4]
            .values()
            .0
            .iter()
            .chain(l[1][4].values().0.iter())
            .all(|c| *c == 0.0));
        let v = lax_residual_at(&TetradFrame::coordinate(), &[0.0; 4], 1.5).unwrap();
        assert_eq!(v.residual, 0.0);
    }
}
