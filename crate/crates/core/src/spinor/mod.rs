//! Null tetrads, two-component spinor algebra, the spin connection and the
//! Penrose Lax pair.
//!
//! Frame index convention: `k = 2A + A'`, so the order is
//! `e_00', e_01', e_10', e_11'`. The frame metric is
//! `η(e_AA', e_BB') = ε_AB ε_A'B'` with `ε_01 = 1`.

mod connection;
mod lax;
mod special;

pub use connection::{koszul_connection, spin_connection, KoszulConnection, SpinConnection};
pub use lax::{
    commutator_poly, default_lambdas, lax_integrability, lax_pair, lax_residual_at, LaxPolys,
    LaxValue, Poly, LAX_SIGN,
};
pub(crate) use special::{nullkahler_f, special_pde};
pub use special::{
    special_lax, special_lax_check, ExprLax, SpecialData, SpecialKind, SpecialReport,
};

use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::geometry::hodge::star_with;
use crate::geometry::linalg::{det_f64, invert};
use crate::geometry::{MetricField, TwoForm};
use crate::jets::{Evaluator, Expr, Jet2};
use crate::report::ResidualReport;

/// ε_AB with ε_01 = 1 (also ε^AB, which has the same components).
pub fn eps(a: usize, b: usize) -> f64 {
    match (a, b) {
        (0, 1) => 1.0,
        (1, 0) => -1.0,
        _ => 0.0,
    }
}

/// η_kl = ε_AB ε_A'B' for k = 2A+A', l = 2B+B'.
pub fn eta(k: usize, l: usize) -> f64 {
    eps(k / 2, l / 2) * eps(k % 2, l % 2)
}

#[derive(Debug, Clone)]
pub enum FrameRepr {
    /// `v[k][μ]` = μ-component of e_k.
    Vectors([[Expr; 4]; 4]),
    /// `c[k][μ]` = μ-component of the dual 1-form e^k.
    Coframe([[Expr; 4]; 4]),
}

#[derive(Debug, Clone)]
pub struct TetradFrame {
    pub repr: FrameRepr,
    /// Density ρ of a volume form ν = ρ dx⁰∧dx¹∧dx²∧dx³.
    pub volume: Option<Expr>,
    /// Lax potentials f_A.
    pub lax_potentials: Option<[Expr; 2]>,
    /// A point of the chart used to fix the orientation.
    pub reference: Vec<f64>,
}

fn frame_orientation(coframe: &[[f64; 4]; 4]) -> f64 {
    let perm = [0, 2, 1, 3];
    let m: [[f64; 4]; 4] = std::array::from_fn(|i| coframe[perm[i]]);
    det_f64(&m).signum()
}

impl TetradFrame {
    pub fn from_vectors(v: [[Expr; 4]; 4], reference: Vec<f64>) -> Self {
        Self {
            repr: FrameRepr::Vectors(v),
            volume: None,
            lax_potentials: None,
            reference,
        }
    }

    pub fn from_coframe(c: [[Expr; 4]; 4], reference: Vec<f64>) -> Self {
        Self {
            repr: FrameRepr::Coframe(c),
            volume: None,
            lax_potentials: None,
            reference,
        }
    }

    /// Constant coordinate frame e_k = ∂_k.
    pub fn coordinate() -> Self {
        Self::from_vectors(
            std::array::from_fn(|k| {
                std::array::from_fn(|m| Expr::constant(if k == m { 1.0 } else { 0.0 }))
            }),
            vec![0.0; 4],
        )
    }

    pub fn with_reference(mut self, p: Vec<f64>) -> Self {
        self.reference = p;
        self
    }

    pub fn with_volume(mut self, rho: Expr) -> Self {
        self.volume = Some(rho);
        self
    }

    pub fn with_lax_potentials(mut self, f: [Expr; 2]) -> Self {
        self.lax_potentials = Some(f);
        self
    }

    fn eval_matrix<const N: usize>(m: &[[Expr; 4]; 4], p: &[f64]) -> Result<[[Jet2<N>; 4]; 4]> {
        let vars: Vec<Jet2<N>> = p
            .iter()
            .enumerate()
            .map(|(i, &x)| Jet2::variable(x, i))
            .collect();
        let mut ev = Evaluator::new(&vars);
        let mut out = [[Jet2::constant(0.0); 4]; 4];
        for k in 0..4 {
            for mu in 0..4 {
                out[k][mu] = ev.eval(&m[k][mu])?;
            }
        }
        Ok(out)
    }

    fn transpose_inverse<T: crate::jets::Scalar>(m: &[[T; 4]; 4]) -> Result<[[T; 4]; 4]> {
        // rows of the result are the dual basis: out[k]·m[l] = δ_kl
        let inv = invert(m)?; // inv · m = 1, so columns of inv pair with rows of m
        Ok(std::array::from_fn(|k| {
            std::array::from_fn(|mu| inv[mu][k])
        }))
    }

    /// Frame vectors to second-order jets.
    pub fn vectors_jet(&self, p: &[f64]) -> Result<[[Jet2<4>; 4]; 4]> {
        match &self.repr {
            FrameRepr::Vectors(v) => Self::eval_matrix(v, p),
            FrameRepr::Coframe(c) => Self::transpose_inverse(&Self::eval_matrix::<4>(c, p)?),
        }
    }

    pub fn coframe_jet(&self, p: &[f64]) -> Result<[[Jet2<4>; 4]; 4]> {
        match &self.repr {
            FrameRepr::Coframe(c) => Self::eval_matrix(c, p),
            FrameRepr::Vectors(v) => Self::transpose_inverse(&Self::eval_matrix::<4>(v, p)?),
        }
    }

    fn eval_plain(m: &[[Expr; 4]; 4], p: &[f64]) -> Result<[[f64; 4]; 4]> {
        let mut ev = Evaluator::new(p);
        let mut out = [[0.0; 4]; 4];
        for k in 0..4 {
            for mu in 0..4 {
                out[k][mu] = ev.eval(&m[k][mu])?;
            }
        }
        Ok(out)
    }

    pub fn vectors_at(&self, p: &[f64]) -> Result<[[f64; 4]; 4]> {
        match &self.repr {
            FrameRepr::Vectors(v) => Self::eval_plain(v, p),
            FrameRepr::Coframe(c) => Self::transpose_inverse(&Self::eval_plain(c, p)?),
        }
    }

    pub fn coframe_at(&self, p: &[f64]) -> Result<[[f64; 4]; 4]> {
        match &self.repr {
            FrameRepr::Coframe(c) => Self::eval_plain(c, p),
            FrameRepr::Vectors(v) => Self::transpose_inverse(&Self::eval_plain(v, p)?),
        }
    }

    /// Orientation in which e^{00'}∧e^{10'}∧e^{01'}∧e^{11'} is positive,
    /// relative to the chart order.
    pub fn orientation_at(&self, p: &[f64]) -> Result<f64> {
        Ok(frame_orientation(&self.coframe_at(p)?))
    }

    /// The metric 2(e^{00'}⊙e^{11'} − e^{10'}⊙e^{01'}), oriented by the frame.
    pub fn metric(&self) -> Result<MetricField> {
        let orient = self.orientation_at(&self.reference)?;
        let build = |m: &[[Expr; 4]; 4]| -> Vec<Vec<Expr>> {
            (0..4)
                .map(|a| {
                    (0..4)
                        .map(|b| {
                            &m[0][a] * &m[3][b] + &m[3][a] * &m[0][b]
                                - &m[1][a] * &m[2][b]
                                - &m[2][a] * &m[1][b]
                        })
                        .collect()
                })
                .collect()
        };
        let g = match &self.repr {
            FrameRepr::Coframe(c) => MetricField::covariant(build(c)),
            FrameRepr::Vectors(v) => MetricField::contravariant(build(v)),
        };
        Ok(g.with_orientation(orient))
    }

    /// New frame e'_k = Σ_l R_kl e_l for a constant matrix R.
    pub fn transformed(&self, r: &[[f64; 4]; 4]) -> Result<Self> {
        let repr = match &self.repr {
            FrameRepr::Vectors(v) => FrameRepr::Vectors(std::array::from_fn(|k| {
                std::array::from_fn(|mu| {
                    (0..4).fold(Expr::zero(), |acc, l| acc + r[k][l] * &v[l][mu])
                })
            })),
            FrameRepr::Coframe(c) => {
                // e'^k = Σ_l (R⁻¹)_lk e^l
                let ri = invert(r)?;
                FrameRepr::Coframe(std::array::from_fn(|k| {
                    std::array::from_fn(|mu| {
                        (0..4).fold(Expr::zero(), |acc, l| acc + ri[l][k] * &c[l][mu])
                    })
                }))
            }
        };
        Ok(Self {
            repr,
            ..self.clone()
        })
    }

    /// Rotate the unprimed dyad: e'_{AA'} = Λ_A^B e_{BA'}.
    pub fn rotate_unprimed(&self, lam: &[[f64; 2]; 2]) -> Result<Self> {
        self.transformed(&std::array::from_fn(|k| {
            std::array::from_fn(|l| {
                if k % 2 == l % 2 {
                    lam[k / 2][l / 2]
                } else {
                    0.0
                }
            })
        }))
    }

    /// Rotate the primed dyad: e'_{AA'} = Λ_{A'}^{B'} e_{AB'}.
    pub fn rotate_primed(&self, lam: &[[f64; 2]; 2]) -> Result<Self> {
        self.transformed(&std::array::from_fn(|k| {
            std::array::from_fn(|l| {
                if k / 2 == l / 2 {
                    lam[k % 2][l % 2]
                } else {
                    0.0
                }
            })
        }))
    }
}

/// Random SL(2,ℝ) matrix from three parameters (product of shears and a boost).
pub fn sl2(a: f64, b: f64, c: f64) -> [[f64; 2]; 2] {
    let s1 = [[1.0, a], [0.0, 1.0]];
    let s2 = [[1.0, 0.0], [b, 1.0]];
    let d = [[c.exp(), 0.0], [0.0, (-c).exp()]];
    let mul = |x: [[f64; 2]; 2], y: [[f64; 2]; 2]| -> [[f64; 2]; 2] {
        std::array::from_fn(|i| std::array::from_fn(|j| x[i][0] * y[0][j] + x[i][1] * y[1][j]))
    };
    mul(mul(s1, s2), d)
}

/// Metric rebuilt from the coframe at `p`.
pub fn frame_metric_at(frame: &TetradFrame, p: &[f64]) -> Result<[[f64; 4]; 4]> {
    let c = frame.coframe_at(p)?;
    Ok(std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut s = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    s += eta(k, l) * c[k][a] * c[l][b];
                }
            }
            s
        })
    }))
}

pub fn verify_tetrad(
    g: &MetricField,
    frame: &TetradFrame,
    samples: &[Vec<f64>],
    tolerance: f64,
) -> ResidualReport {
    let res: Vec<f64> = samples
        .par_iter()
        .map(|p| -> Result<f64> {
            let gf = frame_metric_at(frame, p)?;
            let gv = g.values::<4>(p)?;
            let mut m: f64 = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    m = m.max((gf[a][b] - gv[a][b]).abs());
                }
            }
            Ok(m)
        })
        .map(|r| r.unwrap_or(f64::INFINITY))
        .collect();
    ResidualReport::from_residuals("tetrad", &res, tolerance)
}

/// Factor a degenerate 2×2 matrix as V = μ νᵀ. The row of largest norm is
/// taken as ν and μ holds the row multipliers.
pub fn null_factorize(v: &[[f64; 2]; 2], tol: f64) -> Result<([f64; 2], [f64; 2])> {
    let norm2: f64 = v.iter().flatten().map(|x| x * x).sum();
    let det = v[0][0] * v[1][1] - v[0][1] * v[1][0];
    if det.abs() > tol * norm2.max(f64::MIN_POSITIVE) || norm2 == 0.0 {
        return Err(GeomError::NonNull(det));
    }
    let r0 = v[0][0].hypot(v[0][1]);
    let r1 = v[1][0].hypot(v[1][1]);
    let piv = if r0 >= r1 { 0 } else { 1 };
    let nu = v[piv];
    let nn = nu[0] * nu[0] + nu[1] * nu[1];
    let mu: [f64; 2] = std::array::from_fn(|i| (v[i][0] * nu[0] + v[i][1] * nu[1]) / nn);
    Ok((mu, nu))
}

fn wedge(a: &[f64; 4], b: &[f64; 4]) -> TwoForm {
    std::array::from_fn(|m| std::array::from_fn(|n| a[m] * b[n] - a[n] * b[m]))
}

/// Σ forms at `p`, indexed (00, 01, 11): Σ^{A'B'} = ½ ε_AB e^{AA'}∧e^{BB'} and
/// Σ^{AB} = ½ ε_A'B' e^{AA'}∧e^{BB'}. Returns (Σ^{AB}, Σ^{A'B'}).
pub fn sigma_basis(frame: &TetradFrame, p: &[f64]) -> Result<([TwoForm; 3], [TwoForm; 3])> {
    let c = frame.coframe_at(p)?;
    let pairs = [(0, 0), (0, 1), (1, 1)];
    let unprimed = pairs.map(|(a, b)| {
        let mut s = [[0.0; 4]; 4];
        for ap in 0..2 {
            for bp in 0..2 {
                let w = 0.5 * eps(ap, bp);
                if w != 0.0 {
                    let f = wedge(&c[2 * a + ap], &c[2 * b + bp]);
                    for m in 0..4 {
                        for n in 0..4 {
                            s[m][n] += w * f[m][n];
                        }
                    }
                }
            }
        }
        s
    });
    let primed = pairs.map(|(ap, bp)| {
        let mut s = [[0.0; 4]; 4];
        for a in 0..2 {
            for b in 0..2 {
                let w = 0.5 * eps(a, b);
                if w != 0.0 {
                    let f = wedge(&c[2 * a + ap], &c[2 * b + bp]);
                    for m in 0..4 {
                        for n in 0..4 {
                            s[m][n] += w * f[m][n];
                        }
                    }
                }
            }
        }
        s
    });
    Ok((unprimed, primed))
}

/// Largest deviation of *Σ^{A'B'} − Σ^{A'B'} and *Σ^{AB} + Σ^{AB}, using the
/// metric and orientation of the frame itself.
pub fn sigma_duality_defect(frame: &TetradFrame, p: &[f64]) -> Result<f64> {
    let g = frame_metric_at(frame, p)?;
    let ginv = invert(&g)?;
    let orient = frame.orientation_at(&frame.reference)?;
    let (asd, sd) = sigma_basis(frame, p)?;
    let mut m: f64 = 0.0;
    for (forms, sign) in [(sd, 1.0), (asd, -1.0)] {
        for f in forms.iter() {
            let s = star_with(&g, &ginv, orient, f);
            for a in 0..4 {
                for b in 0..4 {
                    m = m.max((s[a][b] - sign * f[a][b]).abs());
                }
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_reference_metric() -> MetricField {
        // 2(dx⁰⊙dx³ − dx²⊙dx¹)
        let z = Expr::zero;
        let o = Expr::one;
        let m = || Expr::constant(-1.0);
        MetricField::covariant(vec![
            vec![z(), z(), z(), o()],
            vec![z(), z(), m(), z()],
            vec![z(), m(), z(), z()],
            vec![o(), z(), z(), z()],
        ])
    }

    #[test]
    fn flat_tetrad_reproduces_metric() {
        let samples = vec![vec![0.1, 0.2, 0.3, 0.4], vec![-1.0, 0.5, 2.0, 0.0]];
        let r = verify_tetrad(
            &flat_reference_metric(),
            &TetradFrame::coordinate(),
            &samples,
            1e-14,
        );
        assert!(r.passed());
        assert_eq!(r.max_abs, 0.0);
    }

    #[test]
    fn null_factorization() {
        assert_eq!(
            null_factorize(&[[1.0, 0.0], [0.0, 0.0]], 1e-12).unwrap(),
            ([1.0, 0.0], [1.0, 0.0])
        );
        assert_eq!(
            null_factorize(&[[1.0, 1.0], [1.0, 1.0]], 1e-12).unwrap(),
            ([1.0, 1.0], [1.0, 1.0])
        );
        assert!(matches!(
            null_factorize(&[[1.0, 0.0], [0.0, 1.0]], 1e-12),
            Err(GeomError::NonNull(_))
        ));
        let (mu, nu) = null_factorize(&[[2.0, -4.0], [1.0, -2.0]], 1e-12).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((mu[i] * nu[j] - [[2.0, -4.0], [1.0, -2.0]][i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sigma_identity_and_duality_flat() {
        let fr = TetradFrame::coordinate();
        let p = [0.0; 4];
        let (asd, sd) = sigma_basis(&fr, &p).unwrap();
        // e^{AA'}∧e^{BB'} = ε^{AB}Σ^{A'B'} + ε^{A'B'}Σ^{AB}
        let c = fr.coframe_at(&p).unwrap();
        let idx = |a: usize, b: usize| if a == b { 2 * a } else { 1 };
        for k in 0..4 {
            for l in 0..4 {
                let (a, ap, b, bp) = (k / 2, k % 2, l / 2, l % 2);
                let lhs = wedge(&c[k], &c[l]);
                let spd = sd[if ap == bp { 2 * ap } else { 1 }];
                let sud = asd[idx(a, b)];
                for m in 0..4 {
                    for n in 0..4 {
                        let rhs = eps(a, b) * spd[m][n] + eps(ap, bp) * sud[m][n];
                        assert!((lhs[m][n] - rhs).abs() < 1e-14);
                    }
                }
            }
        }
        // Σ^{0'1'} = ½(dx⁰∧dx³ − dx²∧dx¹) by brute force
        assert_eq!(sd[1][0][3], 0.5);
        assert_eq!(sd[1][2][1], -0.5);
        assert!(sigma_duality_defect(&fr, &p).unwrap() < 1e-14);
        assert_eq!(fr.orientation_at(&p).unwrap(), -1.0);
    }

    #[test]
    fn frame_metric_matches_symbolic_metric() {
        let x = Expr::var(0);
        let o = Expr::one;
        let z = Expr::zero;
        let fr = TetradFrame::from_vectors(
            [
                [o(), x.clone(), z(), z()],
                [z(), o(), z(), z()],
                [z(), z(), o(), x.sin()],
                [z(), z(), z(), o()],
            ],
            vec![0.3, 0.0, 0.0, 0.0],
        );
        let g = fr.metric().unwrap();
        let p = [0.3, 0.1, -0.2, 0.5];
        let gv = g.values::<4>(&p).unwrap();
        let gf = frame_metric_at(&fr, &p).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert!((gv[a][b] - gf[a][b]).abs() < 1e-14);
            }
        }
    }
}
