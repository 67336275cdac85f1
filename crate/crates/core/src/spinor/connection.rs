use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{eps, eta, TetradFrame};
use crate::error::{GeomError, Result};
use crate::geometry::linalg::{invert, lstsq};
use crate::jets::{Dual, Jet2, Scalar};

/// Connection of a frame at a point.
/// `primed[k][b][c] = Γ_{k B'}{}^{C'}`, `unprimed[k][b][c] = Γ_{k B}{}^{C}`,
/// defined by ∇_{e_k} e_{BB'} = Γ_{kB'}{}^{D'} e_{BD'} + Γ_{kB}{}^{D} e_{DB'}.
#[derive(Debug, Clone, Serialize)]
pub struct SpinConnection {
    pub primed: [[[f64; 2]; 2]; 4],
    pub unprimed: [[[f64; 2]; 2]; 4],
    /// Residual of the Cartan structure equations.
    pub cartan_residual: f64,
    /// Max difference from the Koszul-formula coefficients.
    pub koszul_gap: f64,
}

impl SpinConnection {
    /// Γ_{kB'C'} = Γ_{kB'}{}^{D'} ε_{D'C'}.
    pub fn primed_lowered(&self, k: usize, b: usize, c: usize) -> f64 {
        (0..2).map(|d| self.primed[k][b][d] * eps(d, c)).sum()
    }
}

/// Exact connection data from the frame jets.
pub struct KoszulConnection {
    pub vectors: [[Jet2<4>; 4]; 4],
    /// Γ_klm = η(∇_{e_k} e_l, e_m), first-order accurate in derivatives.
    pub gamma: [[[Dual<4>; 4]; 4]; 4],
    pub primed: [[[Dual<4>; 2]; 2]; 4],
    pub unprimed: [[[Dual<4>; 2]; 2]; 4],
    /// c[k][l][m] = c_kl^m from [e_k, e_l] = c_kl^m e_m (values only).
    pub structure: [[[f64; 4]; 4]; 4],
}

/// Levi-Civita connection of the frame metric via the Koszul formula with
/// constant η: Γ_klm = ½(c_klm − c_kml − c_lmk).
pub fn koszul_connection(frame: &TetradFrame, p: &[f64]) -> Result<KoszulConnection> {
    let vectors = frame.vectors_jet(p)?;
    let e: [[Dual<4>; 4]; 4] =
        std::array::from_fn(|k| std::array::from_fn(|m| vectors[k][m].to_dual()));
    // ∂_ν e_k^μ
    let de: [[[Dual<4>; 4]; 4]; 4] = std::array::from_fn(|k| {
        std::array::from_fn(|m| std::array::from_fn(|n| vectors[k][m].partial(n)))
    });
    // θ[m][μ] with Σ_μ θ[m][μ] e[l][μ] = δ
    let mt: [[Dual<4>; 4]; 4] = std::array::from_fn(|mu| std::array::from_fn(|k| e[k][mu]));
    let theta = invert(&mt)?;
    let zero = Dual::<4>::constant(0.0);
    let mut c_up = [[[zero; 4]; 4]; 4];
    for k in 0..4 {
        for l in 0..4 {
            let br: [Dual<4>; 4] = std::array::from_fn(|mu| {
                (0..4).fold(zero, |acc, nu| {
                    acc + e[k][nu] * de[l][mu][nu] - e[l][nu] * de[k][mu][nu]
                })
            });
            for m in 0..4 {
                c_up[k][l][m] = (0..4).fold(zero, |acc, mu| acc + theta[m][mu] * br[mu]);
            }
        }
    }
    // lower: c_klm = c_kl^n η_nm
    let c_lo: [[[Dual<4>; 4]; 4]; 4] = std::array::from_fn(|k| {
        std::array::from_fn(|l| {
            std::array::from_fn(|m| {
                (0..4).fold(zero, |acc, n| acc + c_up[k][l][n].scale(eta(n, m)))
            })
        })
    });
    let gamma: [[[Dual<4>; 4]; 4]; 4] = std::array::from_fn(|k| {
        std::array::from_fn(|l| {
            std::array::from_fn(|m| (c_lo[k][l][m] - c_lo[k][m][l] - c_lo[l][m][k]).scale(0.5))
        })
    });
    let mut primed = [[[zero; 2]; 2]; 4];
    let mut unprimed = [[[zero; 2]; 2]; 4];
    for k in 0..4 {
        for b in 0..2 {
            // P_{kB'C'} = ½ ε^{BC} Γ_{k,(B,B'),(C,C')}, then raise C'
            let lowp: [Dual<4>; 2] =
                std::array::from_fn(|c| (gamma[k][b][2 + c] - gamma[k][2 + b][c]).scale(0.5));
            let lowu: [Dual<4>; 2] = std::array::from_fn(|c| {
                (gamma[k][2 * b][2 * c + 1] - gamma[k][2 * b + 1][2 * c]).scale(0.5)
            });
            for d in 0..2 {
                primed[k][b][d] = (0..2).fold(zero, |acc, c| acc + lowp[c].scale(eps(d, c)));
                unprimed[k][b][d] = (0..2).fold(zero, |acc, c| acc + lowu[c].scale(eps(d, c)));
            }
        }
    }
    let structure = std::array::from_fn(|k| {
        std::array::from_fn(|l| std::array::from_fn(|m| c_up[k][l][m].value))
    });
    Ok(KoszulConnection {
        vectors,
        gamma,
        primed,
        unprimed,
        structure,
    })
}

/// Index of unknown Γ_{kB'}^{C'} (0..16) and Γ_{kB}^{C} (16..32).
fn unk(primed: bool, k: usize, b: usize, c: usize) -> usize {
    (if primed { 0 } else { 16 }) + 4 * k + 2 * b + c
}

/// Solve the Cartan equations ω^a_l(e_k) − ω^a_k(e_l) = c_kl^a for an
/// sl(2)⊕sl(2) connection in least squares, and compare with the Koszul route.
pub fn spin_connection(frame: &TetradFrame, p: &[f64]) -> Result<SpinConnection> {
    let kc = koszul_connection(frame, p)?;
    let c = &kc.structure;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    // ω^{CC'}_{BB'}(k) = Γ_{kB'}^{C'} δ^C_B + Γ_{kB}^C δ^{C'}_{B'}
    let omega_coeffs = |a: usize, l: usize, k: usize, row: &mut Vec<f64>, sign: f64| {
        let (ca, cap) = (a / 2, a % 2);
        let (bl, blp) = (l / 2, l % 2);
        if ca == bl {
            row[unk(true, k, blp, cap)] += sign;
        }
        if cap == blp {
            row[unk(false, k, bl, ca)] += sign;
        }
    };
    for a in 0..4 {
        for k in 0..4 {
            for l in k + 1..4 {
                let mut row = vec![0.0; 32];
                omega_coeffs(a, l, k, &mut row, 1.0);
                omega_coeffs(a, k, l, &mut row, -1.0);
                rows.push(row);
                rhs.push(c[k][l][a]);
            }
        }
    }
    for k in 0..4 {
        for primed in [true, false] {
            let mut row = vec![0.0; 32];
            row[unk(primed, k, 0, 0)] = 1.0;
            row[unk(primed, k, 1, 1)] = 1.0;
            rows.push(row);
            rhs.push(0.0);
        }
    }
    let a = DMatrix::from_fn(rows.len(), 32, |i, j| rows[i][j]);
    let b = DVector::from_vec(rhs);
    let (x, resid) = lstsq(&a, &b)?;
    let scale = a.norm() * x.norm() + b.norm() + 1.0;
    let mut primed = [[[0.0; 2]; 2]; 4];
    let mut unprimed = [[[0.0; 2]; 2]; 4];
    let mut gap: f64 = 0.0;
    for k in 0..4 {
        for bb in 0..2 {
            for cc in 0..2 {
                primed[k][bb][cc] = x[unk(true, k, bb, cc)];
                unprimed[k][bb][cc] = x[unk(false, k, bb, cc)];
                gap = gap.max((primed[k][bb][cc] - kc.primed[k][bb][cc].value).abs());
                gap = gap.max((unprimed[k][bb][cc] - kc.unprimed[k][bb][cc].value).abs());
            }
        }
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(GeomError::Degenerate("Cartan system".into()));
    }
    Ok(SpinConnection {
        primed,
        unprimed,
        cartan_residual: resid / scale,
        koszul_gap: gap,
    })
}
