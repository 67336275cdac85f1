use super::linalg::invert;
use super::MetricField;
use crate::error::Result;

pub type T2<const N: usize> = [[f64; N]; N];
pub type T3<const N: usize> = [[[f64; N]; N]; N];
pub type T4<const N: usize> = [[[[f64; N]; N]; N]; N];

/// Curvature at a point. Index conventions:
/// `christoffel[a][b][c] = Γ^a_bc`,
/// `riemann[a][b][c][d] = R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb`,
/// `ricci[b][d] = R^a_bad`, `weyl[a][b][c][d] = C_abcd` (all lowered).
#[derive(Debug, Clone)]
pub struct CurvaturePack<const N: usize> {
    pub g: T2<N>,
    pub ginv: T2<N>,
    /// `dg[c][a][b] = ∂_c g_ab`
    pub dg: T3<N>,
    pub christoffel: T3<N>,
    pub riemann: T4<N>,
    pub riemann_lower: T4<N>,
    pub ricci: T2<N>,
    pub scalar: f64,
    pub weyl: T4<N>,
}

pub fn curvature_pack<const N: usize>(metric: &MetricField, p: &[f64]) -> Result<CurvaturePack<N>> {
    let gj = metric.jets::<N>(p)?;
    let mut g = [[0.0; N]; N];
    let mut dg = [[[0.0; N]; N]; N];
    let mut ddg = [[[[0.0; N]; N]; N]; N];
    for a in 0..N {
        for b in 0..N {
            g[a][b] = gj[a][b].value;
            for c in 0..N {
                dg[c][a][b] = gj[a][b].grad[c];
                for d in 0..N {
                    ddg[c][d][a][b] = gj[a][b].hess[c][d];
                }
            }
        }
    }
    let ginv = invert(&g)?;
    // Γ_{e,bc} and its derivatives ∂_d Γ_{e,bc}
    let mut gl = [[[0.0; N]; N]; N];
    let mut dgl = [[[[0.0; N]; N]; N]; N];
    for e in 0..N {
        for b in 0..N {
            for c in 0..N {
                gl[e][b][c] = 0.5 * (dg[b][e][c] + dg[c][e][b] - dg[e][b][c]);
                for d in 0..N {
                    dgl[d][e][b][c] = 0.5 * (ddg[d][b][e][c] + ddg[d][c][e][b] - ddg[d][e][b][c]);
                }
            }
        }
    }
    // ∂_d g^{ae} = −g^{am} ∂_d g_mn g^{ne}
    let mut dginv = [[[0.0; N]; N]; N];
    for d in 0..N {
        for a in 0..N {
            for e in 0..N {
                let mut s = 0.0;
                for m in 0..N {
                    for n in 0..N {
                        s -= ginv[a][m] * dg[d][m][n] * ginv[n][e];
                    }
                }
                dginv[d][a][e] = s;
            }
        }
    }
    let mut chr = [[[0.0; N]; N]; N];
    let mut dchr = [[[[0.0; N]; N]; N]; N]; // dchr[d][a][b][c] = ∂_d Γ^a_bc
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                let mut s = 0.0;
                for e in 0..N {
                    s += ginv[a][e] * gl[e][b][c];
                }
                chr[a][b][c] = s;
                for d in 0..N {
                    let mut t = 0.0;
                    for e in 0..N {
                        t += dginv[d][a][e] * gl[e][b][c] + ginv[a][e] * dgl[d][e][b][c];
                    }
                    dchr[d][a][b][c] = t;
                }
            }
        }
    }
    let mut riem = [[[[0.0; N]; N]; N]; N];
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                for d in 0..N {
                    let mut s = dchr[c][a][d][b] - dchr[d][a][c][b];
                    for e in 0..N {
                        s += chr[a][c][e] * chr[e][d][b] - chr[a][d][e] * chr[e][c][b];
                    }
                    riem[a][b][c][d] = s;
                }
            }
        }
    }
    let mut rl = [[[[0.0; N]; N]; N]; N];
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                for d in 0..N {
                    let mut s = 0.0;
                    for e in 0..N {
                        s += g[a][e] * riem[e][b][c][d];
                    }
                    rl[a][b][c][d] = s;
                }
            }
        }
    }
    let mut ric = [[0.0; N]; N];
    for b in 0..N {
        for d in 0..N {
            ric[b][d] = (0..N).map(|a| riem[a][b][a][d]).sum();
        }
    }
    let mut scalar = 0.0;
    for a in 0..N {
        for b in 0..N {
            scalar += ginv[a][b] * ric[a][b];
        }
    }
    let n = N as f64;
    let mut weyl = [[[[0.0; N]; N]; N]; N];
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                for d in 0..N {
                    let ricci_part =
                        (g[a][c] * ric[b][d] - g[a][d] * ric[b][c] - g[b][c] * ric[a][d]
                            + g[b][d] * ric[a][c])
                            / (n - 2.0);
                    let s_part =
                        scalar * (g[a][c] * g[b][d] - g[a][d] * g[b][c]) / ((n - 1.0) * (n - 2.0));
                    weyl[a][b][c][d] = rl[a][b][c][d] - ricci_part + s_part;
                }
            }
        }
    }
    Ok(CurvaturePack {
        g,
        ginv,
        dg,
        christoffel: chr,
        riemann: riem,
        riemann_lower: rl,
        ricci: ric,
        scalar,
        weyl,
    })
}

impl<const N: usize> CurvaturePack<N> {
    pub fn riemann_max(&self) -> f64 {
        self.riemann
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn weyl_max(&self) -> f64 {
        self.weyl
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Mixed Weyl tensor C^a_bcd, invariant under conformal rescaling.
    pub fn weyl_mixed(&self) -> T4<N> {
        let mut out = [[[[0.0; N]; N]; N]; N];
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    for d in 0..N {
                        out[a][b][c][d] = (0..N)
                            .map(|e| self.ginv[a][e] * self.weyl[e][b][c][d])
                            .sum();
                    }
                }
            }
        }
        out
    }

    /// Trace-free Ricci R_ab − (s/n) g_ab, max component.
    pub fn tracefree_ricci_max(&self) -> f64 {
        let n = N as f64;
        let mut m: f64 = 0.0;
        for a in 0..N {
            for b in 0..N {
                m = m.max((self.ricci[a][b] - self.scalar / n * self.g[a][b]).abs());
            }
        }
        m
    }

    pub fn ricci_max(&self) -> f64 {
        self.ricci.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest violation of R_abcd = −R_bacd = −R_abdc, R_abcd = R_cdab and
    /// the first Bianchi identity, relative to the largest component.
    pub fn symmetry_defect(&self) -> f64 {
        let r = &self.riemann_lower;
        let scale = r
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
            + 1.0;
        let mut m: f64 = 0.0;
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    for d in 0..N {
                        m = m.max((r[a][b][c][d] + r[b][a][c][d]).abs());
                        m = m.max((r[a][b][c][d] + r[a][b][d][c]).abs());
                        m = m.max((r[a][b][c][d] - r[c][d][a][b]).abs());
                        m = m.max((r[a][b][c][d] + r[a][c][d][b] + r[a][d][b][c]).abs());
                    }
                }
            }
        }
        m / scale
    }

    /// Largest trace g^{ac} C_abcd relative to the largest Weyl component.
    pub fn weyl_trace_defect(&self) -> f64 {
        let mut m: f64 = 0.0;
        for b in 0..N {
            for d in 0..N {
                let mut s = 0.0;
                for a in 0..N {
                    for c in 0..N {
                        s += self.ginv[a][c] * self.weyl[a][b][c][d];
                    }
                }
                m = m.max(s.abs());
            }
        }
        m / (self.weyl_max() + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{parse_expr, Expr};

    fn sphere2_times_line() -> MetricField {
        // round 2-sphere (θ, φ) ⊕ −dt²: R_θφθφ = sin²θ, s = 2
        let v = ["th", "ph", "t"];
        let z = Expr::zero;
        MetricField::covariant(vec![
            vec![Expr::one(), z(), z()],
            vec![z(), parse_expr("sin(th)^2", &v).unwrap(), z()],
            vec![z(), z(), Expr::constant(-1.0)],
        ])
    }

    #[test]
    fn flat_is_flat() {
        let c = curvature_pack::<4>(&MetricField::flat4(), &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(c.riemann_max(), 0.0);
    }

    #[test]
    fn sphere_curvature_by_hand() {
        let th = 0.7_f64;
        let c = curvature_pack::<3>(&sphere2_times_line(), &[th, 0.2, 0.0]).unwrap();
        assert!((c.riemann_lower[0][1][0][1] - th.sin().powi(2)).abs() < 1e-13);
        assert!((c.scalar - 2.0).abs() < 1e-13);
        assert!((c.christoffel[0][1][1] + th.sin() * th.cos()).abs() < 1e-14);
        // Weyl vanishes identically in three dimensions
        assert!(c.weyl_max() < 1e-13);
        assert!(c.symmetry_defect() < 1e-13);
    }
}
