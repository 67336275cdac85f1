use rayon::prelude::*;

use super::curvature::{curvature_pack, CurvaturePack, T4};
use super::MetricField;
use crate::error::Result;
use crate::report::ResidualReport;

/// Antisymmetric 4×4 array F_ab.
pub type TwoForm = [[f64; 4]; 4];

/// Sign of the permutation (a,b,c,d) of (0,1,2,3), or 0.
pub fn levi_civita(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let idx = [a, b, c, d];
    for i in 0..4 {
        for j in i + 1..4 {
            if idx[i] == idx[j] {
                return 0.0;
            }
        }
    }
    let mut sign = 1.0;
    let mut p = idx;
    for i in 0..4 {
        while p[i] != i {
            let t = p[i];
            p.swap(i, t);
            sign = -sign;
        }
    }
    sign
}

/// (*F)_cd = ½ ε_cdgh F^gh with ε_0123 = orientation·√|det g|.
pub(crate) fn star_with(
    g: &[[f64; 4]; 4],
    ginv: &[[f64; 4]; 4],
    orientation: f64,
    f: &TwoForm,
) -> TwoForm {
    let vol = orientation * super::linalg::det_f64(g).abs().sqrt();
    let mut up = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut s = 0.0;
            for e in 0..4 {
                for h in 0..4 {
                    s += ginv[a][e] * ginv[b][h] * f[e][h];
                }
            }
            up[a][b] = s;
        }
    }
    let mut out = [[0.0; 4]; 4];
    for c in 0..4 {
        for d in 0..4 {
            let mut s = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    s += levi_civita(c, d, a, b) * up[a][b];
                }
            }
            out[c][d] = 0.5 * vol * s;
        }
    }
    out
}

pub fn hodge_star2(g: &MetricField, p: &[f64], f: &TwoForm) -> Result<TwoForm> {
    let gv = g.values::<4>(p)?;
    let ginv = super::linalg::invert(&gv)?;
    Ok(star_with(&gv, &ginv, g.orientation, f))
}

fn star_last_pair(c: &CurvaturePack<4>, orientation: f64, t: &T4<4>) -> T4<4> {
    let mut out = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            out[a][b] = star_with(&c.g, &c.ginv, orientation, &t[a][b]);
        }
    }
    out
}

/// SD part C⁺^a_bcd = ½(C + *C) of the mixed Weyl tensor, star on the last pair.
pub fn sd_weyl_mixed(c: &CurvaturePack<4>, orientation: f64) -> T4<4> {
    let m = c.weyl_mixed();
    let s = star_last_pair(c, orientation, &m);
    let mut out = m;
    for a in 0..4 {
        for b in 0..4 {
            for x in 0..4 {
                for y in 0..4 {
                    out[a][b][x][y] = 0.5 * (m[a][b][x][y] + s[a][b][x][y]);
                }
            }
        }
    }
    out
}

/// (C_plus, C_minus) of the lowered Weyl tensor.
pub fn weyl_split(g: &MetricField, p: &[f64]) -> Result<(T4<4>, T4<4>)> {
    let c = curvature_pack::<4>(g, p)?;
    let s = star_last_pair(&c, g.orientation, &c.weyl);
    let mut plus = c.weyl;
    let mut minus = c.weyl;
    for a in 0..4 {
        for b in 0..4 {
            for x in 0..4 {
                for y in 0..4 {
                    plus[a][b][x][y] = 0.5 * (c.weyl[a][b][x][y] + s[a][b][x][y]);
                    minus[a][b][x][y] = 0.5 * (c.weyl[a][b][x][y] - s[a][b][x][y]);
                }
            }
        }
    }
    Ok((plus, minus))
}

fn frob(t: &T4<4>) -> f64 {
    t.iter()
        .flatten()
        .flatten()
        .flatten()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
}

/// ‖C⁺‖ / (‖C‖ + 1) on the mixed Weyl tensor at one point.
pub fn asd_residual_at(g: &MetricField, p: &[f64]) -> Result<f64> {
    let c = curvature_pack::<4>(g, p)?;
    Ok(frob(&sd_weyl_mixed(&c, g.orientation)) / (frob(&c.weyl_mixed()) + 1.0))
}

pub fn asd_residual(g: &MetricField, samples: &[Vec<f64>], tolerance: f64) -> ResidualReport {
    let res: Vec<f64> = samples
        .par_iter()
        .map(|p| asd_residual_at(g, p).unwrap_or(f64::INFINITY))
        .collect();
    ResidualReport::from_residuals("asd", &res, tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_symbol() {
        assert_eq!(levi_civita(0, 1, 2, 3), 1.0);
        assert_eq!(levi_civita(1, 0, 2, 3), -1.0);
        assert_eq!(levi_civita(1, 2, 3, 0), -1.0);
        assert_eq!(levi_civita(0, 0, 2, 3), 0.0);
    }

    #[test]
    fn flat_star_by_epsilon_oracle() {
        // diag(1,1,−1,−1): *(dx⁰∧dx¹)_23 = ½·2·ε_2301·g^00 g^11 = 1
        let mut f = [[0.0; 4]; 4];
        f[0][1] = 1.0;
        f[1][0] = -1.0;
        let s = hodge_star2(&MetricField::flat4(), &[0.0; 4], &f).unwrap();
        assert_eq!(s[2][3], 1.0);
        assert_eq!(s[3][2], -1.0);
        let ss = hodge_star2(&MetricField::flat4(), &[0.0; 4], &s).unwrap();
        assert_eq!(ss, f);
    }
}
