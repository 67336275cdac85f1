use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::curvature::{curvature_pack, T4};
use super::MetricField;
use crate::error::{GeomError, Result};
use crate::spinor::TetradFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PetrovType {
    I,
    II,
    D,
    III,
    N,
    O,
}

impl PetrovType {
    /// Root multiplicity pattern.
    pub fn pattern(self) -> &'static [usize] {
        match self {
            PetrovType::I => &[1, 1, 1, 1],
            PetrovType::II => &[2, 1, 1],
            PetrovType::D => &[2, 2],
            PetrovType::III => &[3, 1],
            PetrovType::N => &[4],
            PetrovType::O => &[],
        }
    }
}

impl fmt::Display for PetrovType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A root of P; `None` is the root at infinity (μ = (0,1)).
pub type Root = Option<Complex64>;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WeylQuartic {
    /// ψ_k = C_{0..01..1} with k ones.
    pub psi: [f64; 5],
    /// Coefficients of P(x) = Σ c_k x^k, c_k = binom(4,k) ψ_k.
    pub coeffs: [f64; 5],
    /// Distinct roots (cluster means) with multiplicities; `None` is infinity.
    #[serde(skip)]
    pub roots: Vec<(Root, usize)>,
    pub petrov_type: PetrovType,
    pub all_roots_real: bool,
    /// Max deviation of the normalised coefficients rebuilt from the roots.
    pub vieta_residual: f64,
}

const BINOM4: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];

/// Ψ_ABCD = ¼ ε^{A'B'} ε^{C'D'} C(e_AA', e_BB', e_CC', e_DD'), frame index k = 2A + A'.
pub fn weyl_spinor(weyl: &T4<4>, e: &[[f64; 4]; 4]) -> [[[[f64; 2]; 2]; 2]; 2] {
    let eps_up = |a: usize, b: usize| -> f64 {
        match (a, b) {
            (0, 1) => 1.0,
            (1, 0) => -1.0,
            _ => 0.0,
        }
    };
    // frame components C_klmn
    let mut cf = [[[[0.0; 4]; 4]; 4]; 4];
    for k in 0..4 {
        for l in 0..4 {
            for m in 0..4 {
                for n in 0..4 {
                    let mut s = 0.0;
                    for a in 0..4 {
                        for b in 0..4 {
                            for c in 0..4 {
                                for d in 0..4 {
                                    s += weyl[a][b][c][d] * e[k][a] * e[l][b] * e[m][c] * e[n][d];
                                }
                            }
                        }
                    }
                    cf[k][l][m][n] = s;
                }
            }
        }
    }
    let mut psi = [[[[0.0; 2]; 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    let mut s = 0.0;
                    for ap in 0..2 {
                        for bp in 0..2 {
                            for cp in 0..2 {
                                for dp in 0..2 {
                                    let w = eps_up(ap, bp) * eps_up(cp, dp);
                                    if w != 0.0 {
                                        s += w * cf[2 * a + ap][2 * b + bp][2 * c + cp][2 * d + dp];
                                    }
                                }
                            }
                        }
                    }
                    psi[a][b][c][d] = 0.25 * s;
                }
            }
        }
    }
    psi
}

fn psi_components(psi: &[[[[f64; 2]; 2]; 2]; 2]) -> [f64; 5] {
    [
        psi[0][0][0][0],
        psi[0][0][0][1],
        psi[0][0][1][1],
        psi[0][1][1][1],
        psi[1][1][1][1],
    ]
}

type Hom = Vec<f64>; // coefficient of x^i y^(d-i)

fn hom_dx(c: &Hom) -> Hom {
    (1..c.len()).map(|i| i as f64 * c[i]).collect()
}

fn hom_dy(c: &Hom) -> Hom {
    let d = c.len() - 1;
    (0..d).map(|i| (d - i) as f64 * c[i]).collect()
}

fn hom_mul(a: &Hom, b: &Hom) -> Hom {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Hessian covariant f_xx f_yy − f_xy² of a binary quartic.
fn hessian_covariant(c: &Hom) -> Hom {
    let fx = hom_dx(c);
    let fy = hom_dy(c);
    let fxx = hom_dx(&fx);
    let fyy = hom_dy(&fy);
    let fxy = hom_dy(&fx);
    let a = hom_mul(&fxx, &fyy);
    let b = hom_mul(&fxy, &fxy);
    a.iter().zip(&b).map(|(x, y)| x - y).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Largest 2×2 minor of two vectors after normalising each to unit max-norm.
fn proportionality_defect(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (max_abs(a), max_abs(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let mut m: f64 = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            m = m.max(((a[i] * b[j] - a[j] * b[i]) / (na * nb)).abs());
        }
    }
    m
}

fn decide_type(psi: &[f64; 5], tol: f64) -> PetrovType {
    let [p0, p1, p2, p3, p4] = *psi;
    let i_inv = p0 * p4 - 4.0 * p1 * p3 + 3.0 * p2 * p2;
    let j_inv = p0 * (p2 * p4 - p3 * p3) - p1 * (p1 * p4 - p2 * p3) + p2 * (p1 * p3 - p2 * p2);
    let coeffs: Hom = (0..5).map(|k| BINOM4[k] * psi[k]).collect();
    if i_inv.abs() < tol && j_inv.abs() < tol {
        // N iff the Hankel matrix has rank one (P is a perfect fourth power)
        let hank = [[p0, p1, p2, p3], [p1, p2, p3, p4]];
        let mut minor: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                minor = minor.max((hank[0][i] * hank[1][j] - hank[0][j] * hank[1][i]).abs());
            }
        }
        return if minor < tol {
            PetrovType::N
        } else {
            PetrovType::III
        };
    }
    let disc = i_inv.powi(3) - 27.0 * j_inv * j_inv;
    // relative to the invariants themselves: clustered roots make I and J small
    let scale = i_inv.abs().powi(3).max(27.0 * j_inv * j_inv);
    if disc.abs() > tol * scale {
        return PetrovType::I;
    }
    let h = hessian_covariant(&coeffs);
    if proportionality_defect(&h, &coeffs) < tol {
        PetrovType::D
    } else {
        PetrovType::II
    }
}

fn finite_roots(coeffs: &[f64; 5], tol: f64) -> Vec<Root> {
    let deg = (0..5).rev().find(|&k| coeffs[k].abs() > tol).unwrap_or(0);
    let mut roots: Vec<Root> = vec![None; 4 - deg];
    if deg >= 1 {
        let lead = coeffs[deg];
        let comp = DMatrix::from_fn(deg, deg, |i, j| {
            if i == 0 {
                -coeffs[deg - 1 - j] / lead
            } else if i == j + 1 {
                1.0
            } else {
                0.0
            }
        });
        roots.extend(comp.complex_eigenvalues().iter().map(|z| Some(*z)));
    }
    roots
}

fn root_dist(a: &Root, b: &Root) -> f64 {
    match (a, b) {
        (None, None) => 0.0,
        (Some(x), Some(y)) => (x - y).norm(),
        _ => f64::INFINITY,
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Group four roots into clusters of the given sizes, minimising spread.
fn cluster(roots: &[Root], pattern: &[usize]) -> Vec<(Root, usize)> {
    let mut best: Option<(f64, Vec<(Root, usize)>)> = None;
    for perm in permutations(roots.len()) {
        let mut start = 0;
        let mut cost = 0.0;
        let mut groups = Vec::new();
        for &size in pattern {
            let members: Vec<&Root> = perm[start..start + size]
                .iter()
                .map(|&i| &roots[i])
                .collect();
            start += size;
            for i in 0..members.len() {
                for j in i + 1..members.len() {
                    cost += root_dist(members[i], members[j]);
                }
            }
            let mean = if members.iter().all(|r| r.is_some()) {
                Some(members.iter().map(|r| r.unwrap()).sum::<Complex64>() / size as f64)
            } else {
                None
            };
            groups.push((mean, size));
        }
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, groups));
        }
    }
    best.map(|(_, g)| g).unwrap_or_default()
}

/// Classify P from ψ_0..ψ_4. `tol` is relative after normalising max|ψ| to 1,
/// and absolute for the type-O decision.
pub fn classify_quartic(psi: [f64; 5], tol: f64) -> Result<WeylQuartic> {
    let coeffs: [f64; 5] = std::array::from_fn(|k| BINOM4[k] * psi[k]);
    let m = max_abs(&psi);
    if m < tol {
        return Ok(WeylQuartic {
            psi,
            coeffs,
            roots: vec![],
            petrov_type: PetrovType::O,
            all_roots_real: true,
            vieta_residual: 0.0,
        });
    }
    if m < 100.0 * tol {
        return Err(GeomError::Indeterminate(m));
    }
    let npsi: [f64; 5] = std::array::from_fn(|k| psi[k] / m);
    let ncoef: [f64; 5] = std::array::from_fn(|k| coeffs[k] / m);
    let ty = decide_type(&npsi, tol);
    let raw = finite_roots(&ncoef, tol);
    let roots = cluster(&raw, ty.pattern());
    let all_roots_real = roots
        .iter()
        .all(|(r, _)| r.is_none_or(|z| z.im.abs() <= 1e-6 * (1.0 + z.norm())));
    // rebuild from clusters
    let deg = (0..5).rev().find(|&k| ncoef[k].abs() > tol).unwrap_or(0);
    let mut poly = vec![Complex64::new(ncoef[deg], 0.0)];
    for (r, mult) in &roots {
        if let Some(z) = r {
            for _ in 0..*mult {
                let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
                for (i, c) in poly.iter().enumerate() {
                    next[i + 1] += c;
                    next[i] -= c * z;
                }
                poly = next;
            }
        }
    }
    let vieta_residual = (0..5)
        .map(|k| {
            let rebuilt = poly.get(k).copied().unwrap_or_default();
            (rebuilt - Complex64::new(ncoef[k], 0.0)).norm()
        })
        .fold(0.0, f64::max);
    Ok(WeylQuartic {
        psi,
        coeffs,
        roots,
        petrov_type: ty,
        all_roots_real,
        vieta_residual,
    })
}

/// Classify the unprimed Weyl spinor from explicit frame vectors at `p`.
pub fn petrov_from_vectors(
    g: &MetricField,
    e: &[[f64; 4]; 4],
    p: &[f64],
    tol: f64,
) -> Result<WeylQuartic> {
    let c = curvature_pack::<4>(g, p)?;
    let psi = weyl_spinor(&c.weyl, e);
    classify_quartic(psi_components(&psi), tol)
}

pub fn petrov_classify(g: &MetricField, frame: &TetradFrame, p: &[f64]) -> Result<WeylQuartic> {
    let e = frame.vectors_at(p)?;
    petrov_from_vectors(g, &e, p, 1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_poly(c: [f64; 5]) -> [f64; 5] {
        std::array::from_fn(|k| c[k] / BINOM4[k])
    }

    #[test]
    fn distinct_real_roots_give_type_one() {
        // x(x−1)(x−2)(x−3) = x⁴ − 6x³ + 11x² − 6x
        let q = classify_quartic(from_poly([0.0, -6.0, 11.0, -6.0, 1.0]), 1e-6).unwrap();
        assert_eq!(q.petrov_type, PetrovType::I);
        assert!(q.all_roots_real);
        assert!(q.vieta_residual < 1e-9);
    }

    #[test]
    fn multiplicity_patterns() {
        let q = |c: [f64; 5]| classify_quartic(from_poly(c), 1e-6).unwrap().petrov_type;
        assert_eq!(q([1.0, -4.0, 6.0, -4.0, 1.0]), PetrovType::N);
        assert_eq!(q([0.0, 0.0, 0.0, 0.0, 1.0]), PetrovType::N);
        assert_eq!(q([1.0, 0.0, 0.0, 0.0, 0.0]), PetrovType::N);
        assert_eq!(q([1.0, 0.0, -2.0, 0.0, 1.0]), PetrovType::D);
        assert_eq!(q([0.0, 0.0, 1.0, 0.0, 0.0]), PetrovType::D);
        assert_eq!(q([0.0, 0.0, 2.0, -3.0, 1.0]), PetrovType::II);
        assert_eq!(q([1.0, 0.0, 2.0, 0.0, 1.0]), PetrovType::D);
        // x³(x−1): triple root 0, simple root 1
        assert_eq!(q([0.0, 0.0, 0.0, -1.0, 1.0]), PetrovType::III);
        // x: roots 0 and triple ∞
        assert_eq!(q([0.0, 1.0, 0.0, 0.0, 0.0]), PetrovType::III);
    }

    #[test]
    fn clustered_distinct_roots_are_type_i() {
        // roots 0.6, 0.75, 0.87, 0.95: I and J are tiny after normalising
        let c = [0.371925, -1.934775, 3.7335, -3.17, 1.0];
        let q = classify_quartic(from_poly(c), 1e-8).unwrap();
        assert_eq!(q.petrov_type, PetrovType::I);
    }

    #[test]
    fn complex_roots_flagged() {
        let q = classify_quartic(from_poly([1.0, 0.0, 2.0, 0.0, 1.0]), 1e-6).unwrap();
        assert!(!q.all_roots_real);
        let q = classify_quartic(from_poly([4.0, 0.0, 5.0, 0.0, 1.0]), 1e-6).unwrap(); // (x²+1)(x²+4)
        assert_eq!(q.petrov_type, PetrovType::I);
        assert!(!q.all_roots_real);
    }

    #[test]
    fn tiny_and_indeterminate() {
        assert_eq!(
            classify_quartic([1e-9; 5], 1e-6).unwrap().petrov_type,
            PetrovType::O
        );
        assert!(matches!(
            classify_quartic([1e-5, 0.0, 0.0, 0.0, 0.0], 1e-6),
            Err(GeomError::Indeterminate(_))
        ));
    }
}
