use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::jets::{Evaluator, Expr};
use crate::report::ResidualReport;

/// A pair of vector fields over `n` coordinates plus λ (variable index `n`),
/// kept symbolic so commutators are exact.
#[derive(Debug, Clone)]
pub struct ExprLax {
    pub n: usize,
    /// `fields[A][μ]`, μ = 0..=n with μ = n the ∂_λ component.
    pub fields: [Vec<Expr>; 2],
}

impl ExprLax {
    pub fn new(n: usize, l0: Vec<Expr>, l1: Vec<Expr>) -> Self {
        assert!(l0.len() == n + 1 && l1.len() == n + 1);
        Self {
            n,
            fields: [l0, l1],
        }
    }

    fn apply(v: &[Expr], f: &Expr) -> Expr {
        v.iter()
            .enumerate()
            .fold(Expr::zero(), |acc, (mu, c)| acc + c * &f.diff(mu))
    }

    /// [L_0, L_1] component-wise.
    pub fn commutator(&self) -> Vec<Expr> {
        let [a, b] = &self.fields;
        (0..=self.n)
            .map(|nu| Self::apply(a, &b[nu]) - Self::apply(b, &a[nu]))
            .collect()
    }

    /// ρ⁻¹ ∂_μ(ρ L_A^μ) over the base coordinates; zero iff ℒ_{L_A}(ρ dx) = 0.
    pub fn divergence(&self, a: usize, rho: &Expr) -> Expr {
        let v = &self.fields[a];
        (0..self.n).fold(Expr::zero(), |acc, mu| acc + (rho * &v[mu]).diff(mu)) / rho
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecialKind {
    Hyperhermitian,
    Sfk,
    NullKahler,
    Interpolating,
}

impl SpecialKind {
    /// Chart used for the potentials; λ is appended as the last variable.
    pub fn coords(self) -> &'static [&'static str] {
        match self {
            Self::Hyperhermitian => &["p0", "p1", "w0", "w1"],
            Self::Sfk => &["w0", "w1", "wt0", "wt1"],
            Self::NullKahler => &["w", "z", "x", "y"],
            Self::Interpolating => &["x", "y", "t"],
        }
    }

    /// Names of required potentials and constants.
    pub fn required(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Self::Hyperhermitian => (&["theta0", "theta1"], &[]),
            Self::Sfk => (&["omega", "f"], &[]),
            Self::NullKahler => (&["theta"], &[]),
            Self::Interpolating => (&["u", "w"], &["b", "c"]),
        }
    }
}

impl fmt::Display for SpecialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Hyperhermitian => "hyperhermitian",
            Self::Sfk => "sfk",
            Self::NullKahler => "nullkahler",
            Self::Interpolating => "interpolating",
        })
    }
}

impl FromStr for SpecialKind {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hyperhermitian" => Ok(Self::Hyperhermitian),
            "sfk" => Ok(Self::Sfk),
            "nullkahler" => Ok(Self::NullKahler),
            "interpolating" => Ok(Self::Interpolating),
            _ => Err(GeomError::Unknown(s.to_string())),
        }
    }
}

/// Named potentials (over [`SpecialKind::coords`]) and constants.
#[derive(Debug, Clone, Default)]
pub struct SpecialData {
    pub potentials: BTreeMap<String, Expr>,
    pub constants: BTreeMap<String, f64>,
}

impl SpecialData {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, e: Expr) -> Self {
        self.potentials.insert(name.to_string(), e);
        self
    }

    pub fn with_constant(mut self, name: &str, v: f64) -> Self {
        self.constants.insert(name.to_string(), v);
        self
    }

    fn pot(&self, name: &str) -> Result<&Expr> {
        self.potentials
            .get(name)
            .ok_or_else(|| GeomError::Missing(name.to_string()))
    }

    fn cst(&self, name: &str) -> Result<f64> {
        self.constants
            .get(name)
            .copied()
            .ok_or_else(|| GeomError::Missing(name.to_string()))
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpecialReport {
    pub kind: SpecialKind,
    pub lax: ResidualReport,
    pub pde: ResidualReport,
    /// Both pass or both fail.
    pub agreement: bool,
}

/// Lowered-index derivative ∂/∂x_A for x^A at variable indices (i0, i1):
/// x_0 = −x^1, x_1 = x^0.
fn d_lower(f: &Expr, idx: [usize; 2], a: usize) -> Expr {
    if a == 0 {
        -f.diff(idx[1])
    } else {
        f.diff(idx[0])
    }
}

struct Built {
    lax: ExprLax,
    pde: Vec<Expr>,
}

fn hyperhermitian(d: &SpecialData) -> Result<Built> {
    let th = [d.pot("theta0")?.clone(), d.pot("theta1")?.clone()];
    let (p, w) = ([0, 1], [2, 3]);
    let lam = Expr::var(4);
    let z = Expr::zero;
    let l: Vec<Vec<Expr>> = (0..2)
        .map(|a| {
            let mut v = vec![z(), z(), z(), z(), z()];
            v[p[a]] = Expr::one();
            v[w[a]] = lam.clone();
            for b in 0..2 {
                v[p[b]] = &v[p[b]] - &(&lam * &th[b].diff(p[a]));
            }
            v
        })
        .collect();
    // Θ_C = Θ^B ε_BC
    let low = [-&th[1], th[0].clone()];
    let pde = (0..2)
        .map(|c| {
            let mut e = Expr::zero();
            for a in 0..2 {
                e = e + d_lower(&low[c], p, a).diff(w[a]);
                for b in 0..2 {
                    e = e + low[b].diff(p[a]) * d_lower(&d_lower(&low[c], p, b), p, a);
                }
            }
            e
        })
        .collect();
    Ok(Built {
        lax: ExprLax::new(4, l[0].clone(), l[1].clone()),
        pde,
    })
}

fn sfk(d: &SpecialData) -> Result<Built> {
    let om = d.pot("omega")?;
    let f = d.pot("f")?;
    let (w, wt) = ([0, 1], [2, 3]);
    let lam = Expr::var(4);
    let h: [[Expr; 2]; 2] = std::array::from_fn(|a| std::array::from_fn(|b| om.diff2(w[a], wt[b])));
    let g = &h[0][0] * &h[1][1] - &h[0][1] * &h[1][0];
    // ln|G|, G may be negative
    let lng = 0.5 * (&g * &g).ln();
    let z = Expr::zero;
    let l: Vec<Vec<Expr>> = (0..2)
        .map(|a| {
            let mut v = vec![z(), z(), z(), z(), z()];
            v[w[a]] = Expr::one();
            // ∂/∂w̃_0 = −∂/∂w̃^1, ∂/∂w̃_1 = ∂/∂w̃^0
            v[wt[1]] = &v[wt[1]] + &(&lam * &h[a][0]);
            v[wt[0]] = &v[wt[0]] - &(&lam * &h[a][1]);
            v[4] = lam.powi(2) * f.diff(w[a]);
            v
        })
        .collect();
    let mut pde: Vec<Expr> = (0..2)
        .map(|a| {
            let rhs = (0..2).fold(Expr::zero(), |acc, b| {
                acc + &h[a][b] * &d_lower(&lng, wt, b)
            });
            f.diff(w[a]) - rhs
        })
        .collect();
    let mut box_f = Expr::zero();
    for a in 0..2 {
        for b in 0..2 {
            box_f = box_f + &h[a][b] * &d_lower(&d_lower(f, wt, b), w, a);
        }
    }
    pde.push(box_f);
    Ok(Built {
        lax: ExprLax::new(4, l[0].clone(), l[1].clone()),
        pde,
    })
}

/// Potential f of the null-Kähler family.
pub(crate) fn nullkahler_f(th: &Expr) -> Expr {
    let (w, z, x, y) = (0, 1, 2, 3);
    th.diff2(w, x) + th.diff2(z, y) + th.diff2(x, x) * th.diff2(y, y) - th.diff2(x, y).powi(2)
}

fn nullkahler(d: &SpecialData) -> Result<Built> {
    let th = d.pot("theta")?;
    let (w, z, x, y) = (0, 1, 2, 3);
    let lam = Expr::var(4);
    let f = nullkahler_f(th);
    let (txx, txy, tyy) = (th.diff2(x, x), th.diff2(x, y), th.diff2(y, y));
    let mut l0 = vec![Expr::zero(); 5];
    l0[w] = Expr::one();
    l0[y] = -&txy - &lam;
    l0[x] = tyy.clone();
    l0[4] = f.diff(y);
    let mut l1 = vec![Expr::zero(); 5];
    l1[z] = Expr::one();
    l1[y] = txx.clone();
    l1[x] = -&txy + &lam;
    // the λ-part of L_1 carries −f_x; with +f_x the ∂_y component of the
    // commutator is 2f_x and the pair is not flat on solutions
    l1[4] = -f.diff(x);
    // □f for g = dw dx + dz dy − Θxx dz² − Θyy dw² + 2Θxy dw dz (det g = 1/16)
    let box_f = f.diff2(w, x) + f.diff2(z, y) + &tyy * &f.diff2(x, x) + &txx * &f.diff2(y, y)
        - 2.0 * (&txy * &f.diff2(x, y));
    Ok(Built {
        lax: ExprLax::new(4, l0, l1),
        pde: vec![box_f],
    })
}

fn interpolating(d: &SpecialData) -> Result<Built> {
    let u = d.pot("u")?;
    let wf = d.pot("w")?;
    let b = d.cst("b")?;
    let c = d.cst("c")?;
    let (x, y, t) = (0, 1, 2);
    let lam = Expr::var(3);
    let mut l0 = vec![Expr::zero(); 4];
    l0[t] = Expr::one();
    l0[x] = c * wf + b * u - c * (&lam * u) - lam.powi(2);
    l0[3] = b * (wf.diff(x) - &lam * &u.diff(x));
    let mut l1 = vec![Expr::zero(); 4];
    l1[y] = Expr::one();
    l1[x] = -(c * u + lam.clone());
    l1[3] = -b * u.diff(x);
    let pde = vec![
        u.diff(y) + wf.diff(x),
        u.diff(t) + wf.diff(y) - c * (u * &wf.diff(x) - wf * &u.diff(x)) + b * (u * &u.diff(x)),
    ];
    Ok(Built {
        lax: ExprLax::new(3, l0, l1),
        pde,
    })
}

/// The Lax pair of a special family as symbolic vector fields.
pub fn special_lax(kind: SpecialKind, data: &SpecialData) -> Result<ExprLax> {
    Ok(build(kind, data)?.lax)
}

/// Governing PDE residual expressions of a special family.
pub(crate) fn special_pde(kind: SpecialKind, data: &SpecialData) -> Result<Vec<Expr>> {
    Ok(build(kind, data)?.pde)
}

fn build(kind: SpecialKind, data: &SpecialData) -> Result<Built> {
    match kind {
        SpecialKind::Hyperhermitian => hyperhermitian(data),
        SpecialKind::Sfk => sfk(data),
        SpecialKind::NullKahler => nullkahler(data),
        SpecialKind::Interpolating => interpolating(data),
    }
}

/// Evaluate the special Lax pair's commutator and the governing PDE on the
/// samples. Both residuals are max-abs; the commutator is taken over all
/// λ values and must vanish identically for these pairs.
pub fn special_lax_check(
    kind: SpecialKind,
    data: &SpecialData,
    samples: &[Vec<f64>],
    lambdas: &[f64],
    tolerance: f64,
) -> Result<SpecialReport> {
    let built = build(kind, data)?;
    let comm = built.lax.commutator();
    let lax_res: Vec<f64> = samples
        .par_iter()
        .flat_map_iter(|p| {
            let comm = &comm;
            lambdas
                .iter()
                .map(move |&lam| {
                    let mut v = p.clone();
                    v.push(lam);
                    let mut ev = Evaluator::new(&v);
                    comm.iter()
                        .map(|c| ev.eval(c).map(f64::abs).unwrap_or(f64::INFINITY))
                        .fold(0.0, f64::max)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let pde_res: Vec<f64> = samples
        .par_iter()
        .map(|p| {
            let mut v = p.clone();
            v.push(0.0);
            let mut ev = Evaluator::new(&v);
            built
                .pde
                .iter()
                .map(|e| ev.eval(e).map(f64::abs).unwrap_or(f64::INFINITY))
                .fold(0.0, f64::max)
        })
        .collect();
    let lax = ResidualReport::from_residuals(format!("{kind}-lax"), &lax_res, tolerance);
    let pde = ResidualReport::from_residuals(format!("{kind}-pde"), &pde_res, tolerance);
    let agreement = lax.passed() == pde.passed();
    Ok(SpecialReport {
        kind,
        lax,
        pde,
        agreement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::parse_expr;

    fn pts(n: usize) -> Vec<Vec<f64>> {
        (0..6)
            .map(|i| {
                (0..n)
                    .map(|j| 0.3 + 0.17 * i as f64 - 0.11 * j as f64)
                    .collect()
            })
            .collect()
    }

    fn lams() -> Vec<f64> {
        vec![-2.0, -1.0, 0.0, 1.0, 2.0, 0.37]
    }

    fn parse(kind: SpecialKind, s: &str) -> Expr {
        parse_expr(s, kind.coords()).unwrap()
    }

    #[test]
    fn interpolating_constant_solution() {
        let k = SpecialKind::Interpolating;
        let d = SpecialData::new()
            .with("u", Expr::constant(0.7))
            .with("w", Expr::constant(-1.2))
            .with_constant("b", 1.0)
            .with_constant("c", 0.5);
        let r = special_lax_check(k, &d, &pts(3), &lams(), 1e-12).unwrap();
        assert_eq!(r.lax.max_abs, 0.0);
        assert!(r.pde.passed() && r.agreement);
    }

    #[test]
    fn interpolating_dkp_similarity_solution() {
        let k = SpecialKind::Interpolating;
        let d = SpecialData::new()
            .with("u", parse(k, "x/t"))
            .with("w", Expr::zero())
            .with_constant("b", 1.0)
            .with_constant("c", 0.0);
        let r = special_lax_check(k, &d, &pts(3), &lams(), 1e-10).unwrap();
        assert!(r.lax.passed() && r.pde.passed(), "{r:?}");
        let bad = d.with("u", parse(k, "x*y+sin(t)"));
        let r = special_lax_check(k, &bad, &pts(3), &lams(), 1e-10).unwrap();
        assert!(!r.lax.passed() && !r.pde.passed() && r.agreement);
    }

    #[test]
    fn hyperhermitian_cases() {
        let k = SpecialKind::Hyperhermitian;
        let flat = SpecialData::new()
            .with("theta0", Expr::zero())
            .with("theta1", Expr::zero());
        let r = special_lax_check(k, &flat, &pts(4), &lams(), 1e-12).unwrap();
        assert!(r.lax.passed() && r.pde.passed());
        let quad = SpecialData::new()
            .with("theta0", parse(k, "p0^2"))
            .with("theta1", Expr::zero());
        let r = special_lax_check(k, &quad, &pts(4), &lams(), 1e-12).unwrap();
        assert!(r.lax.passed() && r.pde.passed(), "{r:?}");
        let bad = SpecialData::new()
            .with("theta0", parse(k, "p0^2*p1"))
            .with("theta1", parse(k, "w0*p1^2"));
        let r = special_lax_check(k, &bad, &pts(4), &lams(), 1e-10).unwrap();
        assert!(!r.lax.passed() && !r.pde.passed());
    }

    #[test]
    fn nullkahler_second_heavenly_and_failure() {
        let k = SpecialKind::NullKahler;
        // Θ depending only on (w,z) gives f = 0
        let ok = SpecialData::new().with("theta", parse(k, "w^3*z+sin(z)"));
        let r = special_lax_check(k, &ok, &pts(4), &lams(), 1e-12).unwrap();
        assert!(r.lax.passed() && r.pde.passed());
        // f = −3x²y² with □f = 36x²y²
        let bad = SpecialData::new().with("theta", parse(k, "x^2*y^2/2"));
        let r = special_lax_check(k, &bad, &pts(4), &lams(), 1e-10).unwrap();
        assert!(!r.lax.passed() && !r.pde.passed() && r.agreement);
    }

    #[test]
    fn nullkahler_frame_is_volume_preserving() {
        let k = SpecialKind::NullKahler;
        let d = SpecialData::new().with("theta", parse(k, "x^3*y+w*y^2*z"));
        let l = special_lax(k, &d).unwrap();
        for a in 0..2 {
            let div = l.divergence(a, &Expr::one());
            for p in pts(4) {
                assert!(div.eval(&[p[0], p[1], p[2], p[3], 0.4]).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sfk_flat_and_failure() {
        let k = SpecialKind::Sfk;
        let flat = SpecialData::new()
            .with("omega", parse(k, "w0*wt0+w1*wt1"))
            .with("f", Expr::zero());
        let r = special_lax_check(k, &flat, &pts(4), &lams(), 1e-12).unwrap();
        assert!(r.lax.passed() && r.pde.passed());
        let bad = SpecialData::new()
            .with("omega", parse(k, "w0*wt0+w1*wt1+w0^2*wt1^2"))
            .with("f", parse(k, "w0*w1"));
        let r = special_lax_check(k, &bad, &pts(4), &lams(), 1e-10).unwrap();
        assert!(!r.lax.passed() && !r.pde.passed());
    }

    #[test]
    fn missing_potential_is_reported() {
        let e = special_lax_check(
            SpecialKind::Sfk,
            &SpecialData::new(),
            &pts(4),
            &lams(),
            1e-10,
        );
        assert!(matches!(e, Err(GeomError::Missing(_))));
    }
}
