//! Explicit metric families with their frames, governing equations and the
//! curvature verdicts they are expected to satisfy.

mod coframe;
mod families;

pub use coframe::{null_coframe_ldl, orient_by_sd_form};
pub use families::*;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::geometry::hodge::star_with;
use crate::geometry::linalg::invert;
use crate::geometry::{asd_residual, curvature_pack, petrov_classify, MetricField, PetrovType};
use crate::jets::{DomainBox, Evaluator, Expr, Jet2, ScalarField};
use crate::report::ResidualReport;
use crate::sampling::halton_box;
use crate::spinor::TetradFrame;

/// Curvature property an entry claims.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Expected {
    Asd,
    RicciFlat,
    ScalarFlat,
    KahlerClosed,
    Petrov(PetrovType),
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expected::Asd => f.write_str("ASD"),
            Expected::RicciFlat => f.write_str("RicciFlat"),
            Expected::ScalarFlat => f.write_str("ScalarFlat"),
            Expected::KahlerClosed => f.write_str("KahlerClosed"),
            Expected::Petrov(t) => write!(f, "PetrovType={t}"),
        }
    }
}

pub type ResidualFn = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;

/// A governing equation, either symbolic or a numeric routine.
#[derive(Clone)]
pub enum Residual {
    Expr(Expr),
    Func(ResidualFn),
}

impl Residual {
    pub fn at(&self, p: &[f64]) -> Result<f64> {
        match self {
            Residual::Expr(e) => e.eval(p),
            Residual::Func(f) => f(p),
        }
    }
}

#[derive(Clone)]
pub struct Governing {
    pub name: String,
    pub residual: Residual,
}

impl Governing {
    pub fn expr(name: &str, e: Expr) -> Self {
        Self {
            name: name.to_string(),
            residual: Residual::Expr(e),
        }
    }

    pub fn func(name: &str, f: impl Fn(&[f64]) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self {
            name: name.to_string(),
            residual: Residual::Func(Arc::new(f)),
        }
    }
}

/// Potentials (expressions over the chart) and constants of an entry.
#[derive(Debug, Clone, Default)]
pub struct Params {
    pub potentials: BTreeMap<String, Expr>,
    pub constants: BTreeMap<String, f64>,
}

impl Params {
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

    pub fn pot(&self, name: &str) -> Result<Expr> {
        self.potentials
            .get(name)
            .cloned()
            .ok_or_else(|| GeomError::Missing(name.to_string()))
    }

    pub fn cst(&self, name: &str) -> Result<f64> {
        self.constants
            .get(name)
            .copied()
            .ok_or_else(|| GeomError::Missing(name.to_string()))
    }
}

/// Symmetry generator K = K^μ ∂_μ of an entry.
#[derive(Debug, Clone)]
pub struct KillingField {
    pub components: [Expr; 4],
    /// Expected g(K,K) ≡ 0.
    pub null: bool,
    /// Expected 𝕂∧d𝕂 ≠ 0 (only meaningful for null K).
    pub twisting: Option<bool>,
}

#[derive(Clone)]
pub struct ZooEntry {
    pub name: String,
    pub family: Family,
    pub params: Params,
    pub coords: Vec<String>,
    pub metric: MetricField,
    pub frame: Option<TetradFrame>,
    pub governing: Vec<Governing>,
    pub expected: Vec<Expected>,
    /// Fundamental 2-form ω_ab of a declared (para-)complex structure.
    pub kahler_form: Option<[[Expr; 4]; 4]>,
    pub killing: Option<KillingField>,
    pub sample_box: DomainBox,
}

impl fmt::Debug for ZooEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ZooEntry")
            .field("name", &self.name)
            .field("family", &self.family)
            .field("coords", &self.coords)
            .field("expected", &self.expected)
            .finish()
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EntryReport {
    pub name: String,
    pub governing: Vec<ResidualReport>,
    pub verdicts: Vec<ResidualReport>,
    /// Governing residuals pass and every expected verdict passes.
    pub consistent: bool,
}

/// Tolerances of the verdict checks.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub governing: f64,
    pub asd: f64,
    pub ricci: f64,
    pub kahler: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            governing: 1e-8,
            asd: 1e-8,
            ricci: 1e-7,
            kahler: 1e-9,
        }
    }
}

pub(crate) fn eval_jets(m: &[[Expr; 4]; 4], p: &[f64]) -> Result<[[Jet2<4>; 4]; 4]> {
    let vars: Vec<Jet2<4>> = p
        .iter()
        .enumerate()
        .map(|(i, &x)| Jet2::variable(x, i))
        .collect();
    let mut ev = Evaluator::new(&vars);
    let mut out = [[Jet2::constant(0.0); 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            out[a][b] = ev.eval(&m[a][b])?;
        }
    }
    Ok(out)
}

impl ZooEntry {
    /// `n` admissible low-discrepancy samples from the entry's box.
    pub fn samples(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        halton_box(&self.sample_box, n, seed, |p| {
            self.metric.admissible::<4>(p)
        })
    }

    pub fn rebuild(&self, params: Params) -> Result<ZooEntry> {
        let mut e = self.family.build(&params)?;
        e.name = self.name.clone();
        Ok(e)
    }

    /// Rebuild with `amplitude`·(generic bump over all chart variables)
    /// added to the named potential.
    pub fn perturbed(&self, potential: &str, amplitude: f64) -> Result<ZooEntry> {
        let x = Expr::var;
        let bump = amplitude
            * ((0.7 * x(0) + 1.3 * x(1) - 0.4 * x(2) + 0.9 * x(3) + 0.3).sin()
                + 0.5 * (x(0) * x(2) - 0.6 * x(1) * x(3)).cos());
        let mut params = self.params.clone();
        let base = params.pot(potential)?;
        params.potentials.insert(potential.to_string(), base + bump);
        self.rebuild(params)
    }

    pub fn governing_reports(&self, samples: &[Vec<f64>], tol: f64) -> Vec<ResidualReport> {
        self.governing
            .iter()
            .map(|g| {
                let r: Vec<f64> = samples
                    .par_iter()
                    .map(|p| g.residual.at(p).map(f64::abs).unwrap_or(f64::INFINITY))
                    .collect();
                ResidualReport::from_residuals(g.name.clone(), &r, tol)
            })
            .collect()
    }

    pub fn check(&self, e: Expected, samples: &[Vec<f64>], tol: &Tolerances) -> ResidualReport {
        let name = e.to_string();
        let per_sample = |f: &(dyn Fn(&[f64]) -> Result<f64> + Sync)| -> Vec<f64> {
            samples
                .par_iter()
                .map(|p| f(p).unwrap_or(f64::INFINITY))
                .collect()
        };
        match e {
            Expected::Asd => {
                let mut r = asd_residual(&self.metric, samples, tol.asd);
                r.name = name;
                r
            }
            Expected::RicciFlat => {
                let r = per_sample(&|p| {
                    let c = curvature_pack::<4>(&self.metric, p)?;
                    Ok(c.tracefree_ricci_max().max(c.scalar.abs()))
                });
                ResidualReport::from_residuals(name, &r, tol.ricci)
            }
            Expected::ScalarFlat => {
                let r = per_sample(&|p| Ok(curvature_pack::<4>(&self.metric, p)?.scalar.abs()));
                ResidualReport::from_residuals(name, &r, tol.ricci)
            }
            Expected::KahlerClosed => match &self.kahler_form {
                Some(w) => {
                    let r = per_sample(&|p| kahler_defect(&self.metric, w, p));
                    ResidualReport::from_residuals(name, &r, tol.kahler)
                }
                None => ResidualReport::from_residuals(name, &[], tol.kahler)
                    .with_note("no complex structure"),
            },
            Expected::Petrov(t) => match &self.frame {
                Some(fr) => {
                    let r = per_sample(&|p| {
                        let q = petrov_classify(&self.metric, fr, p)?;
                        Ok(if q.petrov_type == t { 0.0 } else { 1.0 })
                    });
                    ResidualReport::from_residuals(name, &r, 0.5)
                        .with_note("fraction-free count of type mismatches")
                }
                None => ResidualReport::from_residuals(name, &[], 0.5).with_note("no frame"),
            },
        }
    }

    pub fn evaluate(&self, samples: &[Vec<f64>], tol: &Tolerances) -> EntryReport {
        let governing = self.governing_reports(samples, tol.governing);
        let verdicts: Vec<ResidualReport> = self
            .expected
            .iter()
            .map(|e| self.check(*e, samples, tol))
            .collect();
        let consistent = governing.iter().chain(verdicts.iter()).all(|r| r.passed());
        EntryReport {
            name: self.name.clone(),
            governing,
            verdicts,
            consistent,
        }
    }

    /// Every scalar function the entry is built from: potentials and the
    /// metric components.
    pub fn scalar_fields(&self) -> Vec<(String, ScalarField)> {
        let mut out: Vec<(String, ScalarField)> = self
            .params
            .potentials
            .iter()
            .map(|(k, e)| {
                (
                    k.clone(),
                    ScalarField::with_domain(e.clone(), self.sample_box.clone()),
                )
            })
            .collect();
        let comps = self.metric.components();
        for a in 0..4 {
            for b in a..4 {
                out.push((
                    format!("g[{a}][{b}]"),
                    ScalarField::with_domain(comps[a][b].clone(), self.sample_box.clone()),
                ));
            }
        }
        out
    }

    /// Residual reports for the symmetry: g(K,K) if null, ℒ_K g − c·g with
    /// c = ¼ g^{ab}(ℒ_K g)_ab, and the twist 𝕂∧d𝕂.
    pub fn killing_reports(&self, samples: &[Vec<f64>], tol: f64) -> Result<Vec<ResidualReport>> {
        let k = self
            .killing
            .as_ref()
            .ok_or_else(|| GeomError::Missing("Killing field".into()))?;
        let data: Vec<Result<KillingData>> = samples
            .par_iter()
            .map(|p| killing_data(&self.metric, &k.components, p))
            .collect();
        let pick = |f: &dyn Fn(&KillingData) -> f64| -> Vec<f64> {
            data.iter()
                .map(|d| d.as_ref().map(f).unwrap_or(f64::INFINITY))
                .collect()
        };
        let mut out = vec![ResidualReport::from_residuals(
            "conformal-killing",
            &pick(&|d| d.conformal_defect),
            tol,
        )];
        if k.null {
            out.push(ResidualReport::from_residuals(
                "null",
                &pick(&|d| d.norm.abs()),
                tol,
            ));
        }
        if let Some(tw) = k.twisting {
            let r = pick(&|d| d.twist);
            let rep = if tw {
                // twisting: report the smallest twist, which must be away from 0
                let min = r.iter().cloned().fold(f64::INFINITY, f64::min);
                let mut rr = ResidualReport::from_residuals(
                    "twisting",
                    &[if min > tol { 0.0 } else { 1.0 }],
                    0.5,
                );
                rr.note = Some(format!("min |K∧dK| = {min:e}"));
                rr
            } else {
                ResidualReport::from_residuals("nontwisting", &r, tol)
            };
            out.push(rep);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KillingData {
    pub norm: f64,
    pub conformal_factor: f64,
    pub conformal_defect: f64,
    pub twist: f64,
}

/// Lie derivative data of a vector field K at `p`.
pub fn killing_data(g: &MetricField, k: &[Expr; 4], p: &[f64]) -> Result<KillingData> {
    let gj = g.jets::<4>(p)?;
    let vars: Vec<Jet2<4>> = p
        .iter()
        .enumerate()
        .map(|(i, &x)| Jet2::variable(x, i))
        .collect();
    let mut ev = Evaluator::new(&vars);
    let mut kj = [Jet2::<4>::constant(0.0); 4];
    for i in 0..4 {
        kj[i] = ev.eval(&k[i])?;
    }
    let gv: [[f64; 4]; 4] = std::array::from_fn(|a| std::array::from_fn(|b| gj[a][b].value));
    let ginv = invert(&gv)?;
    let mut lie = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut s = 0.0;
            for c in 0..4 {
                s += kj[c].value * gj[a][b].grad[c]
                    + gv[c][b] * kj[c].grad[a]
                    + gv[a][c] * kj[c].grad[b];
            }
            lie[a][b] = s;
        }
    }
    let c = 0.25
        * (0..4)
            .flat_map(|a| (0..4).map(move |b| (a, b)))
            .map(|(a, b)| ginv[a][b] * lie[a][b])
            .sum::<f64>();
    let mut defect: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            defect = defect.max((lie[a][b] - c * gv[a][b]).abs());
        }
    }
    // 𝕂_a = g_ab K^b as jets, then (𝕂∧d𝕂)_abc
    let kl: [Jet2<4>; 4] =
        std::array::from_fn(|a| (0..4).fold(Jet2::constant(0.0), |acc, b| acc + gj[a][b] * kj[b]));
    let norm = (0..4).map(|a| kl[a].value * kj[a].value).sum::<f64>();
    let dk = |a: usize, b: usize| kl[b].grad[a] - kl[a].grad[b];
    let mut twist: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            for cc in 0..4 {
                let t = kl[a].value * dk(b, cc) + kl[b].value * dk(cc, a) + kl[cc].value * dk(a, b);
                twist = twist.max(t.abs());
            }
        }
    }
    Ok(KillingData {
        norm,
        conformal_factor: c,
        conformal_defect: defect,
        twist,
    })
}

/// max of |dω| and the failure of J = g⁻¹ω to square to ±1.
pub fn kahler_defect(g: &MetricField, omega: &[[Expr; 4]; 4], p: &[f64]) -> Result<f64> {
    let w = eval_jets(omega, p)?;
    let mut m: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            m = m.max((w[a][b].value + w[b][a].value).abs());
            for c in 0..4 {
                let d = w[b][c].grad[a] + w[c][a].grad[b] + w[a][b].grad[c];
                m = m.max(d.abs());
            }
        }
    }
    let gv = g.values::<4>(p)?;
    let ginv = invert(&gv)?;
    let j: [[f64; 4]; 4] = std::array::from_fn(|a| {
        std::array::from_fn(|b| (0..4).map(|c| ginv[a][c] * w[c][b].value).sum())
    });
    let mut plus: f64 = 0.0;
    let mut minus: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let jj: f64 = (0..4).map(|c| j[a][c] * j[c][b]).sum();
            let id = if a == b { 1.0 } else { 0.0 };
            plus = plus.max((jj - id).abs());
            minus = minus.max((jj + id).abs());
        }
    }
    Ok(m.max(plus.min(minus)))
}

/// +1 if ω is self-dual at `p` for the frame orientation, −1 if
/// anti-self-dual, 0 otherwise.
pub fn form_duality(g: &[[f64; 4]; 4], orientation: f64, omega: &[[f64; 4]; 4]) -> Result<f64> {
    let ginv = invert(g)?;
    let s = star_with(g, &ginv, orientation, omega);
    let scale = omega
        .iter()
        .flatten()
        .fold(0.0_f64, |m, x| m.max(x.abs()))
        .max(1e-300);
    let dp = (0..16)
        .map(|i| (s[i / 4][i % 4] - omega[i / 4][i % 4]).abs())
        .fold(0.0, f64::max)
        / scale;
    let dm = (0..16)
        .map(|i| (s[i / 4][i % 4] + omega[i / 4][i % 4]).abs())
        .fold(0.0, f64::max)
        / scale;
    Ok(if dp < 1e-9 {
        1.0
    } else if dm < 1e-9 {
        -1.0
    } else {
        0.0
    })
}
