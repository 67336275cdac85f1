//! Lorentzian Einstein-Weyl structures in three dimensions, the generalised
//! monopole equation, and the lift/reduction linking them to 4D metrics with
//! a non-null conformal symmetry.

mod integrable;
pub mod presets;
mod projective;
mod solver;

pub use integrable::{
    dkp_ew, hypercr_ew, integrable_residual, integrable_residual_at, system_residual_jets, toda_ew,
    IntegrableFields, IntegrableKind,
};
pub use projective::{projective_geodesic, GeodesicCurve, ProjectiveStructure2D};
pub use solver::{monopole_solve_linear, Grid3, GridMonopole, LinearMonopole, SolverOptions};

use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::geometry::linalg::invert;
use crate::geometry::{levi_civita, MetricField, MetricRepr};
use crate::jets::{DomainBox, Dual, Evaluator, Expr, Jet2, Scalar};
use crate::report::ResidualReport;
use crate::sampling::halton_box;

/// Orientation of the lift in chart order (x¹, x², x³, φ) relative to the
/// orientation of h. Fixed so that lifts of EW + monopole data are ASD.
const LIFT_ORIENTATION: f64 = -1.0;
/// Sign in ω = ±2|K|⁻² *(𝕂∧d𝕂) matching the lift convention.
const REDUCE_SIGN: f64 = -1.0;

/// (h_ij to second order, ω_i to first order) at a point of the 3D chart.
#[derive(Debug, Clone, Copy)]
pub struct EwJets {
    pub h: [[Jet2<3>; 3]; 3],
    pub omega: [Dual<3>; 3],
}

/// Anything that can produce Weyl-connection data pointwise.
pub trait EwSource: Sync {
    fn ew_jets(&self, p: &[f64]) -> Result<EwJets>;
    /// Sign of ε_{123} relative to √|det h|.
    fn orientation(&self) -> f64;
}

/// A 3D metric h of signature (2,1) with a 1-form ω; D h = ω⊗h.
#[derive(Debug, Clone)]
pub struct EWStructure {
    pub h: MetricField,
    pub omega: [Expr; 3],
}

impl EWStructure {
    pub fn new(h: MetricField, omega: [Expr; 3]) -> Result<Self> {
        if h.dim != 3 {
            return Err(GeomError::Arity {
                needed: 3,
                got: h.dim,
            });
        }
        Ok(Self { h, omega })
    }

    /// dx² + dy² − dt², ω = 0.
    pub fn flat() -> Self {
        Self {
            h: MetricField::diagonal(&[1.0, 1.0, -1.0]),
            omega: [Expr::zero(), Expr::zero(), Expr::zero()],
        }
    }

    pub fn with_domain(mut self, bx: DomainBox) -> Self {
        self.h = self.h.with_domain(bx);
        self
    }

    /// The gauge-equivalent pair (e^{2f} h, ω + 2df).
    pub fn rescaled(&self, f: &Expr) -> Self {
        let h = self.h.conformal(&(2.0 * f));
        let omega = std::array::from_fn(|i| &self.omega[i] + &(2.0 * f.diff(i)));
        Self { h, omega }
    }

    /// Halton samples in the chart box where h has signature (2,1).
    pub fn samples(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        halton_box(&self.h.domain, n, seed, |p| self.h.admissible::<3>(p))
    }
}

impl EwSource for EWStructure {
    fn ew_jets(&self, p: &[f64]) -> Result<EwJets> {
        let h = self.h.jets::<3>(p)?;
        let vars: Vec<Jet2<3>> = p
            .iter()
            .enumerate()
            .map(|(i, &x)| Jet2::variable(x, i))
            .collect();
        let mut ev = Evaluator::new(&vars);
        let mut omega = [Dual::constant(0.0); 3];
        for (o, e) in omega.iter_mut().zip(&self.omega) {
            *o = ev.eval(e)?.to_dual();
        }
        Ok(EwJets { h, omega })
    }

    fn orientation(&self) -> f64 {
        self.h.orientation
    }
}

/// Weyl connection data and its curvature at one point.
#[derive(Debug, Clone)]
pub struct WeylPoint {
    pub h: [[f64; 3]; 3],
    /// Γ^a_bc of D, indexed [a][b][c].
    pub connection: [[[f64; 3]; 3]; 3],
    /// W_bd = R^a_bad of D (not symmetric in general).
    pub ricci: [[f64; 3]; 3],
    /// max |W_(ij) − ⅓ W h_ij|.
    pub ew_defect: f64,
    /// max |W_[ij]|.
    pub faraday: f64,
    /// max |D_c h_ab − ω_c h_ab|.
    pub metricity_defect: f64,
}

/// Γ(D) = Γ(h) − ½(δ^a_b ω_c + δ^a_c ω_b − h_bc ω^a) as first-order jets.
fn connection_jets(j: &EwJets) -> Result<[[[Dual<3>; 3]; 3]; 3]> {
    let h: [[Dual<3>; 3]; 3] =
        std::array::from_fn(|a| std::array::from_fn(|b| j.h[a][b].to_dual()));
    let hinv = invert(&h)?;
    let om = &j.omega;
    let om_up: [Dual<3>; 3] =
        std::array::from_fn(|a| (0..3).fold(Dual::constant(0.0), |s, d| s + hinv[a][d] * om[d]));
    let half = Dual::constant(0.5);
    let mut g = [[[Dual::constant(0.0); 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let mut s = Dual::constant(0.0);
                for d in 0..3 {
                    s = s + hinv[a][d]
                        * (j.h[d][c].partial(b) + j.h[d][b].partial(c) - j.h[b][c].partial(d));
                }
                let mut corr = h[b][c] * om_up[a];
                corr = Dual::constant(0.0) - corr;
                if a == b {
                    corr = corr + om[c];
                }
                if a == c {
                    corr = corr + om[b];
                }
                g[a][b][c] = half * s - half * corr;
            }
        }
    }
    Ok(g)
}

pub fn weyl_point(src: &dyn EwSource, p: &[f64]) -> Result<WeylPoint> {
    let j = src.ew_jets(p)?;
    let gam = connection_jets(&j)?;
    let h: [[f64; 3]; 3] = std::array::from_fn(|a| std::array::from_fn(|b| j.h[a][b].value));
    let hinv = invert(&h)?;
    let gv = |a: usize, b: usize, c: usize| gam[a][b][c].value;
    // R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb
    let riem = |a: usize, b: usize, c: usize, d: usize| {
        let mut r = gam[a][d][b].grad[c] - gam[a][c][b].grad[d];
        for e in 0..3 {
            r += gv(a, c, e) * gv(e, d, b) - gv(a, d, e) * gv(e, c, b);
        }
        r
    };
    let mut ricci = [[0.0; 3]; 3];
    for b in 0..3 {
        for d in 0..3 {
            ricci[b][d] = (0..3).map(|a| riem(a, b, a, d)).sum();
        }
    }
    let trace: f64 = (0..3)
        .flat_map(|i| (0..3).map(move |k| (i, k)))
        .map(|(i, k)| hinv[i][k] * ricci[i][k])
        .sum();
    let mut ew = 0.0_f64;
    let mut far = 0.0_f64;
    for i in 0..3 {
        for k in 0..3 {
            let sym = 0.5 * (ricci[i][k] + ricci[k][i]);
            ew = ew.max((sym - trace * h[i][k] / 3.0).abs());
            far = far.max((0.5 * (ricci[i][k] - ricci[k][i])).abs());
        }
    }
    let mut met = 0.0_f64;
    for c in 0..3 {
        for a in 0..3 {
            for b in 0..3 {
                let mut d = j.h[a][b].grad[c] - j.omega[c].value * h[a][b];
                for e in 0..3 {
                    d -= gv(e, c, a) * h[e][b] + gv(e, c, b) * h[a][e];
                }
                met = met.max(d.abs());
            }
        }
    }
    if !(ew.is_finite() && far.is_finite()) {
        return Err(GeomError::NonFinite);
    }
    let connection =
        std::array::from_fn(|a| std::array::from_fn(|b| std::array::from_fn(|c| gv(a, b, c))));
    Ok(WeylPoint {
        h,
        connection,
        ricci,
        ew_defect: ew,
        faraday: far,
        metricity_defect: met,
    })
}

fn sweep(
    src: &dyn EwSource,
    samples: &[Vec<f64>],
    f: impl Fn(&WeylPoint) -> f64 + Sync,
) -> Vec<f64> {
    samples
        .par_iter()
        .map(|p| weyl_point(src, p).map(|w| f(&w)).unwrap_or(f64::INFINITY))
        .collect()
}

/// Trace-free symmetric Ricci of the Weyl connection; the antisymmetric part
/// is reported in the note.
pub fn ew_residual(src: &dyn EwSource, samples: &[Vec<f64>], tol: f64) -> ResidualReport {
    let r = sweep(src, samples, |w| w.ew_defect);
    let far = sweep(src, samples, |w| w.faraday)
        .into_iter()
        .fold(0.0_f64, f64::max);
    ResidualReport::from_residuals("einstein-weyl", &r, tol)
        .with_note(format!("max |W_[ij]| = {far:.3e}"))
}

/// Construction self-test D h = ω⊗h.
pub fn metricity_residual(src: &dyn EwSource, samples: &[Vec<f64>], tol: f64) -> ResidualReport {
    ResidualReport::from_residuals(
        "weyl-metricity",
        &sweep(src, samples, |w| w.metricity_defect),
        tol,
    )
}

/// max |Γ(D₁) − Γ(D₂)|: the Weyl connection is a conformal-gauge invariant,
/// so this vanishes iff the two pairs define the same EW class locally.
pub fn connection_gap(
    a: &dyn EwSource,
    b: &dyn EwSource,
    samples: &[Vec<f64>],
    tol: f64,
) -> ResidualReport {
    let r: Vec<f64> = samples
        .par_iter()
        .map(|p| match (weyl_point(a, p), weyl_point(b, p)) {
            (Ok(x), Ok(y)) => {
                let mut m = 0.0_f64;
                for i in 0..3 {
                    for k in 0..3 {
                        for l in 0..3 {
                            m = m.max((x.connection[i][k][l] - y.connection[i][k][l]).abs());
                        }
                    }
                }
                m
            }
            _ => f64::INFINITY,
        })
        .collect();
    ResidualReport::from_residuals("weyl-connection-gap", &r, tol)
}

/// The 1-form η of a monopole.
#[derive(Debug, Clone)]
pub enum Eta {
    Symbolic([Expr; 3]),
    /// Potential of *_h(dV + ½ωV) by axis-ordered line integrals from
    /// `base`, in the gauge η_x = 0, η_y(x₀, ·) = 0.
    LineIntegral {
        base: [f64; 3],
    },
}

#[derive(Debug, Clone)]
pub struct MonopoleData {
    pub v: Expr,
    pub eta: Eta,
}

impl MonopoleData {
    pub fn new(v: Expr, eta: [Expr; 3]) -> Self {
        Self {
            v,
            eta: Eta::Symbolic(eta),
        }
    }

    pub fn integrated(v: Expr, base: [f64; 3]) -> Self {
        Self {
            v,
            eta: Eta::LineIntegral { base },
        }
    }
}

/// (*α)_bc = ε_abc α^a with ε_123 = orientation·√|det h|.
fn star1(h: &[[f64; 3]; 3], orientation: f64, alpha: &[f64; 3]) -> Result<[[f64; 3]; 3]> {
    let hinv = invert(h)?;
    let vol = orientation * crate::geometry::linalg::det_f64(h).abs().sqrt();
    let up: [f64; 3] = std::array::from_fn(|a| (0..3).map(|d| hinv[a][d] * alpha[d]).sum());
    let mut out = [[0.0; 3]; 3];
    for b in 0..3 {
        for c in 0..3 {
            out[b][c] = vol * (0..3).map(|a| eps3(a, b, c) * up[a]).sum::<f64>();
        }
    }
    Ok(out)
}

fn eps3(a: usize, b: usize, c: usize) -> f64 {
    levi_civita(a, b, c, 3)
}

/// The 2-form *_h(dV + ½ωV) at `p`.
pub fn monopole_field(src: &dyn EwSource, v: &Expr, p: &[f64]) -> Result<[[f64; 3]; 3]> {
    let j = src.ew_jets(p)?;
    let vars: Vec<Dual<3>> = p
        .iter()
        .enumerate()
        .map(|(i, &x)| Dual::variable(x, i))
        .collect();
    let vd = v.eval(&vars)?;
    let h: [[f64; 3]; 3] = std::array::from_fn(|a| std::array::from_fn(|b| j.h[a][b].value));
    let alpha: [f64; 3] = std::array::from_fn(|a| vd.grad[a] + 0.5 * j.omega[a].value * vd.value);
    star1(&h, src.orientation(), &alpha)
}

/// η at `p` from the line-integral gauge; 24-point Gauss-Legendre per leg.
pub fn eta_line_integral(
    src: &dyn EwSource,
    v: &Expr,
    base: [f64; 3],
    p: &[f64],
) -> Result<[f64; 3]> {
    let [x0, y0, _] = base;
    let (x, y, t) = (p[0], p[1], p[2]);
    let mut eta_y = 0.0;
    let mut eta_t = 0.0;
    for (s, w) in gauss_legendre(x0, x) {
        let f = monopole_field(src, v, &[s, y, t])?;
        eta_y += w * f[0][1];
        eta_t -= w * f[2][0];
    }
    for (s, w) in gauss_legendre(y0, y) {
        let f = monopole_field(src, v, &[x0, s, t])?;
        eta_t += w * f[1][2];
    }
    Ok([0.0, eta_y, eta_t])
}

fn gauss_legendre(a: f64, b: f64) -> Vec<(f64, f64)> {
    const PANELS: usize = 4;
    // 6-point rule on each panel
    const X: [f64; 3] = [
        0.238_619_186_083_196_9,
        0.661_209_386_466_264_5,
        0.932_469_514_203_152,
    ];
    const W: [f64; 3] = [
        0.467_913_934_572_691,
        0.360_761_573_048_138_6,
        0.171_324_492_379_170_3,
    ];
    let mut out = Vec::with_capacity(6 * PANELS);
    let hw = (b - a) / PANELS as f64;
    for k in 0..PANELS {
        let mid = a + (k as f64 + 0.5) * hw;
        for i in 0..3 {
            for s in [-1.0, 1.0] {
                out.push((mid + s * 0.5 * hw * X[i], 0.5 * hw * W[i]));
            }
        }
    }
    out
}

fn monopole_defect(src: &dyn EwSource, m: &MonopoleData, p: &[f64]) -> Result<f64> {
    let f = monopole_field(src, &m.v, p)?;
    let d_eta: [[f64; 3]; 3] = match &m.eta {
        Eta::Symbolic(eta) => {
            let vars: Vec<Dual<3>> = p
                .iter()
                .enumerate()
                .map(|(i, &x)| Dual::variable(x, i))
                .collect();
            let mut ev = Evaluator::new(&vars);
            let mut e = [Dual::constant(0.0); 3];
            for (o, x) in e.iter_mut().zip(eta) {
                *o = ev.eval(x)?;
            }
            std::array::from_fn(|b| std::array::from_fn(|c| e[c].grad[b] - e[b].grad[c]))
        }
        Eta::LineIntegral { base } => {
            let h = 1e-4;
            let mut grad = [[0.0; 3]; 3];
            for b in 0..3 {
                let mut pp = p.to_vec();
                let mut pm = p.to_vec();
                pp[b] += h;
                pm[b] -= h;
                let ep = eta_line_integral(src, &m.v, *base, &pp)?;
                let em = eta_line_integral(src, &m.v, *base, &pm)?;
                for c in 0..3 {
                    grad[b][c] = (ep[c] - em[c]) / (2.0 * h);
                }
            }
            std::array::from_fn(|b| std::array::from_fn(|c| grad[b][c] - grad[c][b]))
        }
    };
    let mut m_abs = 0.0_f64;
    for b in 0..3 {
        for c in 0..3 {
            m_abs = m_abs.max((f[b][c] - d_eta[b][c]).abs());
        }
    }
    Ok(m_abs)
}

/// Componentwise residual of *_h(dV + ½ωV) − dη.
pub fn monopole_residual(
    src: &dyn EwSource,
    m: &MonopoleData,
    samples: &[Vec<f64>],
    tol: f64,
) -> ResidualReport {
    let r: Vec<f64> = samples
        .par_iter()
        .map(|p| monopole_defect(src, m, p).unwrap_or(f64::INFINITY))
        .collect();
    ResidualReport::from_residuals("monopole", &r, tol)
}

/// g = V²h − (dφ + η)² over (x¹, x², x³, φ), φ ∈ [−1, 1].
pub fn jones_tod_lift(ew: &EWStructure, m: &MonopoleData) -> Result<MetricField> {
    let h = match &ew.h.repr {
        MetricRepr::Covariant(c) => c.clone(),
        MetricRepr::Contravariant(_) => {
            return Err(GeomError::Invalid("lift needs covariant h".into()))
        }
    };
    let eta = match &m.eta {
        Eta::Symbolic(e) => e.clone(),
        Eta::LineIntegral { .. } => {
            return Err(GeomError::Invalid("lift needs a symbolic η".into()))
        }
    };
    let bx = &ew.h.domain;
    let centre: Vec<f64> = bx
        .lo
        .iter()
        .zip(&bx.hi)
        .map(|(a, b)| {
            if a.is_finite() && b.is_finite() {
                0.5 * (a + b)
            } else {
                0.0
            }
        })
        .collect();
    let v0 = m.v.eval(&centre)?;
    if v0 <= 0.0 {
        return Err(GeomError::Invalid(format!(
            "V = {v0:e} ≤ 0 at the chart centre"
        )));
    }
    let v2 = m.v.powi(2);
    let phi = [eta[0].clone(), eta[1].clone(), eta[2].clone(), Expr::one()];
    let g: Vec<Vec<Expr>> = (0..4)
        .map(|a| {
            (0..4)
                .map(|b| {
                    let base = if a < 3 && b < 3 {
                        &v2 * &h[a][b]
                    } else {
                        Expr::zero()
                    };
                    &base - &(&phi[a] * &phi[b])
                })
                .collect()
        })
        .collect();
    let mut lo = bx.lo.clone();
    let mut hi = bx.hi.clone();
    lo.push(-1.0);
    hi.push(1.0);
    let v = m.v.clone();
    let hm = ew.h.clone();
    let mut coords: Vec<&str> = ew.h.coords.iter().map(|s| s.as_str()).collect();
    coords.push("phi");
    Ok(MetricField::covariant(g)
        .with_domain(DomainBox::new(lo, hi))
        .with_excluded(move |p| !hm.in_chart(&p[..3]) || v.eval(&p[..3]).map_or(true, |x| x <= 0.0))
        .with_orientation(LIFT_ORIENTATION * ew.h.orientation)
        .with_coords(&coords))
}

/// EW structure induced on the slice x_k = `slice` by the coordinate
/// symmetry ∂_k of a 4D metric.
#[derive(Debug, Clone)]
pub struct ReducedEw {
    pub g: MetricField,
    pub k: usize,
    pub slice: f64,
    keep: [usize; 3],
}

/// Index k if K = ∂_k.
pub fn coordinate_field(k: &[Expr; 4]) -> Option<usize> {
    let consts: Vec<f64> = k.iter().map(|e| e.as_const()).collect::<Option<_>>()?;
    let ones: Vec<usize> = (0..4).filter(|&i| consts[i] == 1.0).collect();
    (ones.len() == 1 && consts.iter().filter(|&&c| c == 0.0).count() == 3).then(|| ones[0])
}

/// Reduce along K (a coordinate field), after checking at `reference` that
/// K is conformal Killing and non-null.
pub fn jones_tod_reduce(
    g: &MetricField,
    k: &[Expr; 4],
    slice: f64,
    reference: &[f64],
) -> Result<ReducedEw> {
    let idx = coordinate_field(k)
        .ok_or_else(|| GeomError::Invalid("only coordinate symmetries ∂_k are supported".into()))?;
    let d = crate::zoo::killing_data(g, k, reference)?;
    if d.conformal_defect > 1e-8 {
        return Err(GeomError::Invalid(format!(
            "K is not conformal Killing (defect {:e})",
            d.conformal_defect
        )));
    }
    if d.norm.abs() < 1e-10 {
        return Err(GeomError::Degenerate(
            "K is null; use the null-Killing canonical forms instead of the Einstein-Weyl reduction".into(),
        ));
    }
    let mut keep = [0; 3];
    for (slot, i) in (0..4).filter(|&i| i != idx).enumerate() {
        keep[slot] = i;
    }
    Ok(ReducedEw {
        g: g.clone(),
        k: idx,
        slice,
        keep,
    })
}

impl ReducedEw {
    pub fn domain(&self) -> DomainBox {
        DomainBox::new(
            self.keep.map(|i| self.g.domain.lo[i]).to_vec(),
            self.keep.map(|i| self.g.domain.hi[i]).to_vec(),
        )
    }

    fn lift_point(&self, p: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; 4];
        for (n, &i) in self.keep.iter().enumerate() {
            q[i] = p[n];
        }
        q[self.k] = self.slice;
        q
    }

    pub fn samples(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        halton_box(&self.domain(), n, seed, |p| {
            self.g.admissible::<4>(&self.lift_point(p))
        })
    }
}

fn det4<T: Scalar>(m: &[[T; 4]; 4]) -> T {
    let mut s = T::cst(0.0);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let e = levi_civita(a, b, c, d);
                    if e != 0.0 {
                        s = s + (m[0][a] * m[1][b] * m[2][c] * m[3][d]).scale(e);
                    }
                }
            }
        }
    }
    s
}

impl EwSource for ReducedEw {
    fn ew_jets(&self, p: &[f64]) -> Result<EwJets> {
        let q = self.lift_point(p);
        let gj = self.g.jets::<4>(&q)?;
        let k = self.k;
        let n = gj[k][k];
        if n.value.abs() < 1e-12 {
            return Err(GeomError::Degenerate("|K|² vanishes on the slice".into()));
        }
        let hj: [[Jet2<4>; 4]; 4] = std::array::from_fn(|a| {
            std::array::from_fn(|b| gj[a][b] / n - gj[k][a] * gj[k][b] / (n * n))
        });
        let gd: [[Dual<4>; 4]; 4] =
            std::array::from_fn(|a| std::array::from_fn(|b| gj[a][b].to_dual()));
        let ginv = invert(&gd)?;
        let kk: [Dual<4>; 4] = std::array::from_fn(|a| gd[k][a]);
        let f: [[Dual<4>; 4]; 4] = std::array::from_fn(|a| {
            std::array::from_fn(|b| gj[k][b].partial(a) - gj[k][a].partial(b))
        });
        let t = |a: usize, b: usize, c: usize| kk[a] * f[b][c] + kk[b] * f[c][a] + kk[c] * f[a][b];
        let mut tl = [[[Dual::constant(0.0); 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    tl[a][b][c] = t(a, b, c);
                }
            }
        }
        // raise one index at a time
        let mut t1 = [[[Dual::constant(0.0); 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    t1[a][b][c] =
                        (0..4).fold(Dual::constant(0.0), |s, e| s + ginv[a][e] * tl[e][b][c]);
                }
            }
        }
        let mut t2 = [[[Dual::constant(0.0); 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    t2[a][b][c] =
                        (0..4).fold(Dual::constant(0.0), |s, e| s + ginv[b][e] * t1[a][e][c]);
                }
            }
        }
        let mut t3 = [[[Dual::constant(0.0); 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    t3[a][b][c] =
                        (0..4).fold(Dual::constant(0.0), |s, e| s + ginv[c][e] * t2[a][b][e]);
                }
            }
        }
        let det = det4(&gd);
        let vol = if det.value < 0.0 { -det } else { det }
            .sqrt()
            .scale(self.g.orientation);
        let mut star = [Dual::constant(0.0); 4];
        for (d, s) in star.iter_mut().enumerate() {
            let mut acc = Dual::constant(0.0);
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        let e = levi_civita(a, b, c, d);
                        if e != 0.0 {
                            acc = acc + t3[a][b][c].scale(e);
                        }
                    }
                }
            }
            *s = (vol * acc).scale(1.0 / 6.0);
        }
        let nd = n.to_dual();
        let keep = self.keep;
        let h = std::array::from_fn(|a| {
            std::array::from_fn(|b| restrict_jet(&hj[keep[a]][keep[b]], &keep))
        });
        let omega = std::array::from_fn(|a| {
            restrict_dual(&(star[keep[a]] / nd).scale(2.0 * REDUCE_SIGN), &keep)
        });
        Ok(EwJets { h, omega })
    }

    fn orientation(&self) -> f64 {
        LIFT_ORIENTATION * self.g.orientation
    }
}

fn restrict_jet(j: &Jet2<4>, keep: &[usize; 3]) -> Jet2<3> {
    Jet2 {
        value: j.value,
        grad: keep.map(|i| j.grad[i]),
        hess: std::array::from_fn(|a| std::array::from_fn(|b| j.hess[keep[a]][keep[b]])),
    }
}

fn restrict_dual(d: &Dual<4>, keep: &[usize; 3]) -> Dual<3> {
    Dual {
        value: d.value,
        grad: keep.map(|i| d.grad[i]),
    }
}

#[cfg(test)]
mod tests;
