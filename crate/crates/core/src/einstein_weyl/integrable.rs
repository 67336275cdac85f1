use rayon::prelude::*;

use super::EWStructure;
use crate::error::{GeomError, Result};
use crate::geometry::MetricField;
use crate::jets::{Dual, Evaluator, Expr, Jet2, Scalar};
use crate::report::ResidualReport;

/// Dispersionless systems on (x, y, t).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrableKind {
    /// (e^u)_tt − u_xx − u_yy
    Toda,
    /// (u_t − u u_x)_x − u_yy
    Dkp,
    /// u_y + w_x, u_t + w_y + u w_x − w u_x
    HyperCr,
    /// u_y + w_x, u_t + w_y − c(u w_x − w u_x) + b u u_x
    Interpolating,
}

impl std::str::FromStr for IntegrableKind {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toda" => Ok(Self::Toda),
            "dkp" => Ok(Self::Dkp),
            "hypercr" => Ok(Self::HyperCr),
            "interpolating" => Ok(Self::Interpolating),
            _ => Err(GeomError::Unknown(s.into())),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct IntegrableFields {
    pub u: Option<Expr>,
    pub w: Option<Expr>,
}

impl IntegrableFields {
    pub fn u(u: Expr) -> Self {
        Self {
            u: Some(u),
            w: None,
        }
    }

    pub fn uw(u: Expr, w: Expr) -> Self {
        Self {
            u: Some(u),
            w: Some(w),
        }
    }
}

fn need<'a>(f: &'a Option<Expr>, name: &str) -> Result<&'a Expr> {
    f.as_ref()
        .ok_or_else(|| GeomError::Missing(format!("field {name}")))
}

/// The two first-order residuals of the hyper-CR / interpolating system as
/// first-order jets, so their derivatives are exact.
pub fn system_residual_jets(
    kind: IntegrableKind,
    f: &IntegrableFields,
    b: f64,
    c: f64,
    p: &[f64],
) -> Result<[Dual<3>; 2]> {
    let (b, c) = match kind {
        IntegrableKind::HyperCr => (0.0, -1.0),
        IntegrableKind::Interpolating => (b, c),
        _ => return Err(GeomError::Invalid("not a first-order system".into())),
    };
    let vars: Vec<Jet2<3>> = p
        .iter()
        .enumerate()
        .map(|(i, &x)| Jet2::variable(x, i))
        .collect();
    let mut ev = Evaluator::new(&vars);
    let u = ev.eval(need(&f.u, "u")?)?;
    let w = ev.eval(need(&f.w, "w")?)?;
    let (x, y, t) = (0, 1, 2);
    let (ud, wd) = (u.to_dual(), w.to_dual());
    let bracket = ud * w.partial(x) - wd * u.partial(x);
    let r1 = u.partial(y) + w.partial(x);
    let r2 = u.partial(t) + w.partial(y) - bracket.scale(c) + (ud * u.partial(x)).scale(b);
    Ok([r1, r2])
}

/// Residual components at `p` = (x, y, t).
pub fn integrable_residual_at(
    kind: IntegrableKind,
    f: &IntegrableFields,
    b: f64,
    c: f64,
    p: &[f64],
) -> Result<Vec<f64>> {
    let vars: Vec<Jet2<3>> = p
        .iter()
        .enumerate()
        .map(|(i, &x)| Jet2::variable(x, i))
        .collect();
    let mut ev = Evaluator::new(&vars);
    let u = ev.eval(need(&f.u, "u")?)?;
    let (x, y, t) = (0, 1, 2);
    let d = |j: &Jet2<3>, i: usize| j.grad[i];
    let out = match kind {
        IntegrableKind::Toda => {
            let e = u.exp();
            vec![e.hess[t][t] - u.hess[x][x] - u.hess[y][y]]
        }
        IntegrableKind::Dkp => {
            vec![u.hess[t][x] - d(&u, x).powi(2) - u.value * u.hess[x][x] - u.hess[y][y]]
        }
        IntegrableKind::HyperCr | IntegrableKind::Interpolating => {
            system_residual_jets(kind, f, b, c, p)?
                .iter()
                .map(|r| r.value)
                .collect()
        }
    };
    if out.iter().any(|r| !r.is_finite()) {
        return Err(GeomError::NonFinite);
    }
    Ok(out)
}

pub fn integrable_residual(
    kind: IntegrableKind,
    f: &IntegrableFields,
    b: f64,
    c: f64,
    samples: &[Vec<f64>],
    tol: f64,
) -> ResidualReport {
    let r: Vec<f64> = samples
        .par_iter()
        .map(|p| match integrable_residual_at(kind, f, b, c, p) {
            Ok(v) => v.into_iter().fold(0.0_f64, |m, x| m.max(x.abs())),
            Err(_) => f64::INFINITY,
        })
        .collect();
    let name = match kind {
        IntegrableKind::Toda => "toda",
        IntegrableKind::Dkp => "dkp",
        IntegrableKind::HyperCr => "hypercr",
        IntegrableKind::Interpolating => "interpolating",
    };
    ResidualReport::from_residuals(name, &r, tol)
}

fn z() -> Expr {
    Expr::zero()
}

/// h = e^u(dx² + dy²) − dt², ω = 2u_t dt.
pub fn toda_ew(u: &Expr) -> EWStructure {
    let e = u.exp();
    let h = vec![
        vec![e.clone(), z(), z()],
        vec![z(), e, z()],
        vec![z(), z(), Expr::constant(-1.0)],
    ];
    EWStructure {
        h: MetricField::covariant(h).with_coords(&["x", "y", "t"]),
        omega: [z(), z(), 2.0 * u.diff(2)],
    }
}

/// h = dy² − 4dx dt − 4u dt², ω = −4u_x dt.
pub fn dkp_ew(u: &Expr) -> EWStructure {
    let m2 = || Expr::constant(-2.0);
    let h = vec![
        vec![z(), z(), m2()],
        vec![z(), Expr::one(), z()],
        vec![m2(), z(), -4.0 * u],
    ];
    EWStructure {
        h: MetricField::covariant(h).with_coords(&["x", "y", "t"]),
        omega: [z(), z(), -4.0 * u.diff(0)],
    }
}

/// h = (dy + u dt)² − 4(dx + w dt)dt, ω = u_x dy + (u u_x + 2u_y) dt.
pub fn hypercr_ew(u: &Expr, w: &Expr) -> EWStructure {
    let h = vec![
        vec![z(), z(), Expr::constant(-2.0)],
        vec![z(), Expr::one(), u.clone()],
        vec![Expr::constant(-2.0), u.clone(), u.powi(2) - 4.0 * w],
    ];
    let ux = u.diff(0);
    let omega = [z(), ux.clone(), u * &ux + 2.0 * u.diff(1)];
    EWStructure {
        h: MetricField::covariant(h).with_coords(&["x", "y", "t"]),
        omega,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::parse_expr;

    fn pts() -> Vec<Vec<f64>> {
        vec![
            vec![0.3, -0.2, -1.4],
            vec![-0.5, 0.7, -0.8],
            vec![0.1, 0.4, -1.9],
        ]
    }

    #[test]
    fn tod_toda_solution() {
        let u = parse_expr("ln(4*(1-t^2)/(1+x^2+y^2)^2)", &["x", "y", "t"]).unwrap();
        let s = vec![vec![0.3, -0.2, 0.4], vec![-0.5, 0.7, -0.1]];
        assert!(integrable_residual(
            IntegrableKind::Toda,
            &IntegrableFields::u(u),
            0.0,
            0.0,
            &s,
            1e-10
        )
        .passed());
    }

    #[test]
    fn dkp_similarity_solution() {
        let u = parse_expr("-x/t", &["x", "y", "t"]).unwrap();
        let r = integrable_residual(
            IntegrableKind::Dkp,
            &IntegrableFields::u(u.clone()),
            0.0,
            0.0,
            &pts(),
            1e-12,
        );
        assert!(r.passed(), "{r:?}");
        let bad = integrable_residual(
            IntegrableKind::Dkp,
            &IntegrableFields::u(-u),
            0.0,
            0.0,
            &pts(),
            1e-6,
        );
        assert!(!bad.passed());
    }

    #[test]
    fn hypercr_trivial_and_polynomial() {
        let r = integrable_residual(
            IntegrableKind::HyperCr,
            &IntegrableFields::uw(z(), z()),
            0.0,
            0.0,
            &pts(),
            1e-14,
        );
        assert!(r.passed());
        let u = parse_expr("-y", &["x", "y", "t"]).unwrap();
        let w = parse_expr("x + y^2/2", &["x", "y", "t"]).unwrap();
        let r = integrable_residual(
            IntegrableKind::HyperCr,
            &IntegrableFields::uw(u, w),
            0.0,
            0.0,
            &pts(),
            1e-12,
        );
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn missing_field_is_reported() {
        let e = integrable_residual_at(
            IntegrableKind::HyperCr,
            &IntegrableFields::u(z()),
            0.0,
            0.0,
            &[0.0; 3],
        );
        assert!(matches!(e, Err(GeomError::Missing(_))));
    }

    #[test]
    fn dkp_null_direction() {
        let u = parse_expr("-x/t", &["x", "y", "t"]).unwrap();
        let ew = dkp_ew(&u);
        for p in pts() {
            let h = ew.h.values::<3>(&p).unwrap();
            assert_eq!(h[0][0], 0.0);
        }
    }
}
