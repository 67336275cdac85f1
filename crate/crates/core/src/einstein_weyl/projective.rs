use std::cell::Cell;

use ode_solvers::dop_shared::{OutputType, System};
use ode_solvers::{Dopri5, Vector2};

use crate::error::{GeomError, Result};
use crate::jets::Expr;

/// y'' = A₃y'³ + A₂y'² + A₁y' + A₀ with A_i functions of (x, y).
#[derive(Debug, Clone)]
pub struct ProjectiveStructure2D {
    pub a: [Expr; 4],
}

impl ProjectiveStructure2D {
    pub fn new(a: [Expr; 4]) -> Self {
        Self { a }
    }

    pub fn flat() -> Self {
        Self {
            a: std::array::from_fn(|_| Expr::zero()),
        }
    }

    /// Projective class of the Levi-Civita connection of a 2D metric.
    pub fn from_metric(g: [[Expr; 2]; 2]) -> Self {
        let det = &g[0][0] * &g[1][1] - &g[0][1] * &g[0][1];
        let inv = [
            [&g[1][1] / &det, -(&g[0][1] / &det)],
            [-(&g[0][1] / &det), &g[0][0] / &det],
        ];
        let gam = |a: usize, b: usize, c: usize| -> Expr {
            (0..2).fold(Expr::zero(), |s, d| {
                s + 0.5 * (&inv[a][d] * &(g[d][c].diff(b) + g[d][b].diff(c) - g[b][c].diff(d)))
            })
        };
        Self {
            a: [
                -gam(1, 0, 0),
                gam(0, 0, 0) - 2.0 * gam(1, 0, 1),
                2.0 * gam(0, 0, 1) - gam(1, 1, 1),
                gam(0, 1, 1),
            ],
        }
    }

    /// Right-hand side at (x, y) with slope p.
    pub fn rhs(&self, x: f64, y: f64, p: f64) -> Result<f64> {
        let v = [x, y];
        let mut s = 0.0;
        for (k, a) in self.a.iter().enumerate() {
            s += a.eval(&v)? * p.powi(k as i32);
        }
        Ok(s)
    }
}

#[derive(Debug, Clone)]
pub struct GeodesicCurve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub slope: Vec<f64>,
}

struct Ode<'a> {
    ps: &'a ProjectiveStructure2D,
    failed: Cell<Option<GeomError>>,
    limit: f64,
}

impl System<f64, Vector2<f64>> for Ode<'_> {
    fn system(&self, x: f64, s: &Vector2<f64>, ds: &mut Vector2<f64>) {
        ds[0] = s[1];
        ds[1] = match self.ps.rhs(x, s[0], s[1]) {
            Ok(v) => v,
            Err(e) => {
                self.failed.set(Some(e));
                0.0
            }
        };
    }

    fn solout(&mut self, _x: f64, s: &Vector2<f64>, _ds: &Vector2<f64>) -> bool {
        let bad = !(s[0].is_finite() && s[1].is_finite()) || s[1].abs() > self.limit;
        let failed = self.failed.take();
        let stop = bad || failed.is_some();
        self.failed.set(failed);
        stop
    }
}

/// Integrate from (x₀, y₀, y'₀) to `x_end`; the curve is sampled at the
/// accepted steps of an adaptive Dormand-Prince 5(4) integrator.
pub fn projective_geodesic(
    ps: &ProjectiveStructure2D,
    start: [f64; 3],
    x_end: f64,
) -> Result<GeodesicCurve> {
    let [x0, y0, p0] = start;
    let mut ode = Ode {
        ps,
        failed: Cell::new(None),
        limit: 1e8,
    };
    let (xs, ys) = {
        let mut solver = Dopri5::new(&mut ode, x0, x_end, 0.0, Vector2::new(y0, p0), 1e-12, 1e-12);
        solver.set_output(OutputType::Sparse);
        if let Err(e) = solver.integrate() {
            return Err(GeomError::NoConvergence(e.to_string()));
        }
        (solver.x_out().clone(), solver.y_out().clone())
    };
    if let Some(e) = ode.failed.take() {
        return Err(e);
    }
    let last = *xs.last().unwrap_or(&x0);
    if (last - x_end).abs() > 1e-9 * (1.0 + x_end.abs()) {
        return Err(GeomError::Singular(format!(
            "solution blows up near x = {last}"
        )));
    }
    Ok(GeodesicCurve {
        x: xs,
        y: ys.iter().map(|s| s[0]).collect(),
        slope: ys.iter().map(|s| s[1]).collect(),
    })
}

impl System<f64, Vector2<f64>> for &mut Ode<'_> {
    fn system(&self, x: f64, s: &Vector2<f64>, ds: &mut Vector2<f64>) {
        (**self).system(x, s, ds)
    }

    fn solout(&mut self, x: f64, s: &Vector2<f64>, ds: &Vector2<f64>) -> bool {
        (**self).solout(x, s, ds)
    }
}
