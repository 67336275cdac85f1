//! Line integrals of decaying functions on ℝ³ and the ultrahyperbolic range test.

use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::jets::{parse_expr, Expr};
use crate::report::ResidualReport;

/// The line s ↦ (x s + z, y s − w, s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineParam {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub z: f64,
}

impl LineParam {
    pub fn new(x: f64, y: f64, w: f64, z: f64) -> Self {
        Self { x, y, w, z }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.w, self.z]
    }

    pub fn point(&self, s: f64) -> [f64; 3] {
        [self.x * s + self.z, self.y * s - self.w, s]
    }

    /// Parameter interval inside the ball of radius `r` about the origin.
    pub fn chord(&self, r: f64) -> Option<(f64, f64)> {
        let d = [self.x, self.y, 1.0];
        let b = [self.z, -self.w, 0.0];
        let a: f64 = d.iter().map(|v| v * v).sum();
        let bd: f64 = d.iter().zip(&b).map(|(p, q)| p * q).sum();
        let c: f64 = b.iter().map(|v| v * v).sum::<f64>() - r * r;
        let disc = bd * bd - a * c;
        if disc <= 0.0 {
            return None;
        }
        let q = disc.sqrt();
        Some(((-bd - q) / a, (-bd + q) / a))
    }
}

/// Uniform random lines with every parameter in [−half, half].
pub fn random_lines(n: usize, half: f64, seed: u64) -> Vec<LineParam> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| LineParam::from_array(std::array::from_fn(|_| rng.gen_range(-half..half))))
        .collect()
}

/// f on ℝ³ with |f| negligible outside the ball of radius `radius`.
/// `tail` bounds ∫|f| along any line outside that ball.
#[derive(Debug, Clone)]
pub struct Integrand3D {
    pub f: Expr,
    pub radius: f64,
    pub tail: f64,
}

impl Integrand3D {
    pub fn new(f: Expr, radius: f64, tail: f64) -> Self {
        Self { f, radius, tail }
    }

    pub fn parse(src: &str, radius: f64, tail: f64) -> Result<Self> {
        Ok(Self::new(parse_expr(src, &["x", "y", "z"])?, radius, tail))
    }

    pub fn zero() -> Self {
        Self::new(Expr::zero(), 1.0, 0.0)
    }

    /// a·exp(−|p − c|²/σ²), cut off at `radius` ≥ |c|.
    pub fn gaussian(amplitude: f64, centre: [f64; 3], sigma: f64, radius: f64) -> Self {
        let sq = |i: usize, n: &str| format!("({n} - ({}))^2", centre[i]);
        let src = format!(
            "({amplitude})*exp(-({} + {} + {})/({}))",
            sq(0, "x"),
            sq(1, "y"),
            sq(2, "z"),
            sigma * sigma
        );
        let f = parse_expr(&src, &["x", "y", "z"]).expect("gaussian parses");
        let c = centre.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rho = ((radius - c) / sigma).max(0.0);
        // along a line at distance d from c: ∫ outside ≤ a σ √π e^{−ρ²}
        let tail = amplitude.abs() * sigma * std::f64::consts::PI.sqrt() * (-rho * rho).exp();
        Self::new(f, radius, tail)
    }

    /// Registered test integrands by name.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "gaussian" => Ok(Self::gaussian(1.0, [0.0; 3], 1.0, 7.0)),
            "gaussian-offset" => Ok(Self::gaussian(0.7, [0.3, -0.2, 0.4], 0.8, 7.0)),
            "zero" => Ok(Self::zero()),
            _ => Err(GeomError::Unknown(name.into())),
        }
    }

    /// f(p − shift), with the radius grown to keep the tail bound.
    pub fn translated(&self, shift: [f64; 3]) -> Self {
        let vars = std::array::from_fn::<_, 3, _>(|i| Expr::var(i) - shift[i]);
        let f = self.f.substitute(&vars);
        let n = shift.iter().map(|v| v * v).sum::<f64>().sqrt();
        Self::new(f, self.radius + n, self.tail)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub tolerance: f64,
    pub max_panels: usize,
    /// Integration radius; defaults to the integrand's decay radius.
    pub cutoff: Option<f64>,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-13,
            max_panels: 400,
            cutoff: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JohnValue {
    pub value: f64,
    /// Quadrature estimate plus tail bound.
    pub error: f64,
}

// Gauss-Kronrod 7/15 on [−1, 1]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let s = f(c - h * XGK[j])? + f(c + h * XGK[j])?;
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Ok((k * h, ((k - g) * h).abs()))
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive 7/15-point Gauss-Kronrod; returns (value, error estimate).
pub fn adaptive_gk(
    f: &dyn Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> Result<(f64, f64)> {
    let mut heap = BinaryHeap::new();
    let n0 = 8;
    let w = (b - a) / n0 as f64;
    for i in 0..n0 {
        let (lo, hi) = (a + w * i as f64, a + w * (i + 1) as f64);
        let (value, err) = gk15(f, lo, hi)?;
        heap.push(Panel {
            a: lo,
            b: hi,
            value,
            err,
        });
    }
    loop {
        let err: f64 = heap.iter().map(|p| p.err).sum();
        if err <= tol {
            let value = heap.iter().map(|p| p.value).sum();
            return Ok((value, err));
        }
        if heap.len() >= max_panels {
            return Err(GeomError::Quadrature(format!(
                "error {err:.2e} > {tol:.2e} after {max_panels} panels"
            )));
        }
        let p = heap.pop().expect("non-empty");
        let m = 0.5 * (p.a + p.b);
        for (lo, hi) in [(p.a, m), (m, p.b)] {
            let (value, err) = gk15(f, lo, hi)?;
            heap.push(Panel {
                a: lo,
                b: hi,
                value,
                err,
            });
        }
    }
}

/// ψ(L) = ∫_L f.
pub fn john_transform(f: &Integrand3D, line: &LineParam, quad: &QuadOptions) -> Result<JohnValue> {
    let r = quad.cutoff.unwrap_or(f.radius);
    if r < f.radius {
        return Err(GeomError::Invalid(format!(
            "cutoff {r} below decay radius {}",
            f.radius
        )));
    }
    let Some((a, b)) = line.chord(r) else {
        return Ok(JohnValue {
            value: 0.0,
            error: f.tail,
        });
    };
    let g = |s: f64| f.f.eval::<f64>(&line.point(s));
    let (value, err) = adaptive_gk(&g, a, b, quad.tolerance, quad.max_panels)?;
    if !value.is_finite() {
        return Err(GeomError::NonFinite);
    }
    Ok(JohnValue {
        value,
        error: err + f.tail,
    })
}

/// Richardson-extrapolated central-difference ψ_xw + ψ_yz at one line.
fn box_operator(psi: &dyn Fn([f64; 4]) -> Result<f64>, l: [f64; 4], h: f64) -> Result<f64> {
    let mixed = |i: usize, j: usize, h: f64| -> Result<f64> {
        let mut s = 0.0;
        for (si, sj, sign) in [
            (1.0, 1.0, 1.0),
            (1.0, -1.0, -1.0),
            (-1.0, 1.0, -1.0),
            (-1.0, -1.0, 1.0),
        ] {
            let mut q = l;
            q[i] += si * h;
            q[j] += sj * h;
            s += sign * psi(q)?;
        }
        Ok(s / (4.0 * h * h))
    };
    let d = |h: f64| -> Result<f64> { Ok(mixed(0, 2, h)? + mixed(1, 3, h)?) };
    let (d1, d2) = (d(h)?, d(0.5 * h)?);
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Largest error the extrapolated stencil can inherit from pointwise errors ε.
pub fn noise_floor(eps: f64, h: f64) -> f64 {
    // two mixed stencils, four terms each: (16·2ε/h² + 2ε/h²)/3
    6.0 * eps / (h * h)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct XrayRow {
    #[serde(flatten)]
    pub line: LineParam,
    pub psi: f64,
    pub residual: f64,
}

/// ψ and its wave-operator residual at each line.
pub fn xray_table(
    f: &Integrand3D,
    lines: &[LineParam],
    h: f64,
    quad: &QuadOptions,
) -> Result<Vec<XrayRow>> {
    lines
        .par_iter()
        .map(|l| {
            let psi = |q: [f64; 4]| Ok(john_transform(f, &LineParam::from_array(q), quad)?.value);
            Ok(XrayRow {
                line: *l,
                psi: psi(l.to_array())?,
                residual: box_operator(&psi, l.to_array(), h)?,
            })
        })
        .collect()
}

/// Wave-operator residual of an arbitrary function of the line parameters.
pub fn uhwave_residual_of(
    psi: &(dyn Fn([f64; 4]) -> Result<f64> + Sync),
    lines: &[LineParam],
    h: f64,
    tol: f64,
) -> ResidualReport {
    let r: Vec<f64> = lines
        .par_iter()
        .map(|l| box_operator(psi, l.to_array(), h).unwrap_or(f64::INFINITY))
        .collect();
    ResidualReport::from_residuals("uhwave", &r, tol)
}

/// Range test for the transform of `f`: fails with an error when the
/// quadrature noise amplified by the stencil already exceeds `tol`.
pub fn uhwave_residual(
    f: &Integrand3D,
    lines: &[LineParam],
    h: f64,
    tol: f64,
    quad: &QuadOptions,
) -> Result<ResidualReport> {
    let floor = noise_floor(quad.tolerance + f.tail, h);
    if floor > tol {
        return Err(GeomError::Quadrature(format!(
            "noise floor {floor:.2e} exceeds tolerance {tol:.2e} at h = {h}"
        )));
    }
    let rows = xray_table(f, lines, h, quad)?;
    let r: Vec<f64> = rows.iter().map(|r| r.residual).collect();
    Ok(
        ResidualReport::from_residuals("uhwave", &r, tol).with_note(format!(
            "h = {h}, noise floor {floor:.2e}, tail {:.2e}",
            f.tail
        )),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_on_the_vertical_axis() {
        let f = Integrand3D::named("gaussian").unwrap();
        let v = john_transform(
            &f,
            &LineParam::new(0.0, 0.0, 0.0, 0.0),
            &QuadOptions::default(),
        )
        .unwrap();
        assert!((v.value - std::f64::consts::PI.sqrt()).abs() < 1e-8);
        assert!(v.error < 1e-12);
    }

    #[test]
    fn gaussian_closed_form_on_oblique_lines() {
        // ∫ exp(−|b + s d|²) ds = √(π/|d|²) exp(−|b|² + (b·d)²/|d|²)
        let f = Integrand3D::named("gaussian").unwrap();
        for l in random_lines(10, 1.0, 4) {
            let d = [l.x, l.y, 1.0];
            let b = [l.z, -l.w, 0.0];
            let dd: f64 = d.iter().map(|v| v * v).sum();
            let bd: f64 = d.iter().zip(&b).map(|(p, q)| p * q).sum();
            let bb: f64 = b.iter().map(|v| v * v).sum();
            let exact = (std::f64::consts::PI / dd).sqrt() * (-bb + bd * bd / dd).exp();
            let v = john_transform(&f, &l, &QuadOptions::default()).unwrap();
            assert!((v.value - exact).abs() < 1e-12, "{} {exact}", v.value);
        }
    }

    #[test]
    fn zero_and_missing_lines() {
        let q = QuadOptions::default();
        let v = john_transform(
            &Integrand3D::zero(),
            &LineParam::new(0.3, 0.1, 0.2, 0.0),
            &q,
        );
        assert_eq!(v.unwrap().value, 0.0);
        let far = LineParam::new(0.0, 0.0, 0.0, 50.0);
        let v = john_transform(&Integrand3D::named("gaussian").unwrap(), &far, &q).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn cutoff_below_radius_is_rejected() {
        let q = QuadOptions {
            cutoff: Some(1.0),
            ..Default::default()
        };
        let f = Integrand3D::named("gaussian").unwrap();
        assert!(john_transform(&f, &LineParam::new(0.0, 0.0, 0.0, 0.0), &q).is_err());
    }

    #[test]
    fn unreachable_tolerance_is_an_error() {
        let q = QuadOptions {
            tolerance: 1e-30,
            max_panels: 10,
            cutoff: None,
        };
        let f = Integrand3D::named("gaussian").unwrap();
        let e = john_transform(&f, &LineParam::new(0.2, 0.0, 0.0, 0.0), &q);
        assert!(matches!(e, Err(GeomError::Quadrature(_))));
    }

    #[test]
    fn translation_covariance() {
        let f = Integrand3D::named("gaussian-offset").unwrap();
        let g = f.translated([0.0, 0.0, 1.0]);
        let q = QuadOptions::default();
        for l in random_lines(3, 1.0, 9) {
            let moved = LineParam::new(l.x, l.y, l.w - l.y, l.z + l.x);
            let a = john_transform(&g, &l, &q).unwrap().value;
            let b = john_transform(&f, &moved, &q).unwrap().value;
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn transform_is_linear() {
        let f = Integrand3D::named("gaussian").unwrap();
        let g = Integrand3D::named("gaussian-offset").unwrap();
        let (a, b) = (0.7, -1.3);
        let sum = Integrand3D::new(
            a * &f.f + b * &g.f,
            7.0,
            a.abs() * f.tail + b.abs() * g.tail,
        );
        let q = QuadOptions::default();
        for l in random_lines(5, 1.0, 2) {
            let lhs = john_transform(&sum, &l, &q).unwrap().value;
            let rhs = a * john_transform(&f, &l, &q).unwrap().value
                + b * john_transform(&g, &l, &q).unwrap().value;
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn range_satisfies_the_wave_equation() {
        let f = Integrand3D::named("gaussian").unwrap();
        let lines = random_lines(20, 1.0, 1);
        let r = uhwave_residual(&f, &lines, 1e-2, 1e-4, &QuadOptions::default()).unwrap();
        assert!(r.passed(), "{r:?}");
        let z = uhwave_residual(
            &Integrand3D::zero(),
            &lines,
            1e-2,
            1e-8,
            &QuadOptions::default(),
        )
        .unwrap();
        assert_eq!(z.max_abs, 0.0);
    }

    #[test]
    fn non_range_functions_are_detected() {
        let psi = |q: [f64; 4]| Ok((q[0] * q[2] + 0.5 * q[1]).sin() + q[0] * q[1] * q[3]);
        let r = uhwave_residual_of(&psi, &random_lines(20, 1.0, 3), 1e-2, 1e-4);
        assert!(!r.passed());
        assert!(r.max_abs > 0.1);
    }

    #[test]
    fn coarse_quadrature_is_refused() {
        let q = QuadOptions {
            tolerance: 1e-6,
            ..Default::default()
        };
        let f = Integrand3D::named("gaussian").unwrap();
        let e = uhwave_residual(&f, &random_lines(2, 1.0, 1), 1e-2, 1e-4, &q);
        assert!(matches!(e, Err(GeomError::Quadrature(_))));
    }
}
