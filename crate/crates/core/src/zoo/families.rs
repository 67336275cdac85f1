use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    null_coframe_ldl, orient_by_sd_form, Expected, Governing, KillingField, Params, ZooEntry,
};
use crate::error::{GeomError, Result};
use crate::geometry::{MetricField, PetrovType};
use crate::jets::{DomainBox, Expr};
use crate::spinor::{nullkahler_f, special_pde, SpecialData, SpecialKind, TetradFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Flat,
    Heavenly1,
    Heavenly2,
    NullKahler,
    Hyperhermitian,
    Sfk,
    G0,
    PpWave,
    NullKvNontwisting,
    NullKvTwisting,
    Twistor,
    Tod,
    OoguriVafa,
    Neutral,
}

impl Family {
    pub fn coords(self) -> [&'static str; 4] {
        match self {
            Family::Flat | Family::Neutral => ["x0", "x1", "x2", "x3"],
            Family::Heavenly1 => ["x", "y", "w", "z"],
            Family::Heavenly2 | Family::NullKahler => ["w", "z", "x", "y"],
            Family::Hyperhermitian => ["p0", "p1", "w0", "w1"],
            Family::Sfk => ["w0", "w1", "wt0", "wt1"],
            Family::G0 => ["a", "b", "c", "d"],
            Family::PpWave | Family::NullKvNontwisting | Family::NullKvTwisting => {
                ["phi", "x", "y", "z"]
            }
            Family::Twistor => ["X", "Y", "W", "Z"],
            Family::Tod => ["x", "y", "t", "phi"],
            Family::OoguriVafa => ["u", "v", "a", "b"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Flat => "flat",
            Family::Heavenly1 => "heavenly1",
            Family::Heavenly2 => "heavenly2",
            Family::NullKahler => "nullkahler",
            Family::Hyperhermitian => "hyperhermitian",
            Family::Sfk => "sfk",
            Family::G0 => "g0",
            Family::PpWave => "ppwave",
            Family::NullKvNontwisting => "nullkv-nontwisting",
            Family::NullKvTwisting => "nullkv-twisting",
            Family::Twistor => "twistor",
            Family::Tod => "tod",
            Family::OoguriVafa => "ooguri-vafa",
            Family::Neutral => "neutral",
        }
    }

    pub const ALL: [Family; 14] = [
        Family::Flat,
        Family::Heavenly1,
        Family::Heavenly2,
        Family::NullKahler,
        Family::Hyperhermitian,
        Family::Sfk,
        Family::G0,
        Family::PpWave,
        Family::NullKvNontwisting,
        Family::NullKvTwisting,
        Family::Twistor,
        Family::Tod,
        Family::OoguriVafa,
        Family::Neutral,
    ];

    pub fn from_name(name: &str) -> Result<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| GeomError::Unknown(name.into()))
    }

    /// Potentials that do not enter the metric; corrupting them shows up in
    /// the governing residuals only.
    pub fn auxiliary_potentials(self) -> &'static [&'static str] {
        match self {
            Family::Sfk => &["f"],
            _ => &[],
        }
    }

    pub fn build(self, p: &Params) -> Result<ZooEntry> {
        match self {
            Family::Flat => flat(p),
            Family::Heavenly1 => heavenly1(p),
            Family::Heavenly2 => heavenly2(p, false),
            Family::NullKahler => heavenly2(p, true),
            Family::Hyperhermitian => hyperhermitian(p),
            Family::Sfk => sfk(p),
            Family::G0 => g0(p),
            Family::PpWave => ppwave(p),
            Family::NullKvNontwisting => nontwisting(p),
            Family::NullKvTwisting => twisting(p),
            Family::Twistor => twistor(p),
            Family::Tod => tod(p),
            Family::OoguriVafa => ooguri_vafa(p),
            Family::Neutral => neutral(p),
        }
    }
}

fn v(i: usize) -> Expr {
    Expr::var(i)
}

fn c(x: f64) -> Expr {
    Expr::constant(x)
}

fn zero() -> Expr {
    Expr::zero()
}

fn center(bx: &DomainBox) -> Vec<f64> {
    bx.lo
        .iter()
        .zip(&bx.hi)
        .map(|(a, b)| 0.5 * (a + b))
        .collect()
}

/// Entry with metric from the frame; verdicts and residuals filled by the caller.
fn base(family: Family, params: &Params, frame: TetradFrame, bx: DomainBox) -> Result<ZooEntry> {
    let coords = family.coords();
    let metric = frame.metric()?.with_coords(&coords).with_domain(bx.clone());
    Ok(ZooEntry {
        name: family.name().to_string(),
        family,
        params: params.clone(),
        coords: coords.iter().map(|s| s.to_string()).collect(),
        metric,
        frame: Some(frame),
        governing: Vec::new(),
        expected: Vec::new(),
        kahler_form: None,
        killing: None,
        sample_box: bx,
    })
}

fn coframe(bx: &DomainBox, rows: [[Expr; 4]; 4]) -> TetradFrame {
    TetradFrame::from_coframe(rows, center(bx))
}

fn special_governing(
    kind: SpecialKind,
    data: SpecialData,
    names: &[&str],
) -> Result<Vec<Governing>> {
    let pde = special_pde(kind, &data)?;
    Ok(pde
        .into_iter()
        .zip(names)
        .map(|(e, n)| Governing::expr(n, e))
        .collect())
}

fn flat(p: &Params) -> Result<ZooEntry> {
    let bx = DomainBox::cube(4, -1.0, 1.0);
    let mut e = base(
        Family::Flat,
        p,
        TetradFrame::coordinate().with_reference(center(&bx)),
        bx,
    )?;
    e.expected = vec![
        Expected::Asd,
        Expected::RicciFlat,
        Expected::Petrov(PetrovType::O),
    ];
    Ok(e)
}

/// First heavenly family over (x, y, w, z); flat for Ω = wx + zy.
pub fn build_heavenly1(omega: Expr) -> Result<ZooEntry> {
    Family::Heavenly1.build(&Params::new().with("Omega", omega))
}

fn heavenly1(p: &Params) -> Result<ZooEntry> {
    let om = p.pot("Omega")?;
    let (x, y, w, z) = (0, 1, 2, 3);
    let d = |a, b| om.diff2(a, b);
    let bx = DomainBox::cube(4, -1.0, 1.0);
    let fr = coframe(
        &bx,
        [
            [c(0.5), zero(), zero(), zero()],
            [zero(), zero(), d(y, w), d(y, z)],
            [zero(), c(-0.5), zero(), zero()],
            [zero(), zero(), d(x, w), d(x, z)],
        ],
    );
    let mut e = base(Family::Heavenly1, p, fr, bx)?;
    e.governing = vec![Governing::expr(
        "heavenly",
        d(x, w) * d(y, z) - d(x, z) * d(y, w) - 1.0,
    )];
    e.expected = vec![Expected::Asd, Expected::RicciFlat];
    Ok(e)
}

/// Second heavenly (pseudo-hyperkähler) branch over (w, z, x, y): the
/// governing residual is f itself.
pub fn build_heavenly2_nullkahler(theta: Expr) -> Result<ZooEntry> {
    Family::Heavenly2.build(&Params::new().with("theta", theta))
}

/// ASD null-Kähler branch: the governing residual is □f.
pub fn build_nullkahler_asd(theta: Expr) -> Result<ZooEntry> {
    Family::NullKahler.build(&Params::new().with("theta", theta))
}

fn heavenly2(p: &Params, asd_branch: bool) -> Result<ZooEntry> {
    let th = p.pot("theta")?;
    let (w, z, x, y) = (0, 1, 2, 3);
    let (txx, txy, tyy) = (th.diff2(x, x), th.diff2(x, y), th.diff2(y, y));
    let bx = DomainBox::cube(4, -1.0, 1.0);
    let mut e1 = [zero(), zero(), zero(), zero()];
    e1[z] = 0.5 * &txx;
    e1[y] = c(-0.5);
    let mut e3 = [zero(), zero(), zero(), zero()];
    e3[w] = -0.5 * &tyy;
    e3[z] = txy;
    e3[x] = c(0.5);
    let fr = coframe(
        &bx,
        [
            [c(1.0), zero(), zero(), zero()],
            e1,
            [zero(), c(1.0), zero(), zero()],
            e3,
        ],
    );
    let family = if asd_branch {
        Family::NullKahler
    } else {
        Family::Heavenly2
    };
    let mut e = base(family, p, fr, bx)?;
    if asd_branch {
        e.governing = special_governing(
            SpecialKind::NullKahler,
            SpecialData::new().with("theta", th),
            &["box-f"],
        )?;
        e.expected = vec![Expected::Asd, Expected::ScalarFlat];
    } else {
        e.governing = vec![Governing::expr("f", nullkahler_f(&th))];
        e.expected = vec![Expected::Asd, Expected::RicciFlat];
    }
    Ok(e)
}

/// f of the null-Kähler family as an expression over (w, z, x, y).
pub fn nullkahler_potential_f(theta: &Expr) -> Expr {
    nullkahler_f(theta)
}

/// Hyperhermitian family over (p⁰, p¹, w⁰, w¹).
pub fn build_hyperhermitian(theta0: Expr, theta1: Expr) -> Result<ZooEntry> {
    Family::Hyperhermitian.build(&Params::new().with("theta0", theta0).with("theta1", theta1))
}

fn hyperhermitian(p: &Params) -> Result<ZooEntry> {
    let th = [p.pot("theta0")?, p.pot("theta1")?];
    let (pp, ww) = ([0, 1], [2, 3]);
    let bx = DomainBox::cube(4, -1.0, 1.0);
    let one_hot =
        |i: usize| -> [Expr; 4] { std::array::from_fn(|m| if m == i { c(1.0) } else { zero() }) };
    let e1 = |a: usize| -> [Expr; 4] {
        let mut r = one_hot(ww[a]);
        for b in 0..2 {
            r[pp[b]] = &r[pp[b]] - &th[b].diff(pp[a]);
        }
        r
    };
    let fr = TetradFrame::from_vectors([one_hot(pp[0]), e1(0), one_hot(pp[1]), e1(1)], center(&bx));
    let mut e = base(Family::Hyperhermitian, p, fr, bx)?;
    e.governing = special_governing(
        SpecialKind::Hyperhermitian,
        SpecialData::new()
            .with("theta0", th[0].clone())
            .with("theta1", th[1].clone()),
        &["hyperheavenly0", "hyperheavenly1"],
    )?;
    e.expected = vec![Expected::Asd];
    Ok(e)
}

/// Scalar-flat Kähler family over (w⁰, w¹, w̃⁰, w̃¹) with metric
/// Ω_{w^A w̃^B} dw^A⊙dw̃^B.
pub fn build_sfk(omega: Expr, f: Expr) -> Result<ZooEntry> {
    Family::Sfk.build(&Params::new().with("omega", omega).with("f", f))
}

fn sfk(p: &Params) -> Result<ZooEntry> {
    let om = p.pot("omega")?;
    let f = p.pot("f")?;
    let (w, wt) = ([0, 1], [2, 3]);
    let h: [[Expr; 2]; 2] = std::array::from_fn(|a| std::array::from_fn(|b| om.diff2(w[a], wt[b])));
    let g = &h[0][0] * &h[1][1] - &h[0][1] * &h[1][0];
    let bx = DomainBox::cube(4, -0.5, 0.5);
    let s = 2.0 / &g;
    let one_hot =
        |i: usize| -> [Expr; 4] { std::array::from_fn(|m| if m == i { c(1.0) } else { zero() }) };
    let e1 = |a: usize| -> [Expr; 4] {
        let mut r = [zero(), zero(), zero(), zero()];
        r[wt[0]] = &s * &h[a][1];
        r[wt[1]] = -(&s * &h[a][0]);
        r
    };
    let mut omega = std::array::from_fn(|_| std::array::from_fn(|_| zero()));
    let mut gm: Vec<Vec<Expr>> = vec![vec![zero(); 4]; 4];
    for a in 0..2 {
        for b in 0..2 {
            let half = 0.5 * &h[a][b];
            gm[w[a]][wt[b]] = half.clone();
            gm[wt[b]][w[a]] = half.clone();
            omega[w[a]][wt[b]] = half.clone();
            omega[wt[b]][w[a]] = -half;
        }
    }
    let fr = TetradFrame::from_vectors([one_hot(w[0]), e1(0), one_hot(w[1]), e1(1)], center(&bx));
    let fr = orient_by_sd_form(fr, &omega)?;
    let orient = fr.orientation_at(&fr.reference)?;
    let mut e = base(Family::Sfk, p, fr, bx.clone())?;
    e.metric = MetricField::covariant(gm)
        .with_coords(&Family::Sfk.coords())
        .with_domain(bx)
        .with_orientation(orient);
    e.governing = special_governing(
        SpecialKind::Sfk,
        SpecialData::new().with("omega", om).with("f", f),
        &["sfk-f0", "sfk-f1", "box-f"],
    )?;
    e.expected = vec![Expected::Asd, Expected::ScalarFlat, Expected::KahlerClosed];
    e.kahler_form = Some(omega);
    Ok(e)
}

/// Product of the round sphere and the hyperbolic plane in stereographic
/// charts, A(da² + db²) − B(dc² + dd²).
pub fn build_g0() -> Result<ZooEntry> {
    let sph = |i: usize, j: usize| 4.0 / (1.0 + v(i).powi(2) + v(j).powi(2)).powi(2);
    Family::G0.build(&Params::new().with("A", sph(0, 1)).with("B", sph(2, 3)))
}

fn g0(p: &Params) -> Result<ZooEntry> {
    let (a, b) = (p.pot("A")?, p.pot("B")?);
    let (al, be) = (a.sqrt(), b.sqrt());
    let bx = DomainBox::cube(4, -1.0, 1.0);
    let fr = coframe(
        &bx,
        [
            [al.clone(), zero(), be.clone(), zero()],
            [zero(), -0.5 * &al, zero(), 0.5 * &be],
            [zero(), al.clone(), zero(), be.clone()],
            [0.5 * &al, zero(), -0.5 * &be, zero()],
        ],
    );
    let mut omega: [[Expr; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| zero()));
    omega[0][1] = a.clone();
    omega[1][0] = -&a;
    omega[2][3] = -&b;
    omega[3][2] = b.clone();
    let fr = orient_by_sd_form(fr, &omega)?;
    let mut e = base(Family::G0, p, fr, bx)?;
    e.expected = vec![
        Expected::Asd,
        Expected::ScalarFlat,
        Expected::KahlerClosed,
        Expected::Petrov(PetrovType::O),
    ];
    e.kahler_form = Some(omega);
    Ok(e)
}

/// pp-wave (dφ − Q dy)⊙dy − dz⊙dx over (φ, x, y, z), Q = Q(x, y).
pub fn build_ppwave(q: Expr) -> Result<ZooEntry> {
    Family::PpWave.build(&Params::new().with("Q", q))
}

fn ppwave(p: &Params) -> Result<ZooEntry> {
    let q = p.pot("Q")?;
    let bx = DomainBox::cube(4, -1.0, 1.0);
    let fr = coframe(
        &bx,
        [
            [c(0.5), zero(), -0.5 * &q, zero()],
            [zero(), zero(), zero(), c(0.5)],
            [zero(), c(1.0), zero(), zero()],
            [zero(), zero(), c(1.0), zero()],
        ],
    );
    let curved = !q.diff2(1, 1).is_zero();
    let mut e = base(Family::PpWave, p, fr, bx)?;
    e.expected = vec![Expected::Asd, Expected::RicciFlat];
    if curved {
        e.expected.push(Expected::Petrov(PetrovType::N));
    }
    e.killing = Some(KillingField {
        components: [c(1.0), zero(), zero(), zero()],
        null: true,
        twisting: Some(false),
    });
    Ok(e)
}

/// A₀ = β_x + ββ_y − βA₁ − β²A₂ − β³A₃ for the non-twisting null form.
pub fn null_kv_a0(a1: &Expr, a2: &Expr, a3: &Expr, beta: &Expr) -> Expr {
    let (x, y) = (1, 2);
    beta.diff(x) + beta * &beta.diff(y) - beta * a1 - beta.powi(2) * a2 - beta.powi(3) * a3
}

/// ASD metric with non-twisting null Killing vector ∂_φ, arbitrary
/// functions of (x, y) over the chart (φ, x, y, z).
pub fn build_null_kv_nontwisting(
    a1: Expr,
    a2: Expr,
    a3: Expr,
    beta: Expr,
    q: Expr,
    pf: Expr,
) -> Result<ZooEntry> {
    Family::NullKvNontwisting.build(
        &Params::new()
            .with("A1", a1)
            .with("A2", a2)
            .with("A3", a3)
            .with("beta", beta)
            .with("Q", q)
            .with("P", pf),
    )
}

fn nontwisting(p: &Params) -> Result<ZooEntry> {
    let (a1, a2, a3) = (p.pot("A1")?, p.pot("A2")?, p.pot("A3")?);
    let (beta, q, pf) = (p.pot("beta")?, p.pot("Q")?, p.pot("P")?);
    let (x, y, z) = (1, 2, 3);
    let bx = DomainBox::cube(4, -1.0, 1.0);
    // a = dφ + (zA₃ − Q)dy, b = dy − βdx,
    // c = dz − z(−β_y + A₁ + βA₂ + β²A₃)dx − (z(A₂ + 2βA₃) + P)dy
    let mut ra = [c(1.0), zero(), zero(), zero()];
    ra[y] = v(z) * &a3 - &q;
    let mut rb = [zero(), zero(), c(1.0), zero()];
    rb[x] = -&beta;
    let mut rc = [zero(), zero(), zero(), c(1.0)];
    rc[x] = -(v(z) * (-beta.diff(y) + &a1 + &beta * &a2 + beta.powi(2) * &a3));
    rc[y] = -(v(z) * (&a2 + 2.0 * (&beta * &a3)) + &pf);
    let half = |r: [Expr; 4]| -> [Expr; 4] { r.map(|e| 0.5 * e) };
    let fr = coframe(
        &bx,
        [half(ra), half(rc), [zero(), c(1.0), zero(), zero()], rb],
    );
    let mut e = base(Family::NullKvNontwisting, p, fr, bx)?;
    e.expected = vec![Expected::Asd];
    if [&a1, &a2, &a3, &beta, &pf].iter().all(|f| f.is_zero()) {
        e.expected.push(Expected::RicciFlat);
    }
    e.killing = Some(KillingField {
        components: [c(1.0), zero(), zero(), zero()],
        null: true,
        twisting: Some(false),
    });
    Ok(e)
}

/// ASD metric with twisting null Killing vector ∂_φ determined by A₀..A₃
/// of (x, y) and G of (x, y, z).
pub fn build_null_kv_twisting(a: [Expr; 4], g: Expr) -> Result<ZooEntry> {
    let [a0, a1, a2, a3] = a;
    Family::NullKvTwisting.build(
        &Params::new()
            .with("A0", a0)
            .with("A1", a1)
            .with("A2", a2)
            .with("A3", a3)
            .with("G", g),
    )
}

fn twisting(p: &Params) -> Result<ZooEntry> {
    let a: Vec<Expr> = (0..4)
        .map(|i| p.pot(&format!("A{i}")))
        .collect::<Result<_>>()?;
    let g = p.pot("G")?;
    let (x, y, z) = (1, 2, 3);
    let bx = DomainBox::cube(4, -1.0, 1.0);
    let (gz, gzz) = (g.diff(z), g.diff2(z, z));
    let cubic = &a[0] + v(z) * &a[1] + v(z).powi(2) * &a[2] + v(z).powi(3) * &a[3];
    // a = dφ + A₃G_z dy + (A₂G_z + 2A₃(zG_z − G) − G_zy)dx
    let mut ra = [c(0.5), zero(), zero(), zero()];
    ra[y] = 0.5 * (&a[3] * &gz);
    ra[x] = 0.5 * (&a[2] * &gz + 2.0 * (&a[3] * &(v(z) * &gz - &g)) - g.diff2(z, y));
    let mut rb = [zero(), zero(), c(1.0), zero()];
    rb[x] = -v(z);
    let mut rc = [zero(), zero(), zero(), c(1.0)];
    rc[x] = -cubic.clone();
    let mut rdx = [zero(), zero(), zero(), zero()];
    rdx[x] = 0.5 * &gzz;
    let fr = coframe(&bx, [ra, rc, rdx, rb]);
    let mut e = base(Family::NullKvTwisting, p, fr, bx)?;
    let geq = gzz.diff(x) + v(z) * gzz.diff(y) + cubic * gzz.diff(z);
    e.governing = vec![Governing::expr("G-equation", geq)];
    e.expected = vec![Expected::Asd];
    e.killing = Some(KillingField {
        components: [c(1.0), zero(), zero(), zero()],
        null: true,
        twisting: Some(true),
    });
    Ok(e)
}

/// dX dW + dY dZ − (W dX + Z dY)(A dX + B dY) over (X, Y, W, Z).
pub fn build_twistor_example(a: Expr, b: Expr) -> Result<ZooEntry> {
    Family::Twistor.build(&Params::new().with("A", a).with("B", b))
}

fn twistor(p: &Params) -> Result<ZooEntry> {
    let (a, b) = (p.pot("A")?, p.pot("B")?);
    let (wv, zv) = (v(2), v(3));
    let bx = DomainBox::cube(4, -1.0, 1.0);
    let fr = coframe(
        &bx,
        [
            [c(0.5), zero(), zero(), zero()],
            [zero(), c(-0.5), zero(), zero()],
            [-(&zv * &a), -(&zv * &b), zero(), c(1.0)],
            [-(&wv * &a), -(&wv * &b), c(1.0), zero()],
        ],
    );
    let mut e = base(Family::Twistor, p, fr, bx)?;
    e.expected = vec![Expected::Asd];
    let tw = !(a.is_zero() && b.is_zero());
    e.killing = Some(KillingField {
        components: [zero(), zero(), wv, zv],
        null: true,
        twisting: Some(tw),
    });
    Ok(e)
}

/// η₀ = 2(x dy − y dx)/(1 + x² + y²) as (η_x, η_y, η_t).
pub fn tod_eta0() -> [Expr; 3] {
    let r = 1.0 + v(0).powi(2) + v(1).powi(2);
    [-2.0 * v(1) / &r, 2.0 * v(0) / &r, zero()]
}

/// V(e^u(dx² + dy²) − dt²) − V⁻¹(dφ + η)² over (x, y, t, φ) with
/// V = W/(1 − t²), e^u = 4(1 − t²)/(1 + x² + y²)².
pub fn build_tod_sfk(w: Expr, eta: [Expr; 3]) -> Result<ZooEntry> {
    let [ex, ey, et] = eta;
    Family::Tod.build(
        &Params::new()
            .with("W", w)
            .with("eta_x", ex)
            .with("eta_y", ey)
            .with("eta_t", et),
    )
}

fn tod(p: &Params) -> Result<ZooEntry> {
    let w = p.pot("W")?;
    let eta = [p.pot("eta_x")?, p.pot("eta_y")?, p.pot("eta_t")?];
    let (x, y, t) = (0, 1, 2);
    let r = 1.0 + v(x).powi(2) + v(y).powi(2);
    let vv = &w / (1.0 - v(t).powi(2));
    let al2 = 4.0 * &w / r.powi(2);
    let al = al2.sqrt();
    let be = (1.0 / &vv).sqrt();
    let sv = vv.sqrt();
    let bx = DomainBox::new(vec![-1.0, -1.0, -0.6, 0.0], vec![1.0, 1.0, 0.6, 1.0]);
    let phi = [eta[0].clone(), eta[1].clone(), eta[2].clone(), c(1.0)];
    let e0: [Expr; 4] =
        std::array::from_fn(|m| (if m == x { al.clone() } else { zero() }) + &be * &phi[m]);
    let e3: [Expr; 4] =
        std::array::from_fn(|m| 0.5 * ((if m == x { al.clone() } else { zero() }) - &be * &phi[m]));
    let fr = coframe(
        &bx,
        [
            e0,
            [zero(), -0.5 * &al, 0.5 * &sv, zero()],
            [zero(), al.clone(), sv.clone(), zero()],
            e3,
        ],
    );
    let mut omega: [[Expr; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| zero()));
    omega[x][y] = al2.clone();
    omega[y][x] = -&al2;
    for m in 0..4 {
        if m != t {
            omega[t][m] = &omega[t][m] + &phi[m];
            omega[m][t] = &omega[m][t] - &phi[m];
        }
    }
    let fr = orient_by_sd_form(fr, &omega)?;
    let mut e = base(Family::Tod, p, fr, bx)?;
    let q = w.diff(t);
    let uh = r.powi(2) / 4.0 * (q.diff2(x, x) + q.diff2(y, y))
        - ((1.0 - v(t).powi(2)) * q.diff(t)).diff(t);
    e.governing = vec![
        Governing::expr("uhwave", uh),
        Governing::expr("eta-curl", eta[1].diff(x) - eta[0].diff(y) - al2.diff(t)),
    ];
    e.expected = vec![Expected::Asd, Expected::ScalarFlat, Expected::KahlerClosed];
    e.kahler_form = Some(omega);
    e.killing = Some(KillingField {
        components: [zero(), zero(), zero(), c(1.0)],
        null: false,
        twisting: None,
    });
    Ok(e)
}

/// Kähler potential Ω(X) over (u, v, a, b), ζ = u + iv, p = a + ib,
/// X = v²|p|²/c with c = B/4.
pub fn ooguri_vafa_potential(a: f64, b: f64) -> Expr {
    let x = v(1).powi(2) * (v(2).powi(2) + v(3).powi(2)) / (b / 4.0);
    let s = (a * a + b * x).sqrt();
    2.0 * &s + a * ((&s - a) / (&s + a)).ln()
}

pub fn build_ooguri_vafa(a: f64, b: f64) -> Result<ZooEntry> {
    if !(a > 0.0 && b > 0.0) {
        return Err(GeomError::Invalid(format!(
            "A, B must be positive, got {a}, {b}"
        )));
    }
    Family::OoguriVafa.build(
        &Params::new()
            .with("Omega", ooguri_vafa_potential(a, b))
            .with_constant("A", a)
            .with_constant("B", b),
    )
}

/// J∂u = ∂v, J∂a = ∂b as a matrix J[μ][ν] = (J∂_ν)^μ.
fn ov_complex_structure() -> [[f64; 4]; 4] {
    let mut j = [[0.0; 4]; 4];
    j[1][0] = 1.0;
    j[0][1] = -1.0;
    j[3][2] = 1.0;
    j[2][3] = -1.0;
    j
}

fn ooguri_vafa(p: &Params) -> Result<ZooEntry> {
    let om = p.pot("Omega")?;
    let j = ov_complex_structure();
    let h: [[Expr; 4]; 4] = std::array::from_fn(|a| std::array::from_fn(|b| om.diff2(a, b)));
    // g = ½(H + JᵀHJ)
    let g: [[Expr; 4]; 4] = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut s = h[a][b].clone();
            for k in 0..4 {
                for l in 0..4 {
                    if j[k][a] != 0.0 && j[l][b] != 0.0 {
                        s = s + (j[k][a] * j[l][b]) * &h[k][l];
                    }
                }
            }
            0.5 * s
        })
    });
    // ω_ab = g_ac J^c_b
    let omega: [[Expr; 4]; 4] = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            (0..4)
                .filter(|&cc| j[cc][b] != 0.0)
                .fold(zero(), |acc, cc| acc + j[cc][b] * &g[a][cc])
        })
    });
    let bx = DomainBox::new(vec![-1.0, 0.5, 0.2, 0.2], vec![1.0, 2.0, 1.0, 1.0]);
    let rows = null_coframe_ldl(&g, &center(&bx))?;
    let fr = orient_by_sd_form(coframe(&bx, rows), &omega)?;
    let orient = fr.orientation_at(&fr.reference)?;
    let mut e = base(Family::OoguriVafa, p, fr, bx.clone())?;
    e.metric = MetricField::covariant(g.iter().map(|r| r.to_vec()).collect())
        .with_coords(&Family::OoguriVafa.coords())
        .with_domain(bx)
        .with_orientation(orient);
    // g_{ij̄} = ¼(Ω_{x_i x_j} + Ω_{y_i y_j}) + (i/4)(Ω_{x_i y_j} − Ω_{y_i x_j}), (x, y) = (u, v), (a, b)
    let (xs, ys) = ([0, 2], [1, 3]);
    let re = |i: usize, k: usize| 0.25 * (&h[xs[i]][xs[k]] + &h[ys[i]][ys[k]]);
    let im = |i: usize, k: usize| 0.25 * (&h[xs[i]][ys[k]] - &h[ys[i]][xs[k]]);
    let det = re(0, 0) * re(1, 1) - re(0, 1).powi(2) - im(0, 1).powi(2);
    e.governing = vec![Governing::expr("det+1", det + 1.0)];
    e.expected = vec![Expected::Asd, Expected::RicciFlat, Expected::KahlerClosed];
    e.kahler_form = Some(omega);
    e.killing = Some(KillingField {
        components: [c(1.0), zero(), zero(), zero()],
        null: false,
        twisting: None,
    });
    Ok(e)
}

/// A generic neutral metric from a randomly perturbed null coframe.
pub fn random_neutral(seed: u64) -> Result<ZooEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = Params::new();
    for k in 0..4 {
        for m in 0..4 {
            let (i, j, l) = (
                rng.gen_range(0..4),
                rng.gen_range(0..4),
                rng.gen_range(0..4),
            );
            let (r1, r2): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let base = if k == m { 1.0 } else { 0.0 };
            let e = base + 0.3 * (r1 * v(i) * v(j) + r2 * (v(l) + 0.5 * r1).sin());
            params = params.with(&format!("c{k}{m}"), e);
        }
    }
    let mut e = Family::Neutral.build(&params)?;
    e.name = format!("neutral-{seed}");
    Ok(e)
}

fn neutral(p: &Params) -> Result<ZooEntry> {
    let mut rows: [[Expr; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| zero()));
    for (k, row) in rows.iter_mut().enumerate() {
        for (m, e) in row.iter_mut().enumerate() {
            *e = p.pot(&format!("c{k}{m}"))?;
        }
    }
    let bx = DomainBox::cube(4, -0.5, 0.5);
    base(Family::Neutral, p, coframe(&bx, rows), bx)
}

fn named(e: Result<ZooEntry>, name: &str) -> Result<ZooEntry> {
    e.map(|mut e| {
        e.name = name.to_string();
        e
    })
}

/// Names of the registered entries, in registry order.
pub const ZOO_NAMES: &[&str] = &[
    "flat",
    "heavenly1",
    "heavenly1b",
    "heavenly2",
    "nullkahler",
    "nullkahler-einstein",
    "hyperhermitian",
    "sfk-product",
    "g0",
    "ppwave-quadratic",
    "ppwave-periodic",
    "ppwave-cubic",
    "nullkv-nontwisting",
    "nullkv-plebanski",
    "nullkv-twisting",
    "nullkv-twisting-flat",
    "twistor",
    "tod",
    "tod-g0",
    "ooguri-vafa",
];

/// Build a registered entry by name.
pub fn zoo_entry(name: &str) -> Result<ZooEntry> {
    let (x, y, z) = (v(1), v(2), v(3));
    let e = match name {
        "flat" => Family::Flat.build(&Params::new()),
        "heavenly1" => {
            // (x, y, w, z): wx + zy + G(x, z)
            let g = v(0).powi(3) * v(3).powi(2) / 6.0 + (v(0) + 0.5 * v(3)).sin();
            build_heavenly1(v(2) * v(0) + v(3) * v(1) + g)
        }
        "heavenly1b" => {
            let phi = v(2).powi(3) * v(1).powi(2) / 6.0 + (v(2) * v(1)).cos();
            build_heavenly1(v(2) * v(0) + v(3) * v(1) + phi)
        }
        "heavenly2" => {
            build_heavenly2_nullkahler(v(2).powi(3) * v(1).sin() + v(0).powi(2) * v(1).powi(3))
        }
        "nullkahler" => build_nullkahler_asd(v(2).powi(2) * (v(0) * v(1).powi(2) + v(1)) / 2.0),
        "nullkahler-einstein" => build_nullkahler_asd(v(2).powi(2) * v(0) / 2.0),
        "hyperhermitian" => {
            build_hyperhermitian(zero(), v(0).powi(3) * v(2) + v(0).powi(2) * v(2).sin())
        }
        "sfk-product" => {
            let (a, b) = (1.0 + v(0) * v(2), 1.0 + v(1) * v(3));
            build_sfk(a.ln() - b.ln(), 2.0 * v(0) * v(1) / (a * b))
        }
        "g0" => build_g0(),
        "ppwave-quadratic" => build_ppwave(x.powi(2) + y.powi(2)),
        "ppwave-periodic" => build_ppwave(x.sin() * y.sin()),
        "ppwave-cubic" => build_ppwave(x.powi(3) - 3.0 * &x * y.powi(2)),
        "nullkv-nontwisting" => build_null_kv_nontwisting(
            0.2 * &y,
            0.1 * &x,
            0.05 * &x * &y,
            0.3 * &x + 0.1 * y.powi(2),
            x.powi(2) - &y,
            0.2 * &x * &y,
        ),
        "nullkv-plebanski" => {
            build_null_kv_nontwisting(zero(), zero(), zero(), zero(), x.sin() + y.powi(2), zero())
        }
        "nullkv-twisting" => build_null_kv_twisting(
            [0.1 * &y, 0.2 * &x, 0.1 * x.powi(2), 0.05 * &y],
            z.powi(2) / 2.0 + 0.3 * &x * &z + 0.2 * y.powi(2),
        ),
        "nullkv-twisting-flat" => {
            // G = z²/2 − zC with C_y = f = 0.3
            build_null_kv_twisting(
                [zero(), zero(), zero(), zero()],
                z.powi(2) / 2.0 - 0.3 * &z * &y,
            )
        }
        "twistor" => build_twistor_example(0.3 + 0.2 * v(1), 0.1 * v(0).powi(2)),
        "tod" => build_tod_sfk(1.0 + 0.5 * v(2), tod_eta0().map(|e| 0.5 * e)),
        "tod-g0" => build_tod_sfk(c(1.0), [zero(), zero(), zero()]),
        "ooguri-vafa" => build_ooguri_vafa(1.0, 1.0),
        other => return Err(GeomError::Unknown(other.to_string())),
    };
    named(e, name)
}

/// Every registered entry.
pub fn zoo_registry() -> Result<Vec<ZooEntry>> {
    ZOO_NAMES.iter().map(|n| zoo_entry(n)).collect()
}

/// Least-squares fit f ≈ P·x + Q·y + R with constant P, Q, R over the
/// samples of a null-Kähler Θ (chart (w, z, x, y)); returns (P, Q, R) and
/// the worst fit residual.
pub fn einstein_branch_fit(
    theta: &Expr,
    samples: &[Vec<f64>],
    tolerance: f64,
) -> Result<([f64; 3], crate::report::ResidualReport)> {
    use nalgebra::{DMatrix, DVector};
    let f = nullkahler_f(theta);
    let vals: Vec<f64> = samples.iter().map(|p| f.eval(p)).collect::<Result<_>>()?;
    let a = DMatrix::from_fn(samples.len(), 3, |i, j| match j {
        0 => samples[i][2],
        1 => samples[i][3],
        _ => 1.0,
    });
    let b = DVector::from_vec(vals);
    let (x, _) = crate::geometry::linalg::lstsq(&a, &b)?;
    let r = &b - &a * &x;
    let rep =
        crate::report::ResidualReport::from_residuals("einstein-branch", r.as_slice(), tolerance);
    Ok(([x[0], x[1], x[2]], rep))
}
