use super::*;
use crate::geometry::{asd_residual, curvature_pack};
use crate::jets::parse_expr;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn xyt(s: &str) -> Expr {
    parse_expr(s, &["x", "y", "t"]).unwrap()
}

fn tod_u() -> Expr {
    xyt("ln(4*(1-t^2)/(1+x^2+y^2)^2)")
}

fn toda_box() -> DomainBox {
    DomainBox::new(vec![-1.0, -1.0, -0.8], vec![1.0, 1.0, -0.1])
}

/// V = u_t, η = 2η₀.
fn toda_data() -> (EWStructure, MonopoleData) {
    let ew = toda_ew(&tod_u()).with_domain(toda_box());
    let m = MonopoleData::new(tod_u().diff(2), crate::zoo::tod_eta0().map(|e| 2.0 * e));
    (ew, m)
}

/// H = −x²/(2t), W = −x/t: V = W_x, η = −W_x dy − 2W_y dt.
fn dkp_data() -> (EWStructure, MonopoleData) {
    let ew = dkp_ew(&xyt("-x/t"))
        .with_domain(DomainBox::new(vec![-1.0, -1.0, -2.0], vec![1.0, 1.0, -0.5]));
    let w = xyt("-x/t");
    let eta = [Expr::zero(), -w.diff(0), -2.0 * w.diff(1)];
    (ew, MonopoleData::new(w.diff(0), eta))
}

fn phi_axis() -> [Expr; 4] {
    [Expr::zero(), Expr::zero(), Expr::zero(), Expr::one()]
}

fn lift_samples(g: &MetricField, n: usize) -> Vec<Vec<f64>> {
    halton_box(&g.domain, n, 3, |p| g.admissible::<4>(p))
}

#[test]
fn flat_structure() {
    let ew = EWStructure::flat().with_domain(DomainBox::cube(3, -1.0, 1.0));
    let s = ew.samples(10, 1);
    assert_eq!(ew_residual(&ew, &s, 1e-14).max_abs, 0.0);
    let m = MonopoleData::new(
        Expr::constant(2.0),
        [Expr::zero(), Expr::zero(), Expr::zero()],
    );
    assert_eq!(monopole_residual(&ew, &m, &s, 1e-14).max_abs, 0.0);
}

#[test]
fn weyl_connection_preserves_the_conformal_class() {
    let cases = [
        toda_data().0,
        dkp_data().0,
        hypercr_ew(&xyt("-y + 0.3*x*t"), &xyt("x*y + sin(t)"))
            .with_domain(DomainBox::cube(3, -1.0, 1.0)),
        toda_data().0.rescaled(&xyt("0.3*sin(x+2*y) + 0.2*t")),
    ];
    for ew in cases {
        let s = ew.samples(15, 4);
        let r = metricity_residual(&ew, &s, 1e-9);
        assert!(r.passed(), "{r:?}");
    }
}

#[test]
fn integrable_backgrounds_are_einstein_weyl() {
    let (toda, _) = toda_data();
    let (dkp, _) = dkp_data();
    let hcr = hypercr_ew(&xyt("-y"), &xyt("x + y^2/2")).with_domain(DomainBox::cube(3, -1.0, 1.0));
    for ew in [toda, dkp, hcr] {
        let r = ew_residual(&ew, &ew.samples(30, 2), 1e-9);
        assert!(r.passed(), "{r:?}");
    }
    // a non-solution of Toda is not EW
    let bad = toda_ew(&xyt("x^2 + t*y")).with_domain(toda_box());
    assert!(!ew_residual(&bad, &bad.samples(10, 2), 1e-6).passed());
}

/// Jets of h and ω by central differences of plain values.
struct FdEw<'a>(&'a EWStructure);

impl EwSource for FdEw<'_> {
    fn ew_jets(&self, p: &[f64]) -> Result<EwJets> {
        let h = 2e-4;
        let vals = |q: &[f64]| -> Result<([[f64; 3]; 3], [f64; 3])> {
            let om: Vec<f64> = self
                .0
                .omega
                .iter()
                .map(|e| e.eval(q))
                .collect::<Result<_>>()?;
            Ok((self.0.h.values::<3>(q)?, [om[0], om[1], om[2]]))
        };
        let shift = |d: &[(usize, f64)]| {
            let mut q = p.to_vec();
            for &(i, s) in d {
                q[i] += s * h;
            }
            q
        };
        let (h0, o0) = vals(p)?;
        let mut hj = [[Jet2::constant(0.0); 3]; 3];
        let mut oj = [Dual::constant(0.0); 3];
        for a in 0..3 {
            for b in 0..3 {
                hj[a][b].value = h0[a][b];
            }
            oj[a].value = o0[a];
        }
        for i in 0..3 {
            let (hp, op) = vals(&shift(&[(i, 1.0)]))?;
            let (hm, om) = vals(&shift(&[(i, -1.0)]))?;
            for a in 0..3 {
                for b in 0..3 {
                    hj[a][b].grad[i] = (hp[a][b] - hm[a][b]) / (2.0 * h);
                    hj[a][b].hess[i][i] = (hp[a][b] - 2.0 * h0[a][b] + hm[a][b]) / (h * h);
                }
                oj[a].grad[i] = (op[a] - om[a]) / (2.0 * h);
            }
            for k in (i + 1)..3 {
                let pp = vals(&shift(&[(i, 1.0), (k, 1.0)]))?.0;
                let pm = vals(&shift(&[(i, 1.0), (k, -1.0)]))?.0;
                let mp = vals(&shift(&[(i, -1.0), (k, 1.0)]))?.0;
                let mm = vals(&shift(&[(i, -1.0), (k, -1.0)]))?.0;
                for a in 0..3 {
                    for b in 0..3 {
                        let v = (pp[a][b] - pm[a][b] - mp[a][b] + mm[a][b]) / (4.0 * h * h);
                        hj[a][b].hess[i][k] = v;
                        hj[a][b].hess[k][i] = v;
                    }
                }
            }
        }
        Ok(EwJets { h: hj, omega: oj })
    }

    fn orientation(&self) -> f64 {
        self.0.orientation()
    }
}

#[test]
fn dkp_einstein_weyl_cross_checked_by_finite_differences() {
    let (ew, _) = dkp_data();
    let s = ew.samples(10, 5);
    assert!(ew_residual(&FdEw(&ew), &s, 1e-5).passed());
    // and the detector still fires under finite differences
    let bad = dkp_ew(&xyt("x*y - t")).with_domain(ew.h.domain.clone());
    for p in &s {
        let a = weyl_point(&bad, p).unwrap().ew_defect;
        let b = weyl_point(&FdEw(&bad), p).unwrap().ew_defect;
        assert!((a - b).abs() < 1e-4 * (1.0 + a), "{a} {b}");
    }
}

#[test]
fn ew_defect_is_gauge_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (good, _) = toda_data();
    let bad = toda_ew(&xyt("x^2 + t*y")).with_domain(toda_box());
    for _ in 0..10 {
        let (a, b, c, d): (f64, f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen(), rng.gen());
        // ln φ for φ = exp(0.5 sin(..)) · (1.5 + cos(..)) > 0
        let f = 0.5 * xyt(&format!("sin({a}*x + {b}*y - {c}*t)"))
            + xyt(&format!("ln(1.5 + cos({d}*x*t + y))"));
        for ew in [&good, &bad] {
            let re = ew.rescaled(&f);
            let s = ew.samples(6, 9);
            for p in &s {
                let x = weyl_point(ew, p).unwrap();
                let y = weyl_point(&re, p).unwrap();
                assert!((x.ew_defect - y.ew_defect).abs() < 1e-9 * (1.0 + x.ew_defect));
            }
            assert_eq!(
                ew_residual(ew, &s, 1e-8).verdict,
                ew_residual(&re, &s, 1e-8).verdict
            );
        }
    }
}

#[test]
fn toda_special_monopole() {
    let (ew, m) = toda_data();
    let s = ew.samples(20, 3);
    assert!(monopole_residual(&ew, &m, &s, 1e-10).passed());
    let integrated = MonopoleData::integrated(m.v.clone(), [-0.9, -0.9, -0.7]);
    let r = monopole_residual(&ew, &integrated, &s[..8], 1e-6);
    assert!(r.passed(), "{r:?}");
    let bad = MonopoleData::new(xyt("1 + x*y*t"), [xyt("sin(y)"), xyt("x^2"), Expr::zero()]);
    assert!(!monopole_residual(&ew, &bad, &s, 1e-3).passed());
}

#[test]
fn lift_of_flat_data_is_flat() {
    let ew = EWStructure::flat().with_domain(DomainBox::cube(3, -1.0, 1.0));
    let m = MonopoleData::new(Expr::one(), [Expr::zero(), Expr::zero(), Expr::zero()]);
    let g = jones_tod_lift(&ew, &m).unwrap();
    for p in lift_samples(&g, 10) {
        assert_eq!(curvature_pack::<4>(&g, &p).unwrap().riemann_max(), 0.0);
    }
}

#[test]
fn lifts_are_asd_and_ricci_flat_in_the_right_gauge() {
    for (ew, m) in [toda_data(), dkp_data()] {
        let s3 = ew.samples(20, 6);
        assert!(ew_residual(&ew, &s3, 1e-9).passed());
        assert!(monopole_residual(&ew, &m, &s3, 1e-9).passed());
        let g = jones_tod_lift(&ew, &m).unwrap();
        let s = lift_samples(&g, 30);
        let r = asd_residual(&g, &s, 1e-8);
        assert!(r.passed(), "{r:?}");
        let kahler = g.conformal(&(-m.v.ln()));
        for p in &s {
            let c = curvature_pack::<4>(&kahler, p).unwrap();
            assert!(c.ricci_max() < 1e-7, "{}", c.ricci_max());
        }
    }
}

#[test]
fn lift_rejects_negative_v() {
    let ew = EWStructure::flat().with_domain(DomainBox::cube(3, -1.0, 1.0));
    let m = MonopoleData::new(
        Expr::constant(-1.0),
        [Expr::zero(), Expr::zero(), Expr::zero()],
    );
    assert!(jones_tod_lift(&ew, &m).is_err());
}

#[test]
fn flat_lift_reduces_to_minus_h() {
    let ew = EWStructure::flat().with_domain(DomainBox::cube(3, -1.0, 1.0));
    let m = MonopoleData::new(Expr::one(), [Expr::zero(), Expr::zero(), Expr::zero()]);
    let g = jones_tod_lift(&ew, &m).unwrap();
    let red = jones_tod_reduce(&g, &phi_axis(), 0.0, &[0.0; 4]).unwrap();
    let j = red.ew_jets(&[0.2, -0.3, 0.1]).unwrap();
    let want = [1.0, 1.0, -1.0];
    for a in 0..3 {
        for b in 0..3 {
            assert_eq!(j.h[a][b].value, if a == b { -want[a] } else { 0.0 });
        }
        assert_eq!(j.omega[a].value, 0.0);
    }
}

#[test]
fn round_trips_recover_the_weyl_connection() {
    // generic Toda monopole W = 1 + 0.3t
    let generic = MonopoleData::new(
        xyt("(1 + 0.3*t)/(1 - t^2)"),
        crate::zoo::tod_eta0().map(|e| -0.3 * e),
    );
    let cases = [toda_data(), dkp_data(), (toda_data().0, generic)];
    for (ew, m) in cases {
        let s3 = ew.samples(20, 8);
        assert!(monopole_residual(&ew, &m, &s3, 1e-9).passed());
        let g = jones_tod_lift(&ew, &m).unwrap();
        let red = jones_tod_reduce(&g, &phi_axis(), 0.3, &lift_samples(&g, 1)[0]).unwrap();
        let gap = connection_gap(&ew, &red, &s3, 1e-9);
        assert!(gap.passed(), "{gap:?}");
        assert!(ew_residual(&red, &s3, 1e-8).passed());
        // h_red = −V² h
        let p = &s3[0];
        let j = red.ew_jets(p).unwrap();
        let h = ew.h.values::<3>(p).unwrap();
        let v = m.v.eval(p).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert!((j.h[a][b].value + v * v * h[a][b]).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn reduction_rejects_null_and_non_coordinate_fields() {
    let e = crate::zoo::zoo_entry("ppwave-quadratic").unwrap();
    let p = e.samples(1, 1).remove(0);
    let k = e.killing.as_ref().unwrap();
    assert!(matches!(
        jones_tod_reduce(&e.metric, &k.components, 0.0, &p),
        Err(GeomError::Degenerate(_))
    ));
    let rot = [-Expr::var(1), Expr::var(0), Expr::zero(), Expr::zero()];
    assert!(jones_tod_reduce(&e.metric, &rot, 0.0, &p).is_err());
}
