use asd_core::einstein_weyl::ew_residual;
use asd_core::einstein_weyl::presets::tod_toda;
use asd_core::geometry::{classify_quartic, PetrovType};
use asd_core::jets::{parse_expr, Jet2, Scalar};
use asd_core::spinor::sl2;
use asd_core::topology::{
    atiyah_check, atiyah_failure, direct_sum, hirzebruch_hopf_check, integer_det, represent,
    Admissibility, FourManifoldTopology,
};
use asd_core::xray::{john_transform, Integrand3D, LineParam, QuadOptions};
use proptest::prelude::*;

fn jet() -> impl Strategy<Value = Jet2<3>> {
    (
        -2.0..2.0f64,
        prop::array::uniform3(-2.0..2.0f64),
        prop::array::uniform6(-2.0..2.0f64),
    )
        .prop_map(|(v, g, h)| {
            let hess = [[h[0], h[1], h[2]], [h[1], h[3], h[4]], [h[2], h[4], h[5]]];
            Jet2 {
                value: v,
                grad: g,
                hess,
            }
        })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn jet_product_rule(a in jet(), b in jet()) {
        let p = a * b;
        prop_assert!(close(p.value, a.value * b.value));
        for i in 0..3 {
            prop_assert!(close(p.grad[i], a.grad[i] * b.value + a.value * b.grad[i]));
            for j in 0..3 {
                let want = a.hess[i][j] * b.value
                    + a.grad[i] * b.grad[j]
                    + a.grad[j] * b.grad[i]
                    + a.value * b.hess[i][j];
                prop_assert!(close(p.hess[i][j], want));
            }
        }
    }

    #[test]
    fn jet_chain_rule(a in jet()) {
        // (sin a)'' = cos a · a'' − sin a · a' a'
        let s = a.sin();
        let (c, sn) = (a.value.cos(), a.value.sin());
        for i in 0..3 {
            prop_assert!(close(s.grad[i], c * a.grad[i]));
            for j in 0..3 {
                prop_assert!(close(s.hess[i][j], c * a.hess[i][j] - sn * a.grad[i] * a.grad[j]));
            }
        }
        let e = a.exp();
        let q = (a / e) * e;
        prop_assert!(close(q.value, a.value));
        for i in 0..3 {
            prop_assert!(close(q.grad[i], a.grad[i]));
        }
    }
}

fn block() -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop_oneof![
        Just(vec![vec![1]]),
        Just(vec![vec![-1]]),
        Just(vec![vec![0, 1], vec![1, 0]]),
    ]
}

fn topology() -> impl Strategy<Value = FourManifoldTopology> {
    prop::collection::vec(block(), 0..4).prop_map(|bs| {
        let form = direct_sum(&bs);
        let n = form.len();
        let plus = bs
            .iter()
            .map(|b| if b.len() == 2 || b[0][0] == 1 { 1 } else { 0 })
            .sum::<i64>();
        let tau = 2 * plus - n as i64;
        FourManifoldTopology::new("random", 2 + n as i64, tau, form).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn witnesses_represent_their_targets(t in topology(), target in -12i64..12, r in 1i64..3) {
        let s = represent(&t, target, r);
        if let Some(w) = &s.witness {
            prop_assert_eq!(t.mu(w), target);
            prop_assert!(w.iter().all(|x| x.abs() <= r));
        }
        prop_assert!(!(s.witness.is_some() && s.certificate.is_some()));
    }

    #[test]
    fn larger_radius_never_loses_a_verdict(t in topology(), r in 1i64..3) {
        let a = hirzebruch_hopf_check(&t, r).unwrap().verdict;
        let b = hirzebruch_hopf_check(&t, r + 1).unwrap().verdict;
        if a != Admissibility::Inconclusive {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn determinant_is_multiplicative(a in topology(), b in topology()) {
        let s = direct_sum(&[a.form.clone(), b.form.clone()]);
        prop_assert_eq!(integer_det(&s), integer_det(&a.form) * integer_det(&b.form));
    }

    #[test]
    fn atiyah_reason_matches_check(e in -50i64..50, s in -50i64..50) {
        prop_assert_eq!(atiyah_failure(e, s).is_none(), atiyah_check(e, s));
    }
}

fn line() -> impl Strategy<Value = LineParam> {
    prop::array::uniform4(-1.0..1.0f64).prop_map(LineParam::from_array)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn xray_is_linear(l in line(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let f = Integrand3D::named("gaussian").unwrap();
        let g = Integrand3D::named("gaussian-offset").unwrap();
        let sum = Integrand3D::new(a * &f.f + b * &g.f, 7.0, 0.0);
        let q = QuadOptions::default();
        let lhs = john_transform(&sum, &l, &q).unwrap().value;
        let rhs = a * john_transform(&f, &l, &q).unwrap().value
            + b * john_transform(&g, &l, &q).unwrap().value;
        prop_assert!((lhs - rhs).abs() < 1e-11, "{} {}", lhs, rhs);
    }

    #[test]
    fn xray_translation_covariance(l in line(), shift in prop::array::uniform3(-0.5..0.5f64)) {
        let f = Integrand3D::named("gaussian").unwrap();
        let g = f.translated(shift);
        let [a, b, c] = shift;
        let moved = LineParam::new(l.x, l.y, l.w - l.y * c + b, l.z + l.x * c - a);
        let q = QuadOptions::default();
        let lhs = john_transform(&g, &l, &q).unwrap().value;
        let rhs = john_transform(&f, &moved, &q).unwrap().value;
        prop_assert!((lhs - rhs).abs() < 1e-11, "{} {}", lhs, rhs);
    }

    #[test]
    fn einstein_weyl_is_gauge_invariant(a in -0.5..0.5f64, b in -0.5..0.5f64, c in -0.5..0.5f64) {
        let (ew, _) = tod_toda();
        let src = format!("{a}*x + {b}*y*t + {c}*sin(x - t)");
        let f = parse_expr(&src, &["x", "y", "t"]).unwrap();
        let g = ew.rescaled(&f);
        let r = ew_residual(&g, &g.samples(8, 2), 1e-8);
        prop_assert!(r.passed(), "{:?}", r);
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

const BINOM4: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];

/// ψ of the quartic with the given roots after ζ ↦ (aζ + b)/(cζ + d).
fn moved_psi(roots: &[f64], m: [[f64; 2]; 2]) -> [f64; 5] {
    let mut coeffs = vec![1.0];
    for r in roots {
        coeffs = poly_mul(&coeffs, &[-r, 1.0]);
    }
    let (num, den) = ([m[0][1], m[0][0]], [m[1][1], m[1][0]]);
    let mut out = [0.0; 5];
    for (k, ck) in coeffs.iter().enumerate() {
        let mut p = vec![*ck];
        for _ in 0..k {
            p = poly_mul(&p, &num);
        }
        for _ in k..4 {
            p = poly_mul(&p, &den);
        }
        for (i, v) in p.iter().enumerate() {
            out[i] += v;
        }
    }
    std::array::from_fn(|k| out[k] / BINOM4[k])
}

proptest! {
    #[test]
    fn petrov_type_is_moebius_invariant(
        base in -1.0..1.0f64,
        gaps in prop::array::uniform3(0.5..1.5f64),
        pattern in 0usize..5,
        m in prop::array::uniform3(-0.7..0.7f64),
    ) {
        let r: Vec<f64> = [0.0, gaps[0], gaps[0] + gaps[1], gaps[0] + gaps[1] + gaps[2]]
            .iter()
            .map(|g| base + g)
            .collect();
        let (roots, want) = match pattern {
            0 => (vec![r[0], r[1], r[2], r[3]], PetrovType::I),
            1 => (vec![r[0], r[0], r[1], r[2]], PetrovType::II),
            2 => (vec![r[0], r[0], r[1], r[1]], PetrovType::D),
            3 => (vec![r[0], r[0], r[0], r[1]], PetrovType::III),
            _ => (vec![r[0]; 4], PetrovType::N),
        };
        let q = classify_quartic(moved_psi(&roots, sl2(m[0], m[1], m[2])), 1e-8).unwrap();
        prop_assert_eq!(q.petrov_type, want);
    }
}
