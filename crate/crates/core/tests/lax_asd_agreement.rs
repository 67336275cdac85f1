use asd_core::geometry::asd_residual;
use asd_core::jets::parse_expr;
use asd_core::spinor::*;

fn frame(src: [[&str; 4]; 4]) -> TetradFrame {
    let v = ["w", "z", "x", "y"];
    TetradFrame::from_coframe(
        std::array::from_fn(|k| std::array::from_fn(|m| parse_expr(src[k][m], &v).unwrap())),
        vec![0.1, 0.2, 0.3, 0.4],
    )
}

fn samples() -> Vec<Vec<f64>> {
    (0..5)
        .map(|i| {
            vec![
                0.3 + 0.1 * i as f64,
                -0.2 + 0.07 * i as f64,
                0.5 - 0.05 * i as f64,
                0.1 * i as f64,
            ]
        })
        .collect()
}

fn verdicts(f: &TetradFrame) -> (bool, bool) {
    let g = f.metric().unwrap();
    let asd = asd_residual(&g, &samples(), 1e-8);
    let lax = lax_integrability(f, &samples(), &default_lambdas(7), 1e-8);
    (asd.passed(), lax.passed())
}

// null-Kähler coframe with Θ = x²(wz² + z)/2, for which □f = 0
const NK: [[&str; 4]; 4] = [
    ["1", "0", "0", "0"],
    ["0", "(w*z^2+z)/2", "0", "-0.5"],
    ["0", "1", "0", "0"],
    ["0", "0", "0.5", "0"],
];

#[test]
fn null_kahler_frame_is_integrable() {
    assert_eq!(verdicts(&frame(NK)), (true, true));
}

#[test]
fn flipped_pp_wave_orientation_fails_both() {
    // g = dφ dy − dz dx − Q dy² with the primed and unprimed dyads exchanged
    let q = "(z^2*x+x^3)";
    let pp = [
        ["0", "0", "1", "0"],
        ["0", "0", "0", "0.5"],
        ["0", "1", "0", "0"],
        ["0.5", "0", &format!("-0.5*{q}"), "0"],
    ];
    assert_eq!(verdicts(&frame(pp)), (false, false));
    let pp = [
        ["0", "0", "1", "0"],
        ["0", "1", "0", "0"],
        ["0", "0", "0", "0.5"],
        ["0.5", "0", &format!("-0.5*{q}"), "0"],
    ];
    assert_eq!(verdicts(&frame(pp)), (true, true));
}

#[test]
fn generic_frame_fails_both() {
    let r = [
        ["1+0.3*z*x", "0.1*w", "0", "0.2*y^2"],
        ["0", "1", "0.4*w*x", "0"],
        ["0.1*z", "0", "1+0.2*w^2", "0.3"],
        ["0", "0.2*x", "0", "1+0.1*z*y"],
    ];
    assert_eq!(verdicts(&frame(r)), (false, false));
}

#[test]
fn verdict_is_invariant_under_primed_rotations() {
    for (i, f) in [frame(NK)].into_iter().enumerate() {
        for j in 0..10 {
            let t = (i * 10 + j) as f64;
            let lam = sl2(
                0.3 * (t * 1.3).sin(),
                0.2 * (t * 0.7).cos(),
                0.25 * (t * 2.1).sin(),
            );
            let rot = f.rotate_primed(&lam).unwrap();
            assert_eq!(verdicts(&rot), (true, true));
        }
    }
}

#[test]
fn commutator_has_low_degree_in_lambda() {
    let f = frame(NK);
    for p in samples() {
        let c = commutator_poly(&lax_pair(&f, &p).unwrap());
        for comp in c.iter() {
            for (i, x) in comp.0.iter().enumerate() {
                if i > 3 {
                    assert!(x.abs() < 1e-10);
                }
            }
        }
    }
}
