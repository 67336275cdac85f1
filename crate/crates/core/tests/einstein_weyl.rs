use asd_core::einstein_weyl::{
    ew_residual, integrable_residual_at, jones_tod_reduce, metricity_residual,
    system_residual_jets, IntegrableFields, IntegrableKind,
};
use asd_core::jets::parse_expr;
use asd_core::zoo::zoo_registry;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn non_null_symmetries_reduce_to_einstein_weyl() {
    let mut seen = Vec::new();
    for e in zoo_registry().unwrap() {
        let Some(k) = e.killing.as_ref().filter(|k| !k.null) else {
            continue;
        };
        let reference = e.samples(1, 3).remove(0);
        let kk = k.components.iter().position(|c| !c.is_zero()).unwrap();
        let red = jones_tod_reduce(&e.metric, &k.components, reference[kk], &reference).unwrap();
        let s = red.samples(30, 5);
        let ew = ew_residual(&red, &s, 1e-7);
        let met = metricity_residual(&red, &s, 1e-9);
        println!(
            "{:<14} ew {:.2e} metricity {:.2e}",
            e.name, ew.max_abs, met.max_abs
        );
        assert!(ew.passed(), "{}: {ew:?}", e.name);
        assert!(met.passed(), "{}: {met:?}", e.name);
        seen.push(e.name.clone());
    }
    assert!(seen.len() >= 3, "{seen:?}");
}

fn random_field(rng: &mut ChaCha8Rng) -> String {
    let mut c = || rng.gen_range(-1.0..1.0);
    format!(
        "{:.6}*sin({:.6}*x + {:.6}*y) + {:.6}*x*t + {:.6}*exp({:.6}*y*t) + {:.6}*x^2*y",
        c(),
        c(),
        c(),
        c(),
        c(),
        c(),
        c()
    )
}

#[test]
fn interpolating_system_degenerates_to_hypercr_and_dkp() {
    let vars = ["x", "y", "t"];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let u = parse_expr(&random_field(&mut rng), &vars).unwrap();
        let w = parse_expr(&random_field(&mut rng), &vars).unwrap();
        let f = IntegrableFields::uw(u.clone(), w);
        let neg = IntegrableFields::u(-u);
        for _ in 0..5 {
            let p: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let hcr = integrable_residual_at(IntegrableKind::HyperCr, &f, 0.0, 0.0, &p).unwrap();
            let int =
                integrable_residual_at(IntegrableKind::Interpolating, &f, 0.0, -1.0, &p).unwrap();
            for (a, b) in hcr.iter().zip(&int) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
            // (b, c) = (1, 0): eliminating w gives dKP for −u
            let [r1, r2] =
                system_residual_jets(IntegrableKind::Interpolating, &f, 1.0, 0.0, &p).unwrap();
            let curl = r2.grad[0] - r1.grad[1];
            let dkp = integrable_residual_at(IntegrableKind::Dkp, &neg, 0.0, 0.0, &p).unwrap()[0];
            assert!(
                (dkp + curl).abs() <= 1e-12 * (1.0 + dkp.abs()),
                "{dkp} {curl}"
            );
        }
    }
}
