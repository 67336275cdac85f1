use asd_core::geometry::curvature_pack;
use asd_core::spinor::{default_lambdas, lax_integrability};
use asd_core::zoo::{zoo_entry, zoo_registry, Tolerances, ZOO_NAMES};

#[test]
fn every_entry_satisfies_its_expected_verdicts() {
    let tol = Tolerances::default();
    let mut bad = Vec::new();
    for e in zoo_registry().unwrap() {
        let s = e.samples(50, 7);
        assert_eq!(s.len(), 50, "{}", e.name);
        let r = e.evaluate(&s, &tol);
        for rep in r.governing.iter().chain(r.verdicts.iter()) {
            println!(
                "{:<22} {:<20} {:>10.3e} {:?}",
                e.name, rep.name, rep.max_abs, rep.verdict
            );
        }
        if !r.consistent {
            bad.push(e.name.clone());
        }
    }
    assert!(bad.is_empty(), "inconsistent entries: {bad:?}");
}

#[test]
fn lax_and_asd_verdicts_agree_on_the_zoo() {
    let lams = default_lambdas(3);
    for e in zoo_registry().unwrap() {
        let s = e.samples(12, 11);
        let asd = e.check(asd_core::zoo::Expected::Asd, &s, &Tolerances::default());
        let lax = lax_integrability(e.frame.as_ref().unwrap(), &s, &lams, 1e-8);
        println!(
            "{:<22} asd {:.2e} lax {:.2e}",
            e.name, asd.max_abs, lax.max_abs
        );
        assert_eq!(asd.passed(), lax.passed(), "{}", e.name);
    }
}

#[test]
fn frames_reproduce_metrics() {
    for name in ZOO_NAMES {
        let e = zoo_entry(name).unwrap();
        let s = e.samples(10, 1);
        let r = asd_core::spinor::verify_tetrad(&e.metric, e.frame.as_ref().unwrap(), &s, 1e-10);
        assert!(r.passed(), "{name}: {r:?}");
    }
}

#[test]
fn killing_fields() {
    for e in zoo_registry().unwrap() {
        if e.killing.is_none() {
            continue;
        }
        let s = e.samples(30, 5);
        for r in e.killing_reports(&s, 1e-8).unwrap() {
            println!(
                "{:<22} {:<18} {:.3e} {:?}",
                e.name, r.name, r.max_abs, r.note
            );
            assert!(r.passed(), "{}: {r:?}", e.name);
        }
    }
}

#[test]
fn g0_is_conformally_flat() {
    let e = zoo_entry("g0").unwrap();
    for p in e.samples(20, 2) {
        let c = curvature_pack::<4>(&e.metric, &p).unwrap();
        assert!(c.weyl_max() < 1e-9);
        assert!(c.riemann_max() > 0.1);
    }
}

#[test]
fn perturbing_any_potential_flips_a_verdict() {
    let tol = Tolerances::default();
    for e in zoo_registry().unwrap() {
        for pot in e.params.potentials.keys() {
            let pe = e.perturbed(pot, 1e-2).unwrap();
            let s = pe.samples(50, 9);
            let r = pe.evaluate(&s, &tol);
            let aux = e.family.auxiliary_potentials().contains(&pot.as_str());
            let pool = if aux { &r.governing } else { &r.verdicts };
            let failed: Vec<_> = pool
                .iter()
                .filter(|v| !v.passed())
                .map(|v| v.name.clone())
                .collect();
            println!("{:<22} {:<8} fails {:?}", e.name, pot, failed);
            assert!(!failed.is_empty(), "{} {pot}", e.name);
        }
    }
}
