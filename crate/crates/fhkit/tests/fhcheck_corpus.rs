use std::f64::consts::PI;

use fhkit::corpus;
use fhkit::fhcheck::{structural_classify, witness_search, StructuralTag, Verdict, WitnessAxis};
use fhkit::{Direction, PhaseFamily, TrigPoly};
use proptest::prelude::*;

fn reevaluate(f: &PhaseFamily, report: &fhkit::fhcheck::FHReport) {
    for w in &report.witnesses {
        let psi = f.contract(&Direction::new(w.omega.clone()).unwrap()).unwrap();
        let order = match w.axis {
            WitnessAxis::Ss => (2, 0),
            WitnessAxis::Tt => (0, 2),
        };
        let second = psi.derive(order).unwrap().eval2(w.x, w.y);
        let st = psi.derive((1, 1)).unwrap().eval2(w.x, w.y);
        assert!(second.abs() <= w.tau_zero, "{w:?}: second derivative {second}");
        assert!(st.abs() >= w.tau_st, "{w:?}: mixed {st}");
        assert!((st - w.psi_st).abs() <= 1e-12 * st.abs().max(1.0));
    }
}

#[test]
fn product_family_witness() {
    let f = corpus::product_family();
    let r = witness_search(&f, 512, 2).unwrap();
    assert_eq!(r.verdict, Verdict::Violated);
    let near = r
        .witnesses
        .iter()
        .find(|w| w.x.abs() < 1e-6 && (w.y - 0.25).abs() < 1e-6)
        .expect("witness near (0, 1/4)");
    assert!((near.psi_st + 4.0 * PI * PI).abs() < 1e-6, "{}", near.psi_st);
    reevaluate(&f, &r);
}

#[test]
fn factorisable_families_have_no_witness() {
    for f in [corpus::split_family(), corpus::composite_family(), corpus::pure_character_family()] {
        let r = witness_search(&f, 512, 2).unwrap();
        assert_eq!(r.verdict, Verdict::NoWitnessFound);
        assert_eq!(r.total_witnesses, 0);
        assert_eq!(r.resolution.grid_n, 512);
    }
    // any nonconstant split phase
    let g = TrigPoly::from_terms(2, [([3, 0], 0.2, -1.0), ([0, 2], 0.7, 0.1), ([0, 5], 0.0, 0.3)]);
    let r = witness_search(&PhaseFamily::scalar(g).unwrap(), 256, 2).unwrap();
    assert_eq!(r.verdict, Verdict::NoWitnessFound);
}

#[test]
fn reports_are_sound_and_grid_monotone() {
    for (name, f) in corpus::canonical_families() {
        let coarse = witness_search(&f, 128, 6).unwrap();
        let fine = witness_search(&f, 256, 6).unwrap();
        reevaluate(&f, &coarse);
        reevaluate(&f, &fine);
        if coarse.verdict == Verdict::Violated {
            assert_eq!(fine.verdict, Verdict::Violated, "{name}");
        }
    }
}

#[test]
fn vector_family_directions() {
    let f = corpus::vector_product_family();
    let r = witness_search(&f, 128, 8).unwrap();
    assert_eq!(r.verdict, Verdict::Violated);
    assert_eq!(r.resolution.omega_samples, 8);
    assert!(r.witnesses.iter().all(|w| w.omega.len() == 2));
    reevaluate(&f, &r);
}

#[test]
fn scale_invariance() {
    let f = corpus::product_family();
    let g = PhaseFamily::scalar(f.components[0].scale(1e-3)).unwrap();
    let a = witness_search(&f, 128, 2).unwrap();
    let b = witness_search(&g, 128, 2).unwrap();
    assert_eq!(a.verdict, b.verdict);
    assert_eq!(a.total_witnesses, b.total_witnesses);
}

#[test]
fn classification_examples() {
    assert_eq!(structural_classify(&corpus::split_family()).unwrap(), StructuralTag::Split);
    assert_eq!(structural_classify(&corpus::composite_family()).unwrap(), StructuralTag::Composite);
    assert_eq!(structural_classify(&corpus::product_family()).unwrap(), StructuralTag::Product);
}

/// Nonconstant 1-D trig polynomial with frequencies ≤ 3 as (freq, a, b) triples.
fn arb_factor() -> impl Strategy<Value = Vec<(i64, f64, f64)>> {
    prop::collection::vec((1i64..=3, -1.0f64..1.0, -1.0f64..1.0), 1..=3)
        .prop_filter("nonconstant", |v| v.iter().any(|t| t.1.abs() + t.2.abs() > 0.05))
}

/// f(s) g(t) expanded into 2-D frequencies.
fn product(f: &[(i64, f64, f64)], g: &[(i64, f64, f64)]) -> TrigPoly {
    let mut p = TrigPoly::zero(2);
    for &(k, a, b) in f {
        for &(l, c, d) in g {
            // (a cos X + b sin X)(c cos Y + d sin Y), X = 2πks, Y = 2πlt
            let plus = ((a * c - b * d) / 2.0, (b * c + a * d) / 2.0);
            let minus = ((a * c + b * d) / 2.0, (b * c - a * d) / 2.0);
            p.add_term([k, l], plus.0, plus.1);
            p.add_term([k, -l], minus.0, minus.1);
        }
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn products_always_violate(f in arb_factor(), g in arb_factor(), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let p = product(&f, &g);
        // expansion oracle
        let fv: f64 = f.iter().map(|&(k, a, b)| a * (2.0 * PI * k as f64 * s).cos() + b * (2.0 * PI * k as f64 * s).sin()).sum();
        let gv: f64 = g.iter().map(|&(l, c, d)| c * (2.0 * PI * l as f64 * t).cos() + d * (2.0 * PI * l as f64 * t).sin()).sum();
        prop_assert!((p.eval2(s, t) - fv * gv).abs() < 1e-12);
        let fam = PhaseFamily::scalar(p).unwrap();
        prop_assert_eq!(structural_classify(&fam).unwrap(), StructuralTag::Product);
        let r = witness_search(&fam, 256, 2).unwrap();
        prop_assert_eq!(r.verdict, Verdict::Violated);
    }
}

#[test]
fn small_grid_is_rejected() {
    assert!(witness_search(&corpus::product_family(), 32, 2).is_err());
    assert!(witness_search(&corpus::product_family(), 64, 2).is_ok());
}

#[test]
fn scalar_family_skips_negated_direction() {
    let r = witness_search(&corpus::split_family(), 64, 2).unwrap();
    assert_eq!(r.resolution.omega_skipped, vec![vec![-1.0]]);
}
