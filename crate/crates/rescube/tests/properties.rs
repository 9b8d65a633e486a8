//! Invariants over generated expressions of all eight calculi.

mod common;

use common::{all_systems, Gen};
use proptest::prelude::*;
use rescube::bridge::{measures, translate};
use rescube::rewrite::{canonical, class_key, redexes, step};
use rescube::sn::{is_normal_form, synthesize};
use rescube::typing::{check_derivation, subject_step, Derivation};
use rescube::wellformed::{check, fv_set};
use rescube::{alpha_eq, parse, print, Base, Expr, Res, Supply};

/// A system and a generated well-formed expression of it.
fn system_expr(max: usize) -> impl Strategy<Value = (Base, Res, Expr)> {
    let systems = all_systems();
    (0..systems.len(), any::<u64>(), 1..max).prop_map(move |(i, seed, size)| {
        let (base, res) = systems[i];
        (base, res, Gen::new(seed, base, res).expr(size))
    })
}

/// As [`system_expr`], terms only.
fn system_term(max: usize) -> impl Strategy<Value = (Base, Res, Expr)> {
    let systems = all_systems();
    (0..systems.len(), any::<u64>(), 1..max).prop_map(move |(i, seed, size)| {
        let (base, res) = systems[i];
        (base, res, Gen::new(seed, base, res).term(size))
    })
}

fn reducts(e: &Expr, base: Base, res: Res) -> Vec<Expr> {
    redexes(e, base, res)
        .iter()
        .map(|r| step(e, r, base, res, &mut Supply::above(e)).expect("enumerated redex applies"))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn generated_expressions_are_well_formed((base, res, e) in system_expr(12)) {
        prop_assert!(e.fits(base));
        prop_assert!(check(&e, res).is_ok(), "{}", e);
    }

    #[test]
    fn print_then_parse_is_identity((base, _res, e) in system_expr(12)) {
        let back = parse(&print(&e), base).unwrap();
        prop_assert!(alpha_eq(&back, &e), "{} came back as {}", e, back);
    }

    #[test]
    fn reduction_preserves_well_formedness((base, res, e) in system_expr(10)) {
        for e2 in reducts(&e, base, res) {
            prop_assert!(check(&e2, res).is_ok(), "{} reduced to ill-formed {}", e, e2);
            prop_assert!(e2.fits(base));
        }
    }

    #[test]
    fn reduction_never_adds_free_variables((base, res, e) in system_expr(10)) {
        let before = fv_set(&e);
        for e2 in reducts(&e, base, res) {
            let after = fv_set(&e2);
            prop_assert!(after.is_subset(&before), "{} to {}", e, e2);
            if res.weakening {
                prop_assert_eq!(&after, &before, "{} to {}", e, e2);
            }
        }
    }

    #[test]
    fn canonical_form_is_an_equivalent_representative((_base, res, e) in system_expr(12)) {
        let c = canonical(&e);
        prop_assert!(check(&c, res).is_ok());
        prop_assert_eq!(fv_set(&c), fv_set(&e));
        prop_assert_eq!(class_key(&c), class_key(&e));
        prop_assert_eq!(measures(&c), measures(&e));
    }

    #[test]
    fn normal_form_grammar_matches_redexes((base, res, e) in system_expr(12)) {
        let r = is_normal_form(&e, base, res);
        prop_assert!(r.consistent(), "{}: {:?}", e, r);
    }

    #[test]
    fn translation_keeps_free_variables((_base, res, e) in system_expr(10).prop_filter("sequent", |t| t.0 == Base::Lj)) {
        if e.root_sort() == rescube::Sort::Term {
            let t = translate(&e);
            prop_assert_eq!(fv_set(&t), fv_set(&e), "{} to {}", e, t);
            prop_assert!(check(&t, res).is_ok(), "{} to ill-formed {}", e, t);
        }
    }

    #[test]
    fn synthesized_derivations_are_valid((base, res, e) in system_term(8)) {
        if let Ok(d) = synthesize(&e, base, res, 500) {
            prop_assert!(check_derivation(&d, base, res).is_ok());
            prop_assert!(alpha_eq(d.subject(), &e));
            let back = Derivation::from_json_str(&d.to_json_string(), base).unwrap();
            prop_assert_eq!(back, d);
        }
    }

    #[test]
    fn subject_reduction_keeps_the_conclusion((base, res, e) in system_term(8)) {
        let Ok(d) = synthesize(&e, base, res, 500) else { return Ok(()) };
        let sys = rescube::typing::Sys::new(base, res);
        let e = d.subject().clone();
        for r in redexes(&e, base, res) {
            let d2 = subject_step(sys, &d, &r, &mut Supply::above(&e)).unwrap();
            prop_assert!(check_derivation(&d2, base, res).is_ok(), "{} at {}", e, r);
            prop_assert_eq!(d2.ty(), d.ty());
        }
    }
}
