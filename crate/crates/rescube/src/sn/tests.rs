use super::*;
use crate::rewrite::{redexes, Rule};
use crate::syntax::{Base, Res, Supply};
use crate::typing::{check_derivation, subject_step, Sys};
use crate::{alpha_eq, parse_lj, parse_nd, Expr};

fn nd(s: &str) -> Expr {
    parse_nd(s).unwrap()
}

fn lj(s: &str) -> Expr {
    parse_lj(s).unwrap()
}

#[test]
fn identity_application_is_sn() {
    let v = is_sn(&nd("(\\x. x) y"), Base::Nd, Res::NONE, 100);
    assert_eq!(
        v,
        SnVerdict::StronglyNormalising {
            max_path_len: 1,
            graph_size: 2
        }
    );
}

#[test]
fn omega_has_a_one_cycle() {
    let omega = nd("(\\x. x x) (\\x. x x)");
    let v = is_sn(&omega, Base::Nd, Res::NONE, 100);
    let cycle = v.cycle().expect("a cycle");
    assert_eq!(cycle.len(), 1);
    assert!(alpha_eq(&cycle[0], &omega));
}

#[test]
fn contraction_omega_diverges() {
    let omega = nd("(\\x. C[x<a,b] a b) (\\y. C[y<c,d] c d)");
    assert_eq!(
        is_sn(&omega, Base::Nd, Res::C, 100).cycle().map(<[_]>::len),
        Some(1)
    );
}

#[test]
fn sequent_example_is_sn() {
    let e = lj("\\x. W[x] C[y<y1,y2] y1 (y2 :: ^z. z)");
    assert!(is_sn(&e, Base::Lj, Res::CW, 1000).is_sn());
}

#[test]
fn fuel_exhaustion_is_inconclusive() {
    let e = nd("(\\x. x x x) (\\x. x x x)");
    let v = is_sn(&e, Base::Nd, Res::NONE, 5);
    assert!(matches!(v, SnVerdict::Diverges(Divergence::Fuel { .. })));
}

#[test]
fn normal_forms_are_typed() {
    for (base, res, src) in [
        (Base::Nd, Res::NONE, "x"),
        (Base::Nd, Res::W, "\\x. W[x] \\y. y"),
        (Base::Nd, Res::NONE, "\\x. x x"),
        (Base::Nd, Res::C, "C[x<a,b] a b"),
        (Base::Nd, Res::C, "(C[x<a,b] a b) z"),
        (Base::Nd, Res::CW, "\\f. \\x. C[x<a,b] f a b"),
        (Base::Lj, Res::NONE, "x (y :: ^z. z)"),
        (Base::Lj, Res::NONE, "\\x. x (x :: ^z. z)"),
        (Base::Lj, Res::C, "C[x<y,z] y (z :: ^q. q)"),
        (Base::Lj, Res::C, "(\\x. x) (C[y<a,b] a :: b :: ^z. z)"),
        (Base::Lj, Res::CW, "W[u] ^x. W[x] v"),
    ] {
        let e = if base == Base::Nd { nd(src) } else { lj(src) };
        let d = type_normal_form(&e, base, res).unwrap_or_else(|x| panic!("{src}: {x}"));
        assert_eq!(check_derivation(&d, base, res), Ok(()), "{src}");
        assert_eq!(d.subject(), &e);
    }
}

#[test]
fn normal_form_atoms_are_numbered_in_order() {
    let d = type_normal_form(&nd("\\x. W[x] \\y. y"), Base::Nd, Res::W).unwrap();
    assert_eq!(d.ty().to_string(), "p2 -> p1 -> p1");
    let d = type_normal_form(&nd("x"), Base::Nd, Res::NONE).unwrap();
    assert_eq!(d.to_json()["basis"]["x"][0], "p1");
}

#[test]
fn type_normal_form_rejects_redexes() {
    assert!(type_normal_form(&nd("(\\x. x) y"), Base::Nd, Res::NONE).is_err());
}

#[test]
fn synthesis_examples() {
    for (base, res, src) in [
        (Base::Nd, Res::NONE, "\\x. x"),
        (Base::Nd, Res::NONE, "(\\x. x x) (\\y. y)"),
        (Base::Nd, Res::NONE, "(\\x. \\y. y) ((\\x. x x) (\\x. x))"),
        (Base::Nd, Res::NONE, "(\\x. y) z"),
        (Base::Nd, Res::C, "(\\x. C[x<a,b] a b) (\\y. y)"),
        (Base::Nd, Res::W, "(\\x. W[x] y) (z w)"),
        (Base::Nd, Res::CW, "(\\f. \\x. C[f<g,h] g (h x)) (\\y. y)"),
        (Base::Nd, Res::CW, "C[u<a,b] (\\x. W[x] a) b"),
        (
            Base::Lj,
            Res::NONE,
            "(\\x. x (x :: ^z. z)) ((\\y. y) :: ^q. q)",
        ),
        (Base::Lj, Res::NONE, "(\\x. x) (u :: ^y. y)"),
        (Base::Lj, Res::NONE, "(u (v :: ^y. y)) (w :: ^z. z)"),
        (Base::Lj, Res::C, "u (^x. C[x<a,b] a (b :: ^y. y))"),
        (Base::Lj, Res::W, "u (^x. W[x] v)"),
        (
            Base::Lj,
            Res::CW,
            "(\\x. C[x<a,b] a (b :: ^z. z)) ((\\y. y) :: ^q. q)",
        ),
    ] {
        let e = if base == Base::Nd { nd(src) } else { lj(src) };
        let d = synthesize(&e, base, res, 2000).unwrap_or_else(|x| panic!("{src}: {x}"));
        assert_eq!(d.subject(), &e, "{src}");
    }
}

#[test]
fn synthesis_refuses_divergent_terms() {
    let omega = nd("(\\x. x x) (\\x. x x)");
    assert!(matches!(
        synthesize(&omega, Base::Nd, Res::NONE, 100),
        Err(SynthError::NotSn(_))
    ));
}

#[test]
fn inverse_substitution_basic_case() {
    let sys = Sys::new(Base::Nd, Res::NONE);
    let n = nd("\\y. y");
    let d = type_normal_form(&n, Base::Nd, Res::NONE).unwrap();
    let (dm, ts) = inverse_subst_typing(sys, &d, &nd("x"), &crate::Var::new("x"), &n, 100).unwrap();
    assert_eq!(ts.len(), 1);
    assert_eq!(ts[0].ty(), d.ty());
    assert_eq!(
        dm.basis().get(&crate::Var::new("x")).unwrap().to_string(),
        d.ty().to_string()
    );
}

#[test]
fn head_expansion_inverts_subject_step() {
    for (base, res, src) in [
        (Base::Nd, Res::NONE, "(\\x. f x x) y"),
        (Base::Nd, Res::C, "C[u<a,b] (\\x. a) b"),
        (Base::Nd, Res::W, "(W[u] f) y"),
        (Base::Lj, Res::NONE, "(\\x. x) (u :: ^y. y)"),
        (Base::Lj, Res::NONE, "u (^x. f (x :: x :: ^y. y))"),
        (Base::Lj, Res::C, "C[u<a,b] f (a :: b :: ^y. y)"),
    ] {
        let e = if base == Base::Nd { nd(src) } else { lj(src) };
        let sys = Sys::new(base, res);
        let d = synthesize(&e, base, res, 1000).unwrap();
        for r in redexes(&e, base, res) {
            let mut supply = Supply::above(&e);
            let Ok(d2) = subject_step(sys, &d, &r, &mut supply) else {
                continue;
            };
            let back =
                expand_head(sys, &d2, &e, &r, 1000).unwrap_or_else(|x| panic!("{src} {r}: {x}"));
            assert_eq!(check_derivation(&back, base, res), Ok(()), "{src} {r}");
            assert_eq!(back.ty(), d.ty(), "{src} {r}");
            assert_eq!(back.subject(), &e);
        }
    }
}

#[test]
fn sigma_expansion_types_erased_arguments() {
    let e = lj("(u (v :: ^w. w)) (^x. y)");
    let r = redexes(&e, Base::Lj, Res::NONE);
    assert!(r.iter().any(|r| r.rule == Rule::Sigma));
    let d = synthesize(&e, Base::Lj, Res::NONE, 1000).unwrap();
    assert!(d.basis().contains(&crate::Var::new("u")));
}
