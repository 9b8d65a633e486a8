use super::*;
use crate::rewrite::{redexes, step, Redex, Rule};
use crate::syntax::{parse_itype, parse_lj, parse_nd, parse_strict, Base, Expr, Res, Supply, Var};

fn v(x: &str) -> Var {
    Var::new(x)
}

fn it(s: &str) -> IType {
    parse_itype(s).unwrap()
}

fn st(s: &str) -> crate::syntax::StrictType {
    parse_strict(s).unwrap()
}

/// `⊢ λx. x x : ((a -> s) ∩ a) -> s` by hand.
fn self_app(res: Res) -> Derivation {
    let sys = Sys::new(Base::Nd, res);
    let t = it("a /\\ (a -> s)");
    let f = sys.ax(&v("x"), t.clone(), st("a -> s")).unwrap();
    let a = sys.ax(&v("x"), t.clone(), st("a")).unwrap();
    let app = sys.app(f, vec![a]);
    let body = app.unwrap();
    sys.abs(&v("x"), body, &t).unwrap()
}

#[test]
fn self_application_typed_by_hand() {
    let d = self_app(Res::NONE);
    assert_eq!(check_derivation(&d, Base::Nd, Res::NONE), Ok(()));
    assert_eq!(d.ty().to_string(), "a /\\ (a -> s) -> s");
    assert_eq!(d.rule, TRule::ArrI);
    assert_eq!(d.premises[0].premises[0].rule, TRule::AxIw);
}

#[test]
fn self_application_with_contraction() {
    let sys = Sys::new(Base::Nd, Res::C);
    let f = sys.ax(&v("x1"), it("a -> s"), st("a -> s")).unwrap();
    let a = sys.ax(&v("x2"), it("a"), st("a")).unwrap();
    let app = sys.app(f, vec![a]).unwrap();
    let c = sys
        .cont(&v("x"), &v("x1"), &v("x2"), app, &it("a"), &it("a"))
        .unwrap();
    let d = sys.abs(&v("x"), c, &it("a")).unwrap();
    assert_eq!(d.subject(), &parse_nd("\\x. C[x<x1,x2] (x1 x2)").unwrap());
    assert_eq!(check_derivation(&d, Base::Nd, Res::C), Ok(()));
    assert_eq!(d.ty().to_string(), "a /\\ (a -> s) -> s");
}

#[test]
fn argument_domains_must_agree() {
    let sys = Sys::new(Base::Nd, Res::NONE);
    let f = sys
        .ax(&v("f"), it("a /\\ b -> c"), st("a /\\ b -> c"))
        .unwrap();
    let a = sys.ax(&v("y"), it("a"), st("a")).unwrap();
    let b = sys
        .pad(
            &sys.ax(&v("y"), it("b"), st("b")).unwrap(),
            &Basis::single(v("q"), it("d")),
        )
        .unwrap();
    let mut d = sys.app(f, vec![a, b]).unwrap();
    assert_eq!(check_derivation(&d, Base::Nd, Res::NONE), Ok(()));
    d.premises[1].concl.basis = Basis::single(v("y"), it("a"));
    let e = check_derivation(&d, Base::Nd, Res::NONE).unwrap_err();
    assert!(e.reason.contains("different domains"), "{e}");
}

#[test]
fn rule_availability_follows_resources() {
    let d = self_app(Res::NONE);
    assert!(check_derivation(&d, Base::Nd, Res::W).is_err());
    assert!(check_derivation(&d, Base::Lj, Res::NONE).is_err());
    assert!(rule_available(TRule::Cont, Base::Nd, Res::C));
    assert!(!rule_available(TRule::Cont, Base::Nd, Res::W));
    assert!(!rule_available(TRule::ContT, Base::Nd, Res::CW));
    assert!(rule_available(TRule::WeakK, Base::Lj, Res::W));
}

#[test]
fn explicit_weakening_axiom_is_exact() {
    let sys = Sys::new(Base::Nd, Res::W);
    let d = sys.ax(&v("x"), it("a"), st("a")).unwrap();
    assert!(sys.pad(&d, &Basis::single(v("y"), it("b"))).is_err());
    let grown = sys.pad(&d, &Basis::single(v("x"), it("b"))).unwrap();
    assert_eq!(check_derivation(&grown, Base::Nd, Res::W), Ok(()));
}

#[test]
fn json_round_trip() {
    for d in [
        self_app(Res::NONE),
        infer_simple(
            &parse_lj("\\x. x (y :: ^z. z)").unwrap(),
            Base::Lj,
            Res::NONE,
        )
        .unwrap()
        .derivation,
    ] {
        let base = if d.rule == TRule::ArrI {
            Base::Nd
        } else {
            Base::Lj
        };
        let s = d.to_json_string();
        let back = Derivation::from_json_str(&s, base).unwrap();
        assert_eq!(back, d);
    }
}

#[test]
fn json_shape() {
    let sys = Sys::new(Base::Nd, Res::NONE);
    let d = sys.ax(&v("x"), it("a /\\ b"), st("a")).unwrap();
    let j = d.to_json();
    assert_eq!(j["rule"], "Ax_iw");
    assert_eq!(j["basis"]["x"], serde_json::json!(["a", "b"]));
    assert_eq!(j["stoup"], serde_json::Value::Null);
    assert_eq!(j["subject"], "x");
    assert_eq!(j["type"], "a");
}

#[test]
fn simple_inference_examples() {
    let t = infer_simple(&parse_nd("\\x. x").unwrap(), Base::Nd, Res::NONE).unwrap();
    assert_eq!(t.ty.to_string(), "a -> a");
    assert!(t.basis.is_empty());
    let e = infer_simple(&parse_nd("\\x. x x").unwrap(), Base::Nd, Res::NONE).unwrap_err();
    assert!(e.constraint.contains("occurs"), "{e}");
    assert!(infer_simple(
        &parse_lj("\\x. x (x :: ^y. y)").unwrap(),
        Base::Lj,
        Res::NONE
    )
    .is_err());
    let k = infer_simple(&parse_nd("\\x. \\y. x").unwrap(), Base::Nd, Res::NONE).unwrap();
    assert_eq!(k.ty.to_string(), "a -> b -> a");
    let s = infer_simple(
        &parse_nd("\\x. \\y. \\z. x z (y z)").unwrap(),
        Base::Nd,
        Res::NONE,
    )
    .unwrap();
    assert_eq!(s.ty.to_string(), "(a -> b -> c) -> (a -> b) -> a -> c");
}

#[test]
fn simple_inference_respects_contraction() {
    let e = parse_nd("x x").unwrap();
    assert!(infer_simple(&e, Base::Nd, Res::W).is_err());
    let e = parse_nd("\\f. \\y. f y y").unwrap();
    assert!(infer_simple(&e, Base::Nd, Res::NONE).is_ok());
    let e = parse_nd("\\f. \\y. C[y<y1,y2] f y1 y2").unwrap();
    let t = infer_simple(&e, Base::Nd, Res::C).unwrap();
    assert_eq!(t.ty.to_string(), "(a -> a -> b) -> a -> b");
    assert_eq!(check_derivation(&t.derivation, Base::Nd, Res::C), Ok(()));
}

#[test]
fn simple_derivations_check_in_every_system() {
    let cases = [
        (Base::Nd, Res::NONE, "\\x. \\y. x"),
        (Base::Nd, Res::W, "\\x. \\y. W[y] x"),
        (Base::Nd, Res::C, "\\f. \\y. C[y<a,b] f a b"),
        (Base::Nd, Res::CW, "\\f. \\x. \\y. W[y] C[x<a,b] f a b"),
        (Base::Lj, Res::NONE, "\\x. x (y :: ^z. z)"),
        (Base::Lj, Res::W, "\\x. W[y] x (^z. z)"),
        (Base::Lj, Res::C, "\\f. \\y. C[y<a,b] f (a :: b :: ^z. z)"),
        (Base::Lj, Res::CW, "\\x. \\y. W[y] x (^z. z)"),
    ];
    for (base, res, src) in cases {
        let e = crate::parse(src, base).unwrap();
        let t = infer_simple(&e, base, res).unwrap_or_else(|u| panic!("{src}: {u}"));
        assert_eq!(check_derivation(&t.derivation, base, res), Ok(()), "{src}");
        assert_eq!(t.derivation.basis(), &t.basis);
        assert_eq!(t.derivation.subject(), &e);
    }
}

#[test]
fn generation_cases() {
    let sys = Sys::new(Base::Nd, Res::W);
    let j = Judgment {
        basis: Basis::new(),
        stoup: None,
        subject: parse_nd("\\x. x").unwrap(),
        ty: st("a -> a"),
    };
    let g = generation(&j, sys).unwrap();
    assert_eq!(g.rule, TRule::ArrI);
    assert_eq!(g.demands, vec!["premise {x: a} |- x : a".to_string()]);
    let j = Judgment {
        basis: Basis::single(v("x"), it("a")),
        stoup: None,
        subject: parse_nd("x").unwrap(),
        ty: st("a"),
    };
    assert_eq!(generation(&j, sys).unwrap().rule, TRule::AxEw);
    let j2 = Judgment {
        basis: j.basis.with(v("y"), it("b")),
        ..j.clone()
    };
    assert!(generation(&j2, sys).is_err());
    let j3 = Judgment {
        subject: parse_nd("\\x. x").unwrap(),
        ty: st("a"),
        ..j
    };
    assert!(generation(&j3, sys).is_err());
}

fn derivation_of(src: &str, base: Base, res: Res) -> Derivation {
    infer_simple(&crate::parse(src, base).unwrap(), base, res)
        .unwrap_or_else(|u| panic!("{src}: {u}"))
        .derivation
}

#[test]
fn substitution_into_variable_returns_argument_typing() {
    let sys = Sys::new(Base::Nd, Res::NONE);
    let dm = sys.ax(&v("x"), it("a -> a"), st("a -> a")).unwrap();
    let dn = derivation_of("\\z. z", Base::Nd, Res::NONE);
    let out = subst_typing(sys, &dm, &v("x"), &[dn.clone()], &mut Supply::new()).unwrap();
    assert_eq!(out, dn);
}

#[test]
fn substitution_into_application() {
    let sys = Sys::new(Base::Nd, Res::NONE);
    let f = sys.ax(&v("x"), it("b -> b"), st("b -> b")).unwrap();
    let a = sys.ax(&v("y"), it("b"), st("b")).unwrap();
    let dm = sys.app(f, vec![a]).unwrap();
    let dn = derivation_of("\\z. z", Base::Nd, Res::NONE);
    let dn = retype_identity(&dn, "b");
    let out = subst_typing(sys, &dm, &v("x"), &[dn], &mut Supply::new()).unwrap();
    assert_eq!(out.subject(), &parse_nd("(\\z. z) y").unwrap());
    assert_eq!(check_derivation(&out, Base::Nd, Res::NONE), Ok(()));
    assert_eq!(out.basis(), &Basis::single(v("y"), it("b")));
}

fn retype_identity(d: &Derivation, atom: &str) -> Derivation {
    let sys = Sys::new(Base::Nd, Res::NONE);
    let Expr::Abs(z, _) = d.subject() else {
        panic!()
    };
    let ax = sys.ax(z, it(atom), st(atom)).unwrap();
    sys.abs(z, ax, &it(atom)).unwrap()
}

#[test]
fn substitution_through_weakening_rebuilds_weakenings() {
    let sys = Sys::new(Base::Nd, Res::W);
    let body = sys.ax(&v("y"), it("a"), st("a")).unwrap();
    let dm = sys.weak(&v("x"), it("b"), body).unwrap();
    let dn = derivation_of("u v", Base::Nd, Res::W);
    let dn = align_types(&dn, "b");
    let out = subst_typing(sys, &dm, &v("x"), &[dn], &mut Supply::new()).unwrap();
    assert_eq!(out.subject(), &parse_nd("W[u] W[v] y").unwrap());
    assert_eq!(check_derivation(&out, Base::Nd, Res::W), Ok(()));
}

/// Re-type `u v` at `ty` by hand.
fn align_types(d: &Derivation, ty: &str) -> Derivation {
    let sys = Sys::new(Base::Nd, Res::W);
    let Expr::App(u, w) = d.subject() else {
        panic!()
    };
    let (Expr::Var(u), Expr::Var(w)) = (&**u, &**w) else {
        panic!()
    };
    let f = sys
        .ax(u, it(&format!("c -> {ty}")), st(&format!("c -> {ty}")))
        .unwrap();
    let a = sys.ax(w, it("c"), st("c")).unwrap();
    sys.app(f, vec![a]).unwrap()
}

#[test]
fn substitution_through_contraction_splits_the_argument() {
    let sys = Sys::new(Base::Nd, Res::C);
    let f = sys.ax(&v("x1"), it("b -> b"), st("b -> b")).unwrap();
    let a = sys.ax(&v("x2"), it("b"), st("b")).unwrap();
    let app = sys.app(f, vec![a]).unwrap();
    let dm = sys
        .cont(&v("x"), &v("x1"), &v("x2"), app, &it("b"), &it("b"))
        .unwrap();
    let dn_b = sys.ax(&v("u"), it("b"), st("b")).unwrap();
    let dn_bb = sys.ax(&v("u"), it("b -> b"), st("b -> b")).unwrap();
    let mut supply = Supply::new();
    let out = subst_typing(sys, &dm, &v("x"), &[dn_b, dn_bb], &mut supply).unwrap();
    assert_eq!(check_derivation(&out, Base::Nd, Res::C), Ok(()));
    assert_eq!(crate::print(out.subject()), "C[u<u#1,u#2] (u#1 u#2)");
    assert_eq!(out.basis(), &Basis::single(v("u"), it("b /\\ (b -> b)")));
}

#[test]
fn append_through_selection_cons_and_weakening() {
    for (res, k, k2) in [
        (Res::NONE, "^x. x", "^y. y"),
        (Res::NONE, "u :: ^x. x", "^y. y"),
        (Res::W, "W[z] ^x. x", "^y. y"),
    ] {
        let sys = Sys::new(Base::Lj, res);
        let dk = context_typing(sys, k);
        let tau = dk.ty().clone();
        let dk2 = {
            let y = Var::new("y");
            let ax = sys.ax(&y, IType::single(tau.clone()), tau.clone()).unwrap();
            sys.sel(&y, ax, &IType::single(tau.clone())).unwrap()
        };
        let out = append_typing(sys, &[dk.clone()], &dk2).unwrap();
        assert_eq!(check_derivation(&out, Base::Lj, res), Ok(()), "{k}");
        assert_eq!(
            out.subject(),
            &crate::rewrite::append(dk.subject(), &parse_lj(k2).unwrap())
        );
        assert_eq!(out.stoup(), dk.stoup());
    }
}

/// A typing of the context `src` found by simple inference.
fn context_typing(sys: Sys, src: &str) -> Derivation {
    let e = parse_lj(src).unwrap();
    let t = infer_simple(&e, Base::Lj, sys.res).unwrap();
    assert!(t.stoup.is_some());
    t.derivation
}

/// Every step from every simple derivation of `src` preserves the
/// conclusion, checked against the rewrite engine's own reduct.
fn all_steps_preserve(base: Base, res: Res, src: &str) -> usize {
    let sys = Sys::new(base, res);
    let d = derivation_of(src, base, res);
    let mut n = 0;
    for r in redexes(d.subject(), base, res) {
        let mut s1 = Supply::above(d.subject());
        let mut s2 = s1.clone();
        let expect = step(d.subject(), &r, base, res, &mut s1).unwrap();
        let out =
            subject_step(sys, &d, &r, &mut s2).unwrap_or_else(|e| panic!("{src} via {r}: {e}"));
        assert_eq!(out.subject(), &expect, "{src} via {r}");
        assert_eq!(
            check_derivation(&out, base, res),
            Ok(()),
            "{src} via {r}\n{out}"
        );
        assert_eq!(out.basis(), d.basis(), "{src} via {r}");
        assert_eq!(out.ty(), d.ty(), "{src} via {r}");
        assert_eq!(s1, s2);
        n += 1;
    }
    n
}

#[test]
fn subject_reduction_on_small_terms() {
    let cases = [
        (Base::Nd, Res::NONE, "(\\x. x) y"),
        (Base::Nd, Res::NONE, "(\\x. \\y. x y y) f z"),
        (Base::Nd, Res::W, "(\\x. W[x] y) (u v)"),
        (Base::Nd, Res::C, "(\\x. C[x<a,b] f a b) (\\z. z)"),
        (Base::Nd, Res::C, "C[x<a,b] (\\y. a (b y))"),
        (Base::Nd, Res::CW, "C[x<a,b] W[a] b"),
        (Base::Nd, Res::W, "\\x. W[y] x"),
        (Base::Nd, Res::W, "(W[y] f) x"),
        (Base::Nd, Res::W, "f (W[y] x)"),
        (Base::Nd, Res::CW, "C[x<a,b] (W[c] f a b)"),
        (Base::Nd, Res::C, "C[x<a,b] y"),
        (Base::Lj, Res::NONE, "(\\x. x (^y. y)) (u :: ^z. z)"),
        (Base::Lj, Res::NONE, "u (^x. x (^y. y))"),
        (Base::Lj, Res::NONE, "(u (v :: ^y. y)) (^z. z)"),
        (Base::Lj, Res::NONE, "u (^x. x (w :: ^z. z))"),
        (Base::Lj, Res::C, "C[u<a,b] f (a :: b :: ^z. z)"),
        (
            Base::Lj,
            Res::C,
            "g (C[u<a,b] f (a :: b :: ^z. z) :: ^y. y)",
        ),
        (Base::Lj, Res::W, "u (^x. W[y] x (^z. z))"),
        (Base::Lj, Res::W, "(W[y] u) (^z. z)"),
        (Base::Lj, Res::W, "u (W[y] ^z. z)"),
        (Base::Lj, Res::CW, "C[x<a,b] W[a] b (^q. q)"),
    ];
    let mut fired = 0;
    for (base, res, src) in cases {
        fired += all_steps_preserve(base, res, src);
    }
    assert!(fired >= cases.len());
}

#[test]
fn subject_reduction_beta_lj_shape() {
    let base = Base::Lj;
    let d = derivation_of("(\\x. x (^y. y)) (u :: ^z. z)", base, Res::NONE);
    let r = Redex {
        path: vec![],
        rule: Rule::Beta,
    };
    let out = subject_step(
        Sys::new(base, Res::NONE),
        &d,
        &r,
        &mut Supply::above(d.subject()),
    )
    .unwrap();
    assert_eq!(out.rule, TRule::Cut);
    assert_eq!(out.premises[1].rule, TRule::Sel);
    assert_eq!(out.premises[1].premises[0].rule, TRule::Cut);
}

#[test]
fn subject_reduction_with_intersections() {
    let sys = Sys::new(Base::Nd, Res::NONE);
    let t = it("(b -> b) /\\ ((b -> b) -> b -> b)");
    let f = sys
        .ax(&v("x"), t.clone(), st("(b -> b) -> b -> b"))
        .unwrap();
    let a = sys.ax(&v("x"), t.clone(), st("b -> b")).unwrap();
    let abs = sys.abs(&v("x"), sys.app(f, vec![a]).unwrap(), &t).unwrap();
    let d = sys
        .app(
            abs,
            vec![
                typed_id(&sys, "(b -> b) -> b -> b"),
                typed_id(&sys, "b -> b"),
            ],
        )
        .unwrap();
    assert_eq!(check_derivation(&d, Base::Nd, Res::NONE), Ok(()));
    let r = Redex {
        path: vec![],
        rule: Rule::Beta,
    };
    let out = subject_step(sys, &d, &r, &mut Supply::above(d.subject())).unwrap();
    assert_eq!(check_derivation(&out, Base::Nd, Res::NONE), Ok(()));
    assert_eq!(out.ty(), d.ty());
}

/// `⊢ λz.z : t` for an arrow `t = s -> s`.
fn typed_id(sys: &Sys, t: &str) -> Derivation {
    let crate::syntax::StrictType::Arrow(dom, _) = st(t) else {
        panic!()
    };
    let s = dom.members()[0].clone();
    let ax = sys.ax(&v("z"), dom.clone(), s).unwrap();
    sys.abs(&v("z"), ax, &dom).unwrap()
}
