//! The translation from sequent expressions into natural deduction terms,
//! its action on derivations, the size and resource norms, and the
//! simulation order used for termination.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::rewrite::{class_key, redexes, step, Redex, Rule};
use crate::syntax::{print, Base, Expr, IType, Res, Sort, Supply, Var};
use crate::typing::{BuildError, Derivation, Sys, TRule};
use crate::wellformed::fv_set;

/// A natural deduction term with one hole, standing for `⟦k⟧`.
///
/// The hole is a variable no parser can produce. Plugging replaces it and
/// drops every weakening on the way to it whose variable the plug makes
/// free, which realises `⟦W[x]k⟧(M) = W[{x} \ Fv(M)] ⟦k⟧(M)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtxFun {
    pub template: Expr,
}

impl CtxFun {
    pub fn hole() -> Var {
        Var {
            base: Arc::from("[]"),
            tag: 0,
        }
    }

    pub fn plug(&self, m: &Expr) -> Expr {
        plug_template(&self.template, m).expect("a context template has exactly one hole")
    }
}

impl fmt::Display for CtxFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(&self.template))
    }
}

fn plug_template(t: &Expr, m: &Expr) -> Option<Expr> {
    let hole = CtxFun::hole();
    if !t.used_names().contains(&hole) {
        return None;
    }
    Some(match t {
        Expr::Var(x) if *x == hole => m.clone(),
        Expr::Var(_) => return None,
        Expr::Abs(x, b) => Expr::abs(x.clone(), plug_template(b, m)?),
        Expr::App(a, b) => match plug_template(a, m) {
            Some(a2) => Expr::app(a2, (**b).clone()),
            None => Expr::app((**a).clone(), plug_template(b, m)?),
        },
        Expr::Weak(x, b) => {
            let body = plug_template(b, m)?;
            if fv_set(&body).contains(x) {
                body
            } else {
                Expr::weak(x.clone(), body)
            }
        }
        Expr::Contr(x, y, z, b) => {
            Expr::contr(x.clone(), y.clone(), z.clone(), plug_template(b, m)?)
        }
        _ => return None,
    })
}

/// `⟦t⟧` for a sequent term.
pub fn translate_term(t: &Expr) -> Expr {
    match t {
        Expr::Var(_) => t.clone(),
        Expr::Abs(x, b) => Expr::abs(x.clone(), translate_term(b)),
        Expr::Weak(x, b) => Expr::weak(x.clone(), translate_term(b)),
        Expr::Contr(x, y, z, b) => Expr::contr(x.clone(), y.clone(), z.clone(), translate_term(b)),
        Expr::Cut(t, k) => apply_context(k, translate_term(t)),
        Expr::App(..) | Expr::Sel(..) | Expr::Cons(..) => panic!("translate_term on {t}"),
    }
}

/// `⟦k⟧(m)`, clause by clause.
pub fn apply_context(k: &Expr, m: Expr) -> Expr {
    match k {
        Expr::Sel(x, t) => Expr::app(Expr::abs(x.clone(), translate_term(t)), m),
        Expr::Cons(t, k) => apply_context(k, Expr::app(m, translate_term(t))),
        Expr::Weak(x, k) => {
            let keep = !fv_set(&m).contains(x);
            let body = apply_context(k, m);
            if keep {
                Expr::weak(x.clone(), body)
            } else {
                body
            }
        }
        Expr::Contr(x, y, z, k) => {
            Expr::contr(x.clone(), y.clone(), z.clone(), apply_context(k, m))
        }
        _ => panic!("apply_context on {k}"),
    }
}

/// `⟦k⟧` as a template.
pub fn translate_context(k: &Expr) -> CtxFun {
    CtxFun {
        template: apply_context(k, Expr::Var(CtxFun::hole())),
    }
}

/// Translate any sequent expression: terms directly, contexts through their
/// template.
pub fn translate(e: &Expr) -> Expr {
    match e.root_sort() {
        Sort::Term => translate_term(e),
        Sort::Context => translate_context(e).template,
    }
}

/// Carry a sequent derivation of a term to a natural deduction derivation
/// of its translation, with the same basis and type.
pub fn translate_derivation(d: &Derivation, res: Res) -> Result<Derivation, BuildError> {
    let nd = Sys::new(Base::Nd, res);
    let out = tr(nd, d)?;
    nd.pad_to(&out, d.basis())
}

fn tr(nd: Sys, d: &Derivation) -> Result<Derivation, BuildError> {
    let p = &d.premises;
    match (d.rule, d.subject()) {
        (TRule::AxIw | TRule::AxEw, Expr::Var(x)) => {
            let t = d.basis().get(x).unwrap().clone();
            let ax = nd.ax(x, t, d.ty().clone())?;
            nd.pad_to(&ax, d.basis())
        }
        (TRule::ArrR, Expr::Abs(x, _)) => nd.abs(x, tr(nd, &p[0])?, p[0].basis().get(x).unwrap()),
        (TRule::WeakT, Expr::Weak(x, _)) => {
            nd.weak(x, d.basis().get(x).unwrap().clone(), tr(nd, &p[0])?)
        }
        (TRule::ContT, Expr::Contr(z, x, y, _)) => {
            let pb = p[0].basis();
            nd.cont(
                z,
                x,
                y,
                tr(nd, &p[0])?,
                pb.get(x).unwrap(),
                pb.get(y).unwrap(),
            )
        }
        (TRule::Cut, Expr::Cut(..)) => {
            let (ts, k) = p.split_at(p.len() - 1);
            let ms = ts
                .iter()
                .map(|t| tr(nd, t))
                .collect::<Result<Vec<_>, _>>()?;
            let out = translate_context_derivation(nd.res, &k[0], ms)?;
            nd.pad_to(&out, d.basis())
        }
        (r, e) => Err(BuildError(format!(
            "rule {r} on {e} is not a term rule of the sequent systems"
        ))),
    }
}

/// The function-typing reading of a context derivation `Δ; ∩τ_j ⊢ k : σ`:
/// given typings of one term `m` at every `τ_j`, a derivation of `⟦k⟧(m)`.
pub fn translate_context_derivation(
    res: Res,
    dk: &Derivation,
    ms: Vec<Derivation>,
) -> Result<Derivation, BuildError> {
    let nd = Sys::new(Base::Nd, res);
    let stoup = dk
        .stoup()
        .ok_or_else(|| BuildError("not a context derivation".into()))?;
    let have = IType::new(ms.iter().map(|m| m.ty().clone()).collect());
    if &have != stoup {
        return Err(BuildError(format!(
            "plug typings {have} do not match stoup {stoup}"
        )));
    }
    let p = &dk.premises;
    match dk.subject() {
        Expr::Sel(x, _) => {
            let abs = nd.abs(x, tr(nd, &p[0])?, stoup)?;
            nd.app(abs, ms)
        }
        Expr::Cons(..) => {
            let (ts, k) = p.split_at(p.len() - 1);
            let args = ts
                .iter()
                .map(|t| tr(nd, t))
                .collect::<Result<Vec<_>, _>>()?;
            let applied = ms
                .into_iter()
                .map(|m| nd.app(m, args.clone()))
                .collect::<Result<Vec<_>, _>>()?;
            translate_context_derivation(res, &k[0], applied)
        }
        Expr::Weak(x, _) => {
            let m_free = ms.iter().any(|m| fv_set(m.subject()).contains(x));
            let inner = translate_context_derivation(res, &p[0], ms)?;
            if m_free {
                let t = dk.basis().get(x).unwrap().clone();
                nd.pad(&inner, &crate::typing::Basis::single(x.clone(), t))
            } else {
                nd.weak(x, dk.basis().get(x).unwrap().clone(), inner)
            }
        }
        Expr::Contr(z, x, y, _) => {
            let pb = p[0].basis();
            let inner = translate_context_derivation(res, &p[0], ms)?;
            nd.cont(z, x, y, inner, pb.get(x).unwrap(), pb.get(y).unwrap())
        }
        e => Err(BuildError(format!("{e} is not a context"))),
    }
}

/// Size, contraction norm and weakening norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Measures {
    pub size: u64,
    pub cnorm: u64,
    pub wnorm: u64,
}

impl fmt::Display for Measures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "size={} cnorm={} wnorm={}",
            self.size, self.cnorm, self.wnorm
        )
    }
}

/// The three norms, by their recursive clauses. Applications of the
/// natural deduction base follow the cut clauses.
pub fn measures(e: &Expr) -> Measures {
    let m = |size, cnorm, wnorm| Measures { size, cnorm, wnorm };
    match e {
        Expr::Var(_) => m(1, 0, 1),
        Expr::Abs(_, t) | Expr::Sel(_, t) => {
            let a = measures(t);
            m(1 + a.size, a.cnorm, 1 + a.wnorm)
        }
        Expr::Weak(_, t) => {
            let a = measures(t);
            m(1 + a.size, a.cnorm, 0)
        }
        Expr::Contr(_, _, _, t) => {
            let a = measures(t);
            m(1 + a.size, a.cnorm + a.size, 1 + a.wnorm)
        }
        Expr::App(t, k) | Expr::Cut(t, k) | Expr::Cons(t, k) => {
            let (a, b) = (measures(t), measures(k));
            m(a.size + b.size, a.cnorm + b.cnorm, 1 + a.wnorm + b.wnorm)
        }
    }
}

/// How a sequent step is mirrored in natural deduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimClass {
    /// `⟦e⟧ →+ ⟦e'⟧`, with the intermediate terms.
    StrictDecrease { witness: Vec<Expr> },
    /// `⟦e⟧ ≡ ⟦e'⟧`.
    Identity,
}

/// No witness was found for a step that is not an identity.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("no reduction from the translation reaches the target; {explored} classes explored")]
    NoWitness { explored: usize },
    #[error("witness search ran out of fuel after {explored} classes")]
    OutOfFuel { explored: usize },
    #[error("step failed: {0}")]
    Step(String),
}

/// Node budget of the witness search, per call.
pub const SEARCH_NODES: usize = 4000;

/// Breadth-first search for `from →+ to` in natural deduction, modulo the
/// equivalence, with paths of at most `fuel` steps. Returns the path's
/// terms, ending in a representative of `to`.
pub fn find_reduction(
    from: &Expr,
    to: &Expr,
    res: Res,
    fuel: usize,
) -> Result<Vec<Expr>, SimError> {
    let goal = class_key(to);
    let start = class_key(from);
    let mut parent: HashMap<Expr, Option<(Expr, Expr)>> = HashMap::new();
    parent.insert(start.clone(), None);
    let mut queue = VecDeque::from([(from.clone(), start, 0usize)]);
    let mut truncated = false;
    while let Some((term, key, depth)) = queue.pop_front() {
        if depth >= fuel {
            truncated = true;
            continue;
        }
        for r in redexes(&term, Base::Nd, res) {
            let mut supply = Supply::above(&term);
            let next = step(&term, &r, Base::Nd, res, &mut supply)
                .map_err(|e| SimError::Step(e.to_string()))?;
            let nkey = class_key(&next);
            if nkey == goal {
                let mut path = vec![next];
                let mut cur = Some((term.clone(), key.clone()));
                while let Some((t, k)) = cur {
                    path.push(t);
                    cur = parent.get(&k).cloned().flatten();
                }
                path.reverse();
                return Ok(path);
            }
            if parent.contains_key(&nkey) {
                continue;
            }
            if parent.len() >= SEARCH_NODES {
                return Err(SimError::OutOfFuel {
                    explored: parent.len(),
                });
            }
            parent.insert(nkey.clone(), Some((term.clone(), key.clone())));
            queue.push_back((next, nkey, depth + 1));
        }
    }
    if truncated {
        Err(SimError::OutOfFuel {
            explored: parent.len(),
        })
    } else {
        Err(SimError::NoWitness {
            explored: parent.len(),
        })
    }
}

/// The natural deduction image of a sequent expression: contexts are
/// applied to a fresh variable standing for an arbitrary plug.
pub fn image(e: &Expr) -> Expr {
    match e.root_sort() {
        Sort::Term => translate_term(e),
        Sort::Context => apply_context(e, Expr::Var(plug_var(e))),
    }
}

fn plug_var(e: &Expr) -> Var {
    let used: BTreeSet<Var> = {
        let mut s = BTreeSet::new();
        e.for_each_var(&mut |v| {
            s.insert(v.clone());
        });
        s
    };
    let mut supply = Supply::above(e);
    let mut v = Var::new("m");
    while used.contains(&v) {
        v = supply.fresh("m");
    }
    v
}

/// Classify the step of `e` at `redex` by comparing the images of both
/// sides.
pub fn classify_step(e: &Expr, redex: &Redex, res: Res, fuel: usize) -> Result<SimClass, SimError> {
    let mut supply = Supply::above(e);
    let e2 =
        step(e, redex, Base::Lj, res, &mut supply).map_err(|x| SimError::Step(x.to_string()))?;
    classify_pair(e, &e2, res, fuel)
}

fn classify_pair(e: &Expr, e2: &Expr, res: Res, fuel: usize) -> Result<SimClass, SimError> {
    let (a, b) = match e.root_sort() {
        Sort::Term => (translate_term(e), translate_term(e2)),
        Sort::Context => {
            let m = Expr::Var(plug_var(e));
            (apply_context(e, m.clone()), apply_context(e2, m))
        }
    };
    if class_key(&a) == class_key(&b) {
        return Ok(SimClass::Identity);
    }
    find_reduction(&a, &b, res, fuel).map(|witness| SimClass::StrictDecrease { witness })
}

/// Which component of `≫` decided a comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decided {
    Reduction,
    Contraction,
    Weakening,
}

/// `e ≫ e'`: the translation reduces, or is equal and the contraction norm
/// drops, or both of those are equal and the weakening norm drops. Returns
/// the deciding component, or `None` if `e ≫ e'` does not hold.
pub fn gg_compare(e: &Expr, e2: &Expr, res: Res, fuel: usize) -> Result<Option<Decided>, SimError> {
    match classify_pair(e, e2, res, fuel) {
        Ok(SimClass::StrictDecrease { .. }) => Ok(Some(Decided::Reduction)),
        Ok(SimClass::Identity) => {
            let (m, m2) = (measures(e), measures(e2));
            Ok(if m.cnorm > m2.cnorm {
                Some(Decided::Contraction)
            } else if m.cnorm == m2.cnorm && m.wnorm > m2.wnorm {
                Some(Decided::Weakening)
            } else {
                None
            })
        }
        Err(SimError::NoWitness { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// The class a step of `rule` should fall into.
pub fn expected_class(rule: Rule) -> &'static str {
    match rule {
        Rule::Gamma6 | Rule::Omega6 => "identity",
        _ => "strict",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typing::{check_derivation, infer_simple};
    use crate::{alpha_eq, parse_lj, parse_nd};

    fn lj(s: &str) -> Expr {
        parse_lj(s).unwrap()
    }

    fn nd(s: &str) -> Expr {
        parse_nd(s).unwrap()
    }

    #[test]
    fn term_translation_examples() {
        assert_eq!(translate_term(&lj("x")), nd("x"));
        assert_eq!(
            translate_term(&lj("\\x. x (y :: ^z. z)")),
            nd("\\x. (\\z. z) (x y)")
        );
        assert_eq!(
            translate_term(&lj("u (^x. x (v :: ^y. y))")),
            nd("(\\x. (\\y. y) (x v)) u")
        );
        assert_eq!(
            translate_term(&lj("(\\q. q) (^x. x)")),
            nd("(\\x. x) (\\q. q)")
        );
    }

    #[test]
    fn context_translation_examples() {
        let m = nd("\\q. q");
        assert_eq!(
            translate_context(&lj("^x. x")).plug(&m),
            nd("(\\x. x) (\\q. q)")
        );
        assert_eq!(
            translate_context(&lj("y :: ^z. z")).plug(&nd("m")),
            nd("(\\z. z) (m y)")
        );
        assert_eq!(
            translate_context(&lj("W[x] ^z. z")).plug(&m),
            nd("W[x] ((\\z. z) (\\q. q))")
        );
        assert_eq!(
            translate_context(&lj("W[x] ^z. z")).plug(&nd("x")),
            nd("(\\z. z) x")
        );
        assert_eq!(
            translate_context(&lj("y :: ^z. z")).to_string(),
            "(\\z. z) ([] y)"
        );
    }

    #[test]
    fn plugging_agrees_with_the_clauses() {
        let ks = [
            "^x. x",
            "y :: ^z. z",
            "W[w] y :: ^z. z",
            "C[y<a,b] a :: b :: ^z. z",
            "u :: W[v] ^z. z",
        ];
        let ms = ["m", "\\q. q", "w", "v v"];
        for k in ks {
            let k = lj(k);
            for m in ms {
                let m = nd(m);
                assert_eq!(translate_context(&k).plug(&m), apply_context(&k, m.clone()));
            }
        }
    }

    #[test]
    fn measure_examples() {
        assert_eq!(
            measures(&lj("x")),
            Measures {
                size: 1,
                cnorm: 0,
                wnorm: 1
            }
        );
        assert_eq!(measures(&lj("W[x] \\y. y")).wnorm, 0);
        let m = measures(&lj("C[x<x1,x2] (x1 (x2 :: ^y. y))"));
        assert_eq!((m.size, m.cnorm), (5, 4));
        assert_eq!(m.wnorm, 1 + (1 + 1 + (1 + 1 + (1 + 1))));
        assert_eq!(m.to_string(), "size=5 cnorm=4 wnorm=7");
    }

    #[test]
    fn gamma6_and_omega6_are_identities() {
        let e = lj("f (C[x<a,b] g :: a :: b :: ^z. z)");
        let r = crate::rewrite::redexes(&e, Base::Lj, Res::C);
        let g6 = r
            .iter()
            .find(|r| r.rule == Rule::Gamma6)
            .expect("a gamma6 redex");
        assert_eq!(classify_step(&e, g6, Res::C, 50), Ok(SimClass::Identity));
        let e = lj("f (g :: W[y] ^z. z)");
        let r = crate::rewrite::redexes(&e, Base::Lj, Res::W);
        let w6 = r
            .iter()
            .find(|r| r.rule == Rule::Omega6)
            .expect("an omega6 redex");
        assert_eq!(classify_step(&e, w6, Res::W, 50), Ok(SimClass::Identity));
        let e2 = crate::rewrite::step(&e, w6, Base::Lj, Res::W, &mut Supply::above(&e)).unwrap();
        assert_eq!(
            gg_compare(&e, &e2, Res::W, 50),
            Ok(Some(Decided::Weakening))
        );
    }

    #[test]
    fn sigma_and_mu_steps_have_witnesses() {
        for (src, rule) in [
            ("u (^x. x (v :: ^y. y))", Rule::Sigma),
            ("u (^x. x (^y. y))", Rule::Mu),
        ] {
            let e = lj(src);
            let r = crate::rewrite::redexes(&e, Base::Lj, Res::NONE)
                .into_iter()
                .find(|r| r.rule == rule)
                .unwrap();
            match classify_step(&e, &r, Res::NONE, 50) {
                Ok(SimClass::StrictDecrease { witness }) => assert!(witness.len() >= 2),
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn beta_step_needs_more_than_plain_reduction() {
        // ⟦k⟧((λx.P)N) and (λx.⟦k⟧(P))N have a common reduct, but the first
        // does not reduce to the second.
        let e = lj("(\\x. x) (u :: ^y. y)");
        let r = Redex {
            path: vec![],
            rule: Rule::Beta,
        };
        assert!(matches!(
            classify_step(&e, &r, Res::NONE, 50),
            Err(SimError::NoWitness { .. })
        ));
    }

    #[test]
    fn derivations_translate() {
        for (res, src) in [
            (Res::NONE, "\\x. x (y :: ^z. z)"),
            (Res::NONE, "u (^x. x (v :: ^y. y))"),
            (Res::W, "\\x. W[y] x (^z. z)"),
            (Res::W, "u (W[v] ^z. z)"),
            (Res::C, "\\f. \\y. C[y<a,b] f (a :: b :: ^z. z)"),
            (Res::CW, "\\f. f (C[g<a,b] W[a] b :: ^z. z)"),
        ] {
            let e = lj(src);
            let Ok(t) = infer_simple(&e, Base::Lj, res) else {
                continue;
            };
            let out = translate_derivation(&t.derivation, res).unwrap();
            assert_eq!(check_derivation(&out, Base::Nd, res), Ok(()), "{src}");
            assert_eq!(out.basis(), t.derivation.basis());
            assert_eq!(out.ty(), t.derivation.ty());
            assert!(alpha_eq(out.subject(), &translate_term(&e)));
        }
    }
}
