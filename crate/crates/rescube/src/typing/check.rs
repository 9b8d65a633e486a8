use std::fmt;

use super::{Basis, Derivation, TRule};
use crate::syntax::{Base, Expr, IType, Res, Sort, StrictType};

/// Why a derivation fails to instantiate its rule.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct Invalid {
    /// Premise indices from the root to the offending node.
    pub node: Vec<usize>,
    pub rule: TRule,
    pub reason: String,
}

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.node.is_empty() {
            "root".to_string()
        } else {
            self.node
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(".")
        };
        write!(f, "invalid {} node at {}: {}", self.rule, at, self.reason)
    }
}

/// The rules available in the system for `base` and `res`.
pub fn rule_available(rule: TRule, base: Base, res: Res) -> bool {
    use TRule::*;
    let nd = base == Base::Nd;
    match rule {
        AxIw => !res.weakening,
        AxEw => res.weakening,
        ArrI | ArrE | Cont | Weak if !nd => false,
        ArrR | ArrL | Sel | Cut | ContT | ContK | WeakT | WeakK if nd => false,
        ArrI | ArrE | ArrR | ArrL | Sel | Cut => true,
        Cont | ContT | ContK => res.contraction,
        Weak | WeakT | WeakK => res.weakening,
    }
}

/// The unique rule whose conclusion can have `subject` as its subject.
pub fn rule_for(subject: &Expr, base: Base, res: Res) -> Option<TRule> {
    let lj_sorted =
        |t: TRule, k: TRule, body: &Expr| if body.root_sort() == Sort::Term { t } else { k };
    let r = match (base, subject) {
        (_, Expr::Var(_)) => {
            if res.weakening {
                TRule::AxEw
            } else {
                TRule::AxIw
            }
        }
        (Base::Nd, Expr::Abs(..)) => TRule::ArrI,
        (Base::Nd, Expr::App(..)) => TRule::ArrE,
        (Base::Nd, Expr::Contr(..)) => TRule::Cont,
        (Base::Nd, Expr::Weak(..)) => TRule::Weak,
        (Base::Lj, Expr::Abs(..)) => TRule::ArrR,
        (Base::Lj, Expr::Cut(..)) => TRule::Cut,
        (Base::Lj, Expr::Sel(..)) => TRule::Sel,
        (Base::Lj, Expr::Cons(..)) => TRule::ArrL,
        (Base::Lj, Expr::Contr(_, _, _, b)) => lj_sorted(TRule::ContT, TRule::ContK, b),
        (Base::Lj, Expr::Weak(_, b)) => lj_sorted(TRule::WeakT, TRule::WeakK, b),
        _ => return None,
    };
    rule_available(r, base, res).then_some(r)
}

/// Check every node of `d` against its rule schema in the system given by
/// `base` and `res`.
pub fn check_derivation(d: &Derivation, base: Base, res: Res) -> Result<(), Invalid> {
    if !d.subject().fits(base) {
        return Err(Invalid {
            node: vec![],
            rule: d.rule,
            reason: format!("subject is not a {base:?} expression"),
        });
    }
    let mut path = Vec::new();
    walk(d, base, res, &mut path)
}

pub fn is_valid(d: &Derivation, base: Base, res: Res) -> bool {
    check_derivation(d, base, res).is_ok()
}

fn walk(d: &Derivation, base: Base, res: Res, path: &mut Vec<usize>) -> Result<(), Invalid> {
    node(d, base, res).map_err(|reason| Invalid {
        node: path.clone(),
        rule: d.rule,
        reason,
    })?;
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        walk(p, base, res, path)?;
        path.pop();
    }
    Ok(())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn arity(d: &Derivation, n: usize) -> Result<(), String> {
    ensure(d.premises.len() == n, || {
        format!("expected {n} premises, found {}", d.premises.len())
    })
}

fn same_subject(p: &Derivation, e: &Expr) -> Result<(), String> {
    ensure(p.subject() == e, || {
        format!("premise subject {} should be {}", p.subject(), e)
    })
}

fn term_premise(p: &Derivation) -> Result<(), String> {
    ensure(p.stoup().is_none(), || {
        format!("premise for term {} carries a stoup", p.subject())
    })
}

/// `Γ, x:α` as premise basis for conclusion basis `Γ`. Returns `α`.
fn extends(premise: &Basis, concl: &Basis, x: &crate::syntax::Var) -> Result<IType, String> {
    let alpha = premise
        .get(x)
        .cloned()
        .ok_or_else(|| format!("premise basis lacks {x}"))?;
    ensure(!concl.contains(x), || {
        format!("conclusion basis still mentions {x}")
    })?;
    ensure(&premise.without(x) == concl, || {
        format!(
            "premise basis {{{}}} is not conclusion basis {{{}}} extended by {x}",
            premise, concl
        )
    })?;
    Ok(alpha)
}

/// The multi-premise group: equal subjects, equal domains, types forming
/// the intersection in canonical order. Returns the intersection and the
/// union of the bases.
fn group(ps: &[Derivation], e: &Expr) -> Result<(IType, Basis), String> {
    ensure(!ps.is_empty(), || {
        "at least one argument premise is required".into()
    })?;
    for p in ps {
        same_subject(p, e)?;
        term_premise(p)?;
        ensure(p.basis().same_domain(ps[0].basis()), || {
            format!(
                "argument bases have different domains: {{{}}} and {{{}}}",
                ps[0].basis(),
                p.basis()
            )
        })?;
    }
    for w in ps.windows(2) {
        ensure(w[0].ty() < w[1].ty(), || {
            "argument premises must have distinct types in canonical order".into()
        })?;
    }
    let it = IType::new(ps.iter().map(|p| p.ty().clone()).collect());
    Ok((it, Basis::union_all(ps.iter().map(Derivation::basis))))
}

fn combine(single: &Basis, multi: &Basis, res: Res, concl: &Basis) -> Result<(), String> {
    let b = single.union_c(multi, res).map_err(|xs| {
        format!(
            "bases must be disjoint but share {}",
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        )
    })?;
    ensure(&b == concl, || {
        format!("conclusion basis should be {{{b}}}, found {{{concl}}}")
    })
}

fn node(d: &Derivation, base: Base, res: Res) -> Result<(), String> {
    let e = d.subject();
    let expected =
        rule_for(e, base, res).ok_or_else(|| format!("no rule of this system types {}", e))?;
    ensure(d.rule == expected, || {
        format!("subject {} needs rule {}, not {}", e, expected, d.rule)
    })?;
    let is_ctx = e.root_sort() == Sort::Context;
    ensure(is_ctx == d.stoup().is_some(), || {
        if is_ctx {
            "a context judgment needs a stoup".into()
        } else {
            "a term judgment has no stoup".into()
        }
    })?;
    let basis = d.basis();
    match (d.rule, e) {
        (TRule::AxIw, Expr::Var(x)) => {
            arity(d, 0)?;
            let t = basis.get(x).ok_or_else(|| format!("basis lacks {x}"))?;
            ensure(t.contains(d.ty()), || {
                format!("{} is not a member of {t}", d.ty())
            })
        }
        (TRule::AxEw, Expr::Var(x)) => {
            arity(d, 0)?;
            ensure(basis.len() == 1, || {
                format!("basis must be exactly {x}, found {{{basis}}}")
            })?;
            let t = basis.get(x).ok_or_else(|| format!("basis lacks {x}"))?;
            ensure(t.contains(d.ty()), || {
                format!("{} is not a member of {t}", d.ty())
            })
        }
        (TRule::ArrI | TRule::ArrR, Expr::Abs(x, m)) => {
            arity(d, 1)?;
            let p = &d.premises[0];
            same_subject(p, m)?;
            term_premise(p)?;
            let alpha = extends(p.basis(), basis, x)?;
            let want = StrictType::arrow(alpha, p.ty().clone());
            ensure(&want == d.ty(), || {
                format!("type should be {want}, found {}", d.ty())
            })
        }
        (TRule::ArrE, Expr::App(m, n)) => {
            ensure(d.premises.len() >= 2, || {
                "->E needs a function premise and argument premises".into()
            })?;
            let f = &d.premises[0];
            same_subject(f, m)?;
            term_premise(f)?;
            let (dom, cod) = match f.ty() {
                StrictType::Arrow(dom, cod) => (dom, cod),
                t => return Err(format!("function premise has non-arrow type {t}")),
            };
            ensure(**cod == *d.ty(), || {
                format!("type should be {cod}, found {}", d.ty())
            })?;
            let args = &d.premises[1..];
            let (it, delta) = group(args, n)?;
            ensure(&it == dom, || {
                format!("argument types {it} do not match domain {dom}")
            })?;
            combine(f.basis(), &delta, res, basis)
        }
        (TRule::Cut, Expr::Cut(t, k)) => {
            ensure(d.premises.len() >= 2, || {
                "Cut needs term premises and a context premise".into()
            })?;
            let (ts, kd) = d.premises.split_at(d.premises.len() - 1);
            let kd = &kd[0];
            same_subject(kd, k)?;
            let (it, gamma) = group(ts, t)?;
            ensure(kd.stoup() == Some(&it), || {
                format!("context stoup should be {it}")
            })?;
            ensure(kd.ty() == d.ty(), || {
                format!("type should be {}, found {}", kd.ty(), d.ty())
            })?;
            combine(&kd.concl.basis, &gamma, res, basis)
        }
        (TRule::ArrL, Expr::Cons(t, k)) => {
            ensure(d.premises.len() >= 2, || {
                "->L needs term premises and a context premise".into()
            })?;
            let (ts, kd) = d.premises.split_at(d.premises.len() - 1);
            let kd = &kd[0];
            same_subject(kd, k)?;
            let (dom, gamma) = group(ts, t)?;
            let inner = kd.stoup().ok_or("context premise lacks a stoup")?;
            let want = IType::new(
                inner
                    .iter()
                    .map(|tau| StrictType::arrow(dom.clone(), tau.clone()))
                    .collect(),
            );
            ensure(d.stoup() == Some(&want), || {
                format!("stoup should be {want}")
            })?;
            ensure(kd.ty() == d.ty(), || {
                format!("type should be {}, found {}", kd.ty(), d.ty())
            })?;
            combine(&kd.concl.basis, &gamma, res, basis)
        }
        (TRule::Sel, Expr::Sel(x, t)) => {
            arity(d, 1)?;
            let p = &d.premises[0];
            same_subject(p, t)?;
            term_premise(p)?;
            let alpha = extends(p.basis(), basis, x)?;
            ensure(d.stoup() == Some(&alpha), || {
                format!("stoup should be {alpha}")
            })?;
            ensure(p.ty() == d.ty(), || {
                format!("type should be {}, found {}", p.ty(), d.ty())
            })
        }
        (TRule::Cont | TRule::ContT | TRule::ContK, Expr::Contr(z, x, y, m)) => {
            arity(d, 1)?;
            let p = &d.premises[0];
            same_subject(p, m)?;
            let a = p
                .basis()
                .get(x)
                .ok_or_else(|| format!("premise basis lacks {x}"))?;
            let b = p
                .basis()
                .get(y)
                .ok_or_else(|| format!("premise basis lacks {y}"))?;
            let gamma = p.basis().without(x).without(y);
            ensure(!gamma.contains(z), || {
                format!("{z} is already in the premise basis")
            })?;
            let want = gamma.with(z.clone(), a.meet(b));
            ensure(&want == basis, || {
                format!("conclusion basis should be {{{want}}}, found {{{basis}}}")
            })?;
            ensure(p.stoup() == d.stoup(), || "stoup must be preserved".into())?;
            ensure(p.ty() == d.ty(), || "type must be preserved".into())
        }
        (TRule::Weak | TRule::WeakT | TRule::WeakK, Expr::Weak(x, m)) => {
            arity(d, 1)?;
            let p = &d.premises[0];
            same_subject(p, m)?;
            ensure(!p.basis().contains(x), || {
                format!("{x} already occurs in the premise basis")
            })?;
            let alpha = basis
                .get(x)
                .ok_or_else(|| format!("conclusion basis lacks {x}"))?;
            let want = p.basis().with(x.clone(), alpha.clone());
            ensure(&want == basis, || {
                format!("conclusion basis should be {{{want}}}, found {{{basis}}}")
            })?;
            ensure(p.stoup() == d.stoup(), || "stoup must be preserved".into())?;
            ensure(p.ty() == d.ty(), || "type must be preserved".into())
        }
        (r, e) => Err(format!("rule {r} does not apply to {e}")),
    }
}
