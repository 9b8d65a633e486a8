use super::{
    align, append_typing, subst_typing, widen_stoup, Basis, BuildError, Derivation, IType, Sys,
};
use crate::rewrite::{step, Redex, Rule};
use crate::syntax::{Expr, Supply, Var};
use crate::wellformed::fv_set;

fn err<T>(msg: impl Into<String>) -> Result<T, BuildError> {
    Err(BuildError(msg.into()))
}

/// Carry a derivation of `e` across one step: the result types
/// `step(e, redex, supply)` with the same basis and type. The supply
/// advances exactly as `step` would advance it.
pub fn subject_step(
    sys: Sys,
    d: &Derivation,
    redex: &Redex,
    supply: &mut Supply,
) -> Result<Derivation, BuildError> {
    let e = d.subject();
    let mut probe = supply.clone();
    let target =
        step(e, redex, sys.base, sys.res, &mut probe).map_err(|x| BuildError(x.to_string()))?;
    supply.observe(e);
    let out = descend(sys, d, &redex.path, redex.rule, supply)?;
    let out = align(&out, &target)?;
    if out.subject() != &target {
        return err(format!(
            "typed {} but the step gives {}",
            out.subject(),
            target
        ));
    }
    *supply = probe;
    Ok(out)
}

fn descend(
    sys: Sys,
    d: &Derivation,
    path: &[usize],
    rule: Rule,
    supply: &mut Supply,
) -> Result<Derivation, BuildError> {
    let Some((&i, rest)) = path.split_first() else {
        let out = local(sys, d, rule, supply)?;
        return sys.pad_to(&out, d.basis());
    };
    let p = &d.premises;
    let n = p.len();
    let out = match d.subject() {
        Expr::Abs(x, _) => {
            let body = descend(sys, &p[0], rest, rule, supply)?;
            sys.abs(x, body, p[0].basis().get(x).unwrap())?
        }
        Expr::Sel(x, _) => {
            let body = descend(sys, &p[0], rest, rule, supply)?;
            sys.sel(x, body, p[0].basis().get(x).unwrap())?
        }
        Expr::Weak(x, _) => {
            let body = descend(sys, &p[0], rest, rule, supply)?;
            sys.weak(x, d.basis().get(x).unwrap().clone(), body)?
        }
        Expr::Contr(z, x, y, _) => {
            let pb = p[0].basis();
            let body = descend(sys, &p[0], rest, rule, supply)?;
            sys.cont(z, x, y, body, pb.get(x).unwrap(), pb.get(y).unwrap())?
        }
        Expr::App(..) if i == 0 => {
            let f = descend(sys, &p[0], rest, rule, supply)?;
            sys.app(f, p[1..].to_vec())?
        }
        Expr::App(..) => {
            let args = each(sys, &p[1..], rest, rule, supply)?;
            sys.app(p[0].clone(), args)?
        }
        Expr::Cut(..) | Expr::Cons(..) => {
            let (ts, k) = if i == 0 {
                (
                    each(sys, &p[..n - 1], rest, rule, supply)?,
                    p[n - 1].clone(),
                )
            } else {
                (
                    p[..n - 1].to_vec(),
                    descend(sys, &p[n - 1], rest, rule, supply)?,
                )
            };
            if matches!(d.subject(), Expr::Cut(..)) {
                sys.cut(ts, k)?
            } else {
                sys.cons(ts, k)?
            }
        }
        Expr::Var(_) => return err("path runs past a variable"),
    };
    sys.pad_to(&out, d.basis())
}

/// Reduce inside every premise of a group from the same supply state.
fn each(
    sys: Sys,
    ps: &[Derivation],
    path: &[usize],
    rule: Rule,
    supply: &mut Supply,
) -> Result<Vec<Derivation>, BuildError> {
    let start = supply.clone();
    let mut out = Vec::with_capacity(ps.len());
    for p in ps {
        *supply = start.clone();
        out.push(descend(sys, p, path, rule, supply)?);
    }
    Ok(out)
}

fn split_last(p: &[Derivation]) -> (&[Derivation], &Derivation) {
    let (ts, k) = p.split_at(p.len() - 1);
    (ts, &k[0])
}

fn firsts(ps: &[Derivation]) -> Vec<Derivation> {
    ps.iter().map(|p| p.premises[0].clone()).collect()
}

fn drop_all(sys: Sys, ps: &[Derivation], xs: &[&Var]) -> Result<Vec<Derivation>, BuildError> {
    ps.iter()
        .map(|p| {
            xs.iter()
                .try_fold(p.clone(), |acc, x| sys.drop_var(&acc, x))
        })
        .collect()
}

/// Weaken `x` over `body` unless `x` is free in it, as the rewrite rules do.
fn weak_unless_free(
    sys: Sys,
    x: &Var,
    t: &IType,
    body: Derivation,
) -> Result<Derivation, BuildError> {
    if fv_set(body.subject()).contains(x) {
        Ok(body)
    } else {
        sys.weak(x, t.clone(), body)
    }
}

fn local(
    sys: Sys,
    d: &Derivation,
    rule: Rule,
    supply: &mut Supply,
) -> Result<Derivation, BuildError> {
    let p = &d.premises;
    let e = d.subject();
    match (rule, e) {
        (Rule::Beta, Expr::App(..)) => {
            let Expr::Abs(x, _) = p[0].subject() else {
                unreachable!()
            };
            subst_typing(sys, &p[0].premises[0], x, &p[1..], supply)
        }
        (Rule::Beta, Expr::Cut(..)) => {
            let (abs, cons) = split_last(p);
            let Expr::Abs(x, _) = abs[0].subject() else {
                unreachable!()
            };
            let (us, k) = split_last(&cons.premises);
            let alpha = abs[0].premises[0].basis().get(x).unwrap().clone();
            let inner = sys.cut(firsts(abs), k.clone())?;
            let sel = sys.sel(x, inner, &alpha)?;
            sys.cut(us.to_vec(), sel)
        }
        (Rule::Sigma, _) => {
            let (ts, k) = split_last(p);
            let Expr::Sel(x, _) = k.subject() else {
                unreachable!()
            };
            subst_typing(sys, &k.premises[0], x, ts, supply)
        }
        (Rule::Pi, _) => {
            let (inner_cuts, k2) = split_last(p);
            let mut ts = Vec::new();
            let mut ks = Vec::new();
            for c in inner_cuts {
                let (t, k) = split_last(&c.premises);
                ts.extend(t.iter().cloned());
                ks.push(k.clone());
            }
            let joined = append_typing(sys, &ks, k2)?;
            sys.cut(ts, joined)
        }
        (Rule::Mu, Expr::Sel(x, _)) => {
            let (_, k) = split_last(&p[0].premises);
            let alpha = d.stoup().unwrap();
            let k = sys.drop_var(k, x)?;
            widen_stoup(sys, &k, alpha)
        }
        (Rule::Gamma0, Expr::Contr(_, x1, x2, _)) => {
            let body = sys.drop_var(&p[0], x1)?;
            sys.drop_var(&body, x2)
        }
        (Rule::Gamma0p, Expr::Contr(z, ..)) => {
            let t = d.basis().get(z).unwrap().clone();
            sys.ax(z, t, d.ty().clone())
        }
        (Rule::Gamma1 | Rule::Gamma4, Expr::Contr(z, x1, x2, _)) => {
            let pb = p[0].basis();
            let inner = &p[0].premises[0];
            let (y, is_abs) = match p[0].subject() {
                Expr::Abs(y, _) => (y, true),
                Expr::Sel(y, _) => (y, false),
                _ => unreachable!(),
            };
            let ty = inner.basis().get(y).unwrap().clone();
            let body = sys.cont(
                z,
                x1,
                x2,
                inner.clone(),
                pb.get(x1).unwrap(),
                pb.get(x2).unwrap(),
            )?;
            if is_abs {
                sys.abs(y, body, &ty)
            } else {
                sys.sel(y, body, &ty)
            }
        }
        (Rule::Gamma2 | Rule::Gamma3 | Rule::Gamma5 | Rule::Gamma6, Expr::Contr(z, x1, x2, _)) => {
            let pb = p[0].basis();
            let (f1, f2) = (pb.get(x1).unwrap(), pb.get(x2).unwrap());
            let q = &p[0].premises;
            let cont = |d: Derivation| sys.cont(z, x1, x2, d, f1, f2);
            let leaves = [x1, x2];
            match p[0].subject() {
                Expr::App(..) => {
                    if rule == Rule::Gamma2 {
                        let args = drop_all(sys, &q[1..], &leaves)?;
                        sys.app(cont(q[0].clone())?, args)
                    } else {
                        let f = drop_all(sys, &q[..1], &leaves)?.remove(0);
                        let args = q[1..]
                            .iter()
                            .map(|a| cont(a.clone()))
                            .collect::<Result<Vec<_>, _>>()?;
                        sys.app(f, args)
                    }
                }
                Expr::Cut(..) | Expr::Cons(..) => {
                    let (ts, k) = split_last(q);
                    let (ts, k) = if matches!(rule, Rule::Gamma2 | Rule::Gamma5) {
                        let ts = ts
                            .iter()
                            .map(|t| cont(t.clone()))
                            .collect::<Result<Vec<_>, _>>()?;
                        (
                            ts,
                            drop_all(sys, std::slice::from_ref(k), &leaves)?.remove(0),
                        )
                    } else {
                        (drop_all(sys, ts, &leaves)?, cont(k.clone())?)
                    };
                    if matches!(p[0].subject(), Expr::Cut(..)) {
                        sys.cut(ts, k)
                    } else {
                        sys.cons(ts, k)
                    }
                }
                _ => unreachable!(),
            }
        }
        (Rule::Omega1 | Rule::Omega4, Expr::Abs(x, _) | Expr::Sel(x, _)) => {
            let Expr::Weak(y, _) = p[0].subject() else {
                unreachable!()
            };
            let ty = p[0].basis().get(y).unwrap().clone();
            let fallback = p[0].basis().get(x).unwrap().clone();
            let inner = p[0].premises[0].clone();
            let body = if rule == Rule::Omega1 {
                sys.abs(x, inner, &fallback)?
            } else {
                sys.sel(x, inner, &fallback)?
            };
            sys.weak(y, ty, body)
        }
        (Rule::Omega2 | Rule::Omega3 | Rule::Omega5 | Rule::Omega6, _) => {
            let (first, second): (Vec<Derivation>, Vec<Derivation>) = if matches!(e, Expr::App(..))
            {
                (p[..1].to_vec(), p[1..].to_vec())
            } else {
                let (ts, k) = split_last(p);
                (ts.to_vec(), vec![k.clone()])
            };
            let weak_first = matches!(rule, Rule::Omega2 | Rule::Omega5);
            let group = if weak_first { &first } else { &second };
            let Expr::Weak(x, _) = group[0].subject() else {
                unreachable!()
            };
            let x = x.clone();
            let t = Basis::union_all(group.iter().map(Derivation::basis))
                .get(&x)
                .unwrap()
                .clone();
            let (first, second) = if weak_first {
                (firsts(&first), second)
            } else {
                (first, firsts(&second))
            };
            let body = match e {
                Expr::App(..) => sys.app(first[0].clone(), second)?,
                Expr::Cut(..) => sys.cut(first, second[0].clone())?,
                _ => sys.cons(first, second[0].clone())?,
            };
            weak_unless_free(sys, &x, &t, body)
        }
        (Rule::GammaOmega1, Expr::Contr(z, x1, x2, _)) => {
            let Expr::Weak(y, _) = p[0].subject() else {
                unreachable!()
            };
            let pb = p[0].basis();
            let ty = pb.get(y).unwrap().clone();
            let inner = &p[0].premises[0];
            let body = sys.cont(
                z,
                x1,
                x2,
                inner.clone(),
                pb.get(x1).unwrap(),
                pb.get(x2).unwrap(),
            )?;
            sys.weak(y, ty, body)
        }
        (Rule::GammaOmega2, Expr::Contr(z, x1, x2, _)) => {
            let Expr::Weak(w, _) = p[0].subject() else {
                unreachable!()
            };
            let other = if w == x1 { x2 } else { x1 };
            let inner = &p[0].premises[0];
            let t = inner.basis().get(other).unwrap().clone();
            let axioms = t
                .iter()
                .map(|s| sys.ax(z, t.clone(), s.clone()))
                .collect::<Result<Vec<_>, _>>()?;
            subst_typing(sys, inner, other, &axioms, supply)
        }
        (r, e) => err(format!("{r} does not apply to {e}")),
    }
}
