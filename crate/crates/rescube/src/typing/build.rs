use std::collections::BTreeMap;

use super::{Basis, Derivation, TRule};
use crate::syntax::{Base, Expr, IType, Res, Sort, StrictType, Var};

/// A typing system: one base and one resource set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Sys {
    pub base: Base,
    pub res: Res,
}

/// Failure to assemble a derivation from the given pieces.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot build derivation: {0}")]
pub struct BuildError(pub String);

fn err<T>(msg: impl Into<String>) -> Result<T, BuildError> {
    Err(BuildError(msg.into()))
}

fn ctx_rule(body: &Derivation, t: TRule, k: TRule) -> TRule {
    if body.subject().root_sort() == Sort::Term {
        t
    } else {
        k
    }
}

impl Sys {
    pub fn new(base: Base, res: Res) -> Sys {
        Sys { base, res }
    }

    /// `x:t ⊢ x:ty`, with `ty` a member of `t`.
    pub fn ax(&self, x: &Var, t: IType, ty: StrictType) -> Result<Derivation, BuildError> {
        if !t.contains(&ty) {
            return err(format!("{ty} is not a member of {t}"));
        }
        let rule = if self.res.weakening {
            TRule::AxEw
        } else {
            TRule::AxIw
        };
        Ok(Derivation::new(
            rule,
            Basis::single(x.clone(), t),
            None,
            Expr::Var(x.clone()),
            ty,
            vec![],
        ))
    }

    /// Make sure `x` is in the basis of `d`, adding it with `fallback` if
    /// absent. Only possible without explicit weakening.
    fn ensure_var(
        &self,
        d: Derivation,
        x: &Var,
        fallback: &IType,
    ) -> Result<Derivation, BuildError> {
        if d.basis().contains(x) {
            Ok(d)
        } else if self.res.weakening {
            err(format!("{x} is not in the basis of {}", d.subject()))
        } else {
            self.pad(&d, &Basis::single(x.clone(), fallback.clone()))
        }
    }

    pub fn abs(
        &self,
        x: &Var,
        body: Derivation,
        fallback: &IType,
    ) -> Result<Derivation, BuildError> {
        let body = self.ensure_var(body, x, fallback)?;
        let alpha = body.basis().get(x).unwrap().clone();
        let rule = if self.base == Base::Nd {
            TRule::ArrI
        } else {
            TRule::ArrR
        };
        let ty = StrictType::arrow(alpha, body.ty().clone());
        Ok(Derivation::new(
            rule,
            body.basis().without(x),
            None,
            Expr::abs(x.clone(), body.subject().clone()),
            ty,
            vec![body],
        ))
    }

    pub fn sel(
        &self,
        x: &Var,
        body: Derivation,
        fallback: &IType,
    ) -> Result<Derivation, BuildError> {
        let body = self.ensure_var(body, x, fallback)?;
        let alpha = body.basis().get(x).unwrap().clone();
        let ty = body.ty().clone();
        Ok(Derivation::new(
            TRule::Sel,
            body.basis().without(x),
            Some(alpha),
            Expr::sel(x.clone(), body.subject().clone()),
            ty,
            vec![body],
        ))
    }

    /// Sort the argument group, drop repeated types and equalise domains.
    fn group(&self, mut args: Vec<Derivation>) -> Result<(Vec<Derivation>, Basis), BuildError> {
        if args.is_empty() {
            return err("an argument group needs at least one premise");
        }
        args.sort_by(|a, b| a.ty().cmp(b.ty()));
        args.dedup_by(|a, b| a.ty() == b.ty());
        let all = Basis::union_all(args.iter().map(Derivation::basis));
        let mut out = Vec::with_capacity(args.len());
        for a in args {
            let missing: Basis = all
                .iter()
                .filter(|(x, _)| !a.basis().contains(x))
                .map(|(x, t)| (x.clone(), t.clone()))
                .collect();
            out.push(if missing.is_empty() {
                a
            } else {
                self.pad(&a, &missing)?
            });
        }
        let delta = Basis::union_all(out.iter().map(Derivation::basis));
        Ok((out, delta))
    }

    fn union(&self, a: &Basis, b: &Basis) -> Result<Basis, BuildError> {
        a.union_c(b, self.res).map_err(|xs| {
            BuildError(format!(
                "bases share {}",
                xs.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })
    }

    /// `->E` from a function premise and one premise per domain member.
    pub fn app(&self, f: Derivation, args: Vec<Derivation>) -> Result<Derivation, BuildError> {
        let (args, delta) = self.group(args)?;
        let StrictType::Arrow(dom, cod) = f.ty().clone() else {
            return err(format!("{} does not have an arrow type", f.subject()));
        };
        let it = IType::new(args.iter().map(|a| a.ty().clone()).collect());
        if it != dom {
            return err(format!("argument types {it} do not match domain {dom}"));
        }
        let basis = self.union(f.basis(), &delta)?;
        let subject = Expr::app(f.subject().clone(), args[0].subject().clone());
        let mut premises = vec![f];
        premises.extend(args);
        Ok(Derivation::new(
            TRule::ArrE,
            basis,
            None,
            subject,
            *cod,
            premises,
        ))
    }

    pub fn cut(&self, ts: Vec<Derivation>, k: Derivation) -> Result<Derivation, BuildError> {
        let (ts, gamma) = self.group(ts)?;
        let it = IType::new(ts.iter().map(|a| a.ty().clone()).collect());
        if k.stoup() != Some(&it) {
            return err(format!("context stoup {:?} is not {it}", k.stoup()));
        }
        let basis = self.union(&gamma, k.basis())?;
        let subject = Expr::cut(ts[0].subject().clone(), k.subject().clone());
        let ty = k.ty().clone();
        let mut premises = ts;
        premises.push(k);
        Ok(Derivation::new(
            TRule::Cut,
            basis,
            None,
            subject,
            ty,
            premises,
        ))
    }

    pub fn cons(&self, ts: Vec<Derivation>, k: Derivation) -> Result<Derivation, BuildError> {
        let (ts, gamma) = self.group(ts)?;
        let dom = IType::new(ts.iter().map(|a| a.ty().clone()).collect());
        let Some(inner) = k.stoup() else {
            return err("the tail of a cons must be a context");
        };
        let stoup = IType::new(
            inner
                .iter()
                .map(|tau| StrictType::arrow(dom.clone(), tau.clone()))
                .collect(),
        );
        let basis = self.union(&gamma, k.basis())?;
        let subject = Expr::cons(ts[0].subject().clone(), k.subject().clone());
        let ty = k.ty().clone();
        let mut premises = ts;
        premises.push(k);
        Ok(Derivation::new(
            TRule::ArrL,
            basis,
            Some(stoup),
            subject,
            ty,
            premises,
        ))
    }

    /// Contract `x` and `y` of the body into `z`, giving `z` the
    /// intersection of their types. Missing leaves take the fallbacks.
    pub fn cont(
        &self,
        z: &Var,
        x: &Var,
        y: &Var,
        body: Derivation,
        fx: &IType,
        fy: &IType,
    ) -> Result<Derivation, BuildError> {
        let body = self.ensure_var(body, x, fx)?;
        let body = self.ensure_var(body, y, fy)?;
        let a = body.basis().get(x).unwrap();
        let b = body.basis().get(y).unwrap();
        let gamma = body.basis().without(x).without(y);
        if gamma.contains(z) {
            return err(format!("{z} is already in the basis"));
        }
        let basis = gamma.with(z.clone(), a.meet(b));
        let rule = if self.base == Base::Nd {
            TRule::Cont
        } else {
            ctx_rule(&body, TRule::ContT, TRule::ContK)
        };
        let subject = Expr::contr(z.clone(), x.clone(), y.clone(), body.subject().clone());
        Ok(Derivation::new(
            rule,
            basis,
            body.concl.stoup.clone(),
            subject,
            body.ty().clone(),
            vec![body],
        ))
    }

    pub fn weak(&self, x: &Var, t: IType, body: Derivation) -> Result<Derivation, BuildError> {
        if body.basis().contains(x) {
            return err(format!("{x} already occurs in the basis"));
        }
        let rule = if self.base == Base::Nd {
            TRule::Weak
        } else {
            ctx_rule(&body, TRule::WeakT, TRule::WeakK)
        };
        let basis = body.basis().with(x.clone(), t);
        let subject = Expr::weak(x.clone(), body.subject().clone());
        Ok(Derivation::new(
            rule,
            basis,
            body.concl.stoup.clone(),
            subject,
            body.ty().clone(),
            vec![body],
        ))
    }

    /// Enlarge the conclusion basis by `extra` (pointwise intersection).
    /// New variables need `w ∉ R`; existing ones may always grow, since an
    /// axiom may pick any member of its variable's type.
    pub fn pad(&self, d: &Derivation, extra: &Basis) -> Result<Derivation, BuildError> {
        if extra.is_empty() {
            return Ok(d.clone());
        }
        if self.res.weakening {
            if let Some(x) = extra.domain().find(|x| !d.basis().contains(x)) {
                return err(format!(
                    "cannot add {x} to the basis of {} with explicit weakening",
                    d.subject()
                ));
            }
        }
        let mut out = d.clone();
        out.concl.basis = d.basis().union(extra);
        match d.rule {
            TRule::AxIw | TRule::AxEw => {}
            TRule::ArrI | TRule::ArrR | TRule::Sel => {
                let x = binder(d.subject());
                if extra.contains(x) {
                    return err(format!("{x} is bound here"));
                }
                out.premises[0] = self.pad(&d.premises[0], extra)?;
            }
            TRule::Cont | TRule::ContT | TRule::ContK => {
                let Expr::Contr(z, x, y, _) = d.subject() else {
                    unreachable!()
                };
                if extra.contains(x) || extra.contains(y) {
                    return err(format!("{x} and {y} are bound here"));
                }
                let mut inner = extra.clone();
                if let Some(t) = inner.remove(z) {
                    inner.insert(x.clone(), t);
                }
                out.premises[0] = self.pad(&d.premises[0], &inner)?;
            }
            TRule::Weak | TRule::WeakT | TRule::WeakK => {
                let Expr::Weak(x, _) = d.subject() else {
                    unreachable!()
                };
                let mut inner = extra.clone();
                inner.remove(x);
                out.premises[0] = self.pad(&d.premises[0], &inner)?;
            }
            TRule::ArrE | TRule::Cut | TRule::ArrL => {
                let (single, multi): (usize, std::ops::Range<usize>) = if d.rule == TRule::ArrE {
                    (0, 1..d.premises.len())
                } else {
                    (d.premises.len() - 1, 0..d.premises.len() - 1)
                };
                let multi_dom = d.premises[multi.start].basis().clone();
                let (mut to_single, mut to_multi) = (Basis::new(), Basis::new());
                for (x, t) in extra.iter() {
                    if !d.premises[single].basis().contains(x) && multi_dom.contains(x) {
                        to_multi.insert(x.clone(), t.clone());
                    } else {
                        to_single.insert(x.clone(), t.clone());
                    }
                }
                out.premises[single] = self.pad(&d.premises[single], &to_single)?;
                for i in multi {
                    out.premises[i] = self.pad(&d.premises[i], &to_multi)?;
                }
            }
        }
        Ok(out)
    }

    /// Pad `d` so that its conclusion basis becomes `target`, dropping
    /// unused variables that `target` lacks.
    pub fn pad_to(&self, d: &Derivation, target: &Basis) -> Result<Derivation, BuildError> {
        let mut d = d.clone();
        let extras: Vec<Var> = d
            .basis()
            .domain()
            .filter(|x| !target.contains(x))
            .cloned()
            .collect();
        for x in extras {
            d = self.drop_var(&d, &x)?;
        }
        let mut extra = Basis::new();
        for (x, t) in target.iter() {
            match d.basis().get(x) {
                Some(s) if s == t => {}
                Some(s) if !s.subset_of(t) => {
                    return err(format!("type {s} of {x} exceeds the required {t}"));
                }
                _ => {
                    extra.insert(x.clone(), t.clone());
                }
            }
        }
        self.pad(&d, &extra)
    }

    /// Remove a variable that the subject does not use from every basis.
    pub fn drop_var(&self, d: &Derivation, x: &Var) -> Result<Derivation, BuildError> {
        if !d.basis().contains(x) {
            return Ok(d.clone());
        }
        let blocked = match d.subject() {
            Expr::Var(y) => y == x,
            Expr::Contr(z, ..) | Expr::Weak(z, _) => z == x,
            _ => false,
        };
        if blocked {
            return err(format!("{x} is used by {}", d.subject()));
        }
        let mut out = d.clone();
        out.concl.basis.remove(x);
        let rebinds = match d.subject() {
            Expr::Abs(y, _) | Expr::Sel(y, _) => y == x,
            Expr::Contr(_, y1, y2, _) => y1 == x || y2 == x,
            _ => false,
        };
        if rebinds {
            return Ok(out);
        }
        for p in out.premises.iter_mut() {
            *p = self.drop_var(p, x)?;
        }
        Ok(out)
    }
}

fn binder(e: &Expr) -> &Var {
    match e {
        Expr::Abs(x, _) | Expr::Sel(x, _) => x,
        _ => unreachable!("binder of a non-binding node"),
    }
}

/// Rename variables everywhere in a derivation: subjects and bases.
pub fn rename_derivation(d: &Derivation, map: &BTreeMap<Var, Var>) -> Derivation {
    let basis = d
        .basis()
        .iter()
        .map(|(x, t)| (map.get(x).cloned().unwrap_or_else(|| x.clone()), t.clone()))
        .collect();
    Derivation::new(
        d.rule,
        basis,
        d.concl.stoup.clone(),
        d.subject().rename(map),
        d.ty().clone(),
        d.premises
            .iter()
            .map(|p| rename_derivation(p, map))
            .collect(),
    )
}

/// Rename the bound variables of `d` so its subject becomes `target`, which
/// must be alpha-equivalent with the same free names.
pub fn align(d: &Derivation, target: &Expr) -> Result<Derivation, BuildError> {
    if d.subject() == target {
        return Ok(d.clone());
    }
    let mut map = BTreeMap::new();
    if !binder_map(d.subject(), target, &mut map) {
        return err(format!(
            "{} and {} differ beyond bound names",
            d.subject(),
            target
        ));
    }
    let out = rename_derivation(d, &map);
    if out.subject() != target {
        return err(format!("{} cannot be renamed to {}", d.subject(), target));
    }
    Ok(out)
}

fn binder_map(a: &Expr, b: &Expr, map: &mut BTreeMap<Var, Var>) -> bool {
    let bind = |x: &Var, y: &Var, map: &mut BTreeMap<Var, Var>| match map.get(x) {
        Some(z) => z == y,
        None => {
            if x != y {
                map.insert(x.clone(), y.clone());
            }
            true
        }
    };
    match (a, b) {
        (Expr::Var(_), Expr::Var(_)) => true,
        (Expr::Abs(x, m), Expr::Abs(y, n)) | (Expr::Sel(x, m), Expr::Sel(y, n)) => {
            bind(x, y, map) && binder_map(m, n, map)
        }
        (Expr::Weak(_, m), Expr::Weak(_, n)) => binder_map(m, n, map),
        (Expr::Contr(_, x1, x2, m), Expr::Contr(_, y1, y2, n)) => {
            bind(x1, y1, map) && bind(x2, y2, map) && binder_map(m, n, map)
        }
        (Expr::App(a1, a2), Expr::App(b1, b2))
        | (Expr::Cut(a1, a2), Expr::Cut(b1, b2))
        | (Expr::Cons(a1, a2), Expr::Cons(b1, b2)) => {
            binder_map(a1, b1, map) && binder_map(a2, b2, map)
        }
        _ => false,
    }
}
