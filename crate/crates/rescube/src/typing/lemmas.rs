use std::collections::BTreeMap;

use super::{
    align, rename_derivation, rule_for, Basis, BuildError, Derivation, Judgment, Sys, TRule,
};
use crate::syntax::{Expr, IType, StrictType, Supply, Var};
use crate::wellformed::{fv_ordered, fv_set};

fn err<T>(msg: impl Into<String>) -> Result<T, BuildError> {
    Err(BuildError(msg.into()))
}

/// What a judgment demands of its premises, read off the subject alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generation {
    pub rule: TRule,
    pub demands: Vec<String>,
}

/// Invert the unique rule for `j`'s subject: the rule, and the conditions
/// its premises must meet, instantiated with `j`'s basis, stoup and type.
pub fn generation(j: &Judgment, sys: Sys) -> Result<Generation, String> {
    let rule = rule_for(&j.subject, sys.base, sys.res)
        .ok_or_else(|| format!("no rule of this system types {}", j.subject))?;
    let g = &j.basis;
    let s = &j.ty;
    let demands = match &j.subject {
        Expr::Var(x) => {
            let t = g.get(x).ok_or_else(|| format!("{x} is not in the basis"))?;
            if !t.contains(s) {
                return Err(format!("{s} is not a member of {x}'s type {t}"));
            }
            if sys.res.weakening && g.len() != 1 {
                return Err(format!("the basis must be exactly {x}: {t}"));
            }
            vec![format!("{x}: {t} with {s} among its members")]
        }
        Expr::Abs(x, m) => match s {
            StrictType::Arrow(a, c) => vec![format!(
                "premise {{{}}} |- {} : {c}",
                g.with(x.clone(), a.clone()),
                m
            )],
            _ => return Err(format!("an abstraction needs an arrow type, not {s}")),
        },
        Expr::App(m, n) => vec![
            format!("premise Γ |- {m} : ∩τ_i -> {s}"),
            format!("premises Δ_i |- {n} : τ_i with equal domains"),
            format!("{{{g}}} = Γ ⊔_c (Δ_1 ⊔ ... ⊔ Δ_n)"),
        ],
        Expr::Cut(t, k) => vec![
            format!("premises Γ_i |- {t} : σ_i with equal domains"),
            format!("premise Δ; ∩σ_i |- {k} : {s}"),
            format!("{{{g}}} = (Γ_1 ⊔ ... ⊔ Γ_n) ⊔_c Δ"),
        ],
        Expr::Sel(x, t) => {
            let a = j.stoup.as_ref().ok_or("a selection needs a stoup")?;
            vec![format!(
                "premise {{{}}} |- {} : {s}",
                g.with(x.clone(), a.clone()),
                t
            )]
        }
        Expr::Cons(t, k) => {
            let a = j.stoup.as_ref().ok_or("a cons needs a stoup")?;
            let first = &a.members()[0];
            let StrictType::Arrow(dom, _) = first else {
                return Err(format!("a cons stoup must be made of arrows, not {a}"));
            };
            if a.iter()
                .any(|m| !matches!(m, StrictType::Arrow(d, _) if d == dom))
            {
                return Err(format!(
                    "the arrows of stoup {a} must share the domain {dom}"
                ));
            }
            let cods = IType::new(
                a.iter()
                    .map(|m| match m {
                        StrictType::Arrow(_, c) => (**c).clone(),
                        _ => unreachable!(),
                    })
                    .collect(),
            );
            vec![
                format!("premises Γ_i |- {t} : σ_i with ∩σ_i = {dom}"),
                format!("premise Δ; {cods} |- {k} : {s}"),
                format!("{{{g}}} = (Γ_1 ⊔ ... ⊔ Γ_n) ⊔_c Δ"),
            ]
        }
        Expr::Contr(z, x, y, m) => {
            let t = g.get(z).ok_or_else(|| format!("{z} is not in the basis"))?;
            vec![format!(
                "premise {{{}, {x}: α, {y}: β}} |- {m} : {s} with α ∩ β = {t}",
                g.without(z)
            )]
        }
        Expr::Weak(x, m) => {
            let t = g.get(x).ok_or_else(|| format!("{x} is not in the basis"))?;
            vec![format!(
                "premise {{{}}} |- {m} : {s}, {x}: {t} arbitrary",
                g.without(x)
            )]
        }
    };
    Ok(Generation { rule, demands })
}

#[derive(Clone)]
struct Entry {
    term: Expr,
    used: bool,
    /// Typings of `term`, one per type, with subjects equal to `term`.
    derivs: Vec<Derivation>,
    /// Union of the bases of `derivs`.
    delta: Basis,
}

struct SubstTyping<'a> {
    sys: Sys,
    map: BTreeMap<Var, Entry>,
    supply: &'a mut Supply,
}

/// Type `m[n/x]` from a typing of `m` with `x: ∩τ_i` and typings of `n` at
/// each `τ_i`. The substitution is replayed on the derivation with the given
/// supply, so the subject equals `subst(m, n, x, supply)` for the same
/// supply state. The conclusion basis is `(Γ \ x) ⊔_c (Δ_1 ⊔ ... ⊔ Δ_n)`.
pub fn subst_typing(
    sys: Sys,
    dm: &Derivation,
    x: &Var,
    dns: &[Derivation],
    supply: &mut Supply,
) -> Result<Derivation, BuildError> {
    let Some(first) = dns.first() else {
        return err("substitution needs at least one typing of the argument");
    };
    let n = first.subject().clone();
    if dns.iter().any(|d| d.subject() != &n || d.stoup().is_some()) {
        return err("argument typings must share one term subject");
    }
    supply.observe(dm.subject());
    supply.observe(&n);
    let delta = Basis::union_all(dns.iter().map(Derivation::basis));
    let target = dm
        .basis()
        .without(x)
        .union_c(&delta, sys.res)
        .map_err(|xs| {
            BuildError(format!(
                "argument basis shares {} with the rest",
                xs.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })?;
    let entry = Entry {
        term: n,
        used: false,
        derivs: dns.to_vec(),
        delta,
    };
    let mut st = SubstTyping {
        sys,
        map: BTreeMap::from([(x.clone(), entry)]),
        supply,
    };
    let out = st.go(dm)?;
    sys.pad_to(&out, &target)
}

impl SubstTyping<'_> {
    fn touches(&self, m: &Expr) -> bool {
        m.used_names().iter().any(|v| self.map.contains_key(v))
    }

    fn take(&mut self, y: &Var) -> Result<(Expr, Vec<Derivation>), BuildError> {
        let entry = self.map.get_mut(y).expect("substituted variable");
        if entry.used {
            let t = entry.term.refresh_binders(self.supply);
            let ds = entry
                .derivs
                .iter()
                .map(|d| align(d, &t))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((t, ds))
        } else {
            entry.used = true;
            Ok((entry.term.clone(), entry.derivs.clone()))
        }
    }

    /// Run `go` over every premise of a multi-premise group from the same
    /// state, as the term-level walk visits the shared subject once.
    fn group(&mut self, ps: &[Derivation]) -> Result<Vec<Derivation>, BuildError> {
        let map0 = self.map.clone();
        let supply0 = self.supply.clone();
        let mut out = Vec::with_capacity(ps.len());
        for p in ps {
            self.map = map0.clone();
            *self.supply = supply0.clone();
            out.push(self.go(p)?);
        }
        Ok(out)
    }

    fn go(&mut self, d: &Derivation) -> Result<Derivation, BuildError> {
        let m = d.subject();
        if !self.touches(m) {
            let mut out = d.clone();
            for y in self.map.keys() {
                out = self.sys.drop_var(&out, y)?;
            }
            return Ok(out);
        }
        let sys = self.sys;
        let p = &d.premises;
        match m {
            Expr::Var(y) => {
                let (_, ds) = self.take(y)?;
                ds.into_iter()
                    .find(|n| n.ty() == d.ty())
                    .ok_or_else(|| BuildError(format!("no typing of the argument at {}", d.ty())))
            }
            Expr::Abs(y, _) => {
                let body = self.go(&p[0])?;
                sys.abs(y, body, p[0].basis().get(y).expect("checked premise"))
            }
            Expr::Sel(y, _) => {
                let body = self.go(&p[0])?;
                sys.sel(y, body, p[0].basis().get(y).expect("checked premise"))
            }
            Expr::App(..) => {
                let f = self.go(&p[0])?;
                let args = self.group(&p[1..])?;
                sys.app(f, args)
            }
            Expr::Cut(..) | Expr::Cons(..) => {
                let (ts, k) = p.split_at(p.len() - 1);
                let ts = self.group(ts)?;
                let k = self.go(&k[0])?;
                if matches!(m, Expr::Cut(..)) {
                    sys.cut(ts, k)
                } else {
                    sys.cons(ts, k)
                }
            }
            Expr::Weak(y, _) => {
                let body = self.go(&p[0])?;
                let fv = fv_set(body.subject());
                match self.map.get(y) {
                    Some(entry) => {
                        let extra: Vec<Var> = fv_ordered(&entry.term)
                            .into_iter()
                            .filter(|z| !fv.contains(z))
                            .collect();
                        let delta = entry.delta.clone();
                        extra.iter().rev().try_fold(body, |acc, z| {
                            let t = delta
                                .get(z)
                                .cloned()
                                .ok_or_else(|| BuildError(format!("no type for {z}")))?;
                            sys.weak(z, t, acc)
                        })
                    }
                    None if fv.contains(y) => Ok(body),
                    None => sys.weak(
                        y,
                        d.basis().get(y).expect("checked conclusion").clone(),
                        body,
                    ),
                }
            }
            Expr::Contr(y, y1, y2, _) => {
                let pb = p[0].basis().clone();
                if !self.map.contains_key(y) {
                    let body = self.go(&p[0])?;
                    return sys.cont(
                        y,
                        y1,
                        y2,
                        body,
                        &pb.get(y1).cloned().unwrap(),
                        &pb.get(y2).cloned().unwrap(),
                    );
                }
                let (n, ds) = self.take(y)?;
                let delta = self.map[y].delta.clone();
                let zs = fv_ordered(&n);
                let mut left = BTreeMap::new();
                let mut right = BTreeMap::new();
                let mut triples = Vec::new();
                for z in &zs {
                    let z1 = self.supply.fresh(&z.base);
                    let z2 = self.supply.fresh(&z.base);
                    left.insert(z.clone(), z1.clone());
                    right.insert(z.clone(), z2.clone());
                    triples.push((z.clone(), z1, z2));
                }
                let n1 = n.rename(&left);
                let refreshed = n.refresh_binders(self.supply);
                let n2 = refreshed.rename(&right);
                let ds1: Vec<Derivation> = ds.iter().map(|d| rename_derivation(d, &left)).collect();
                let ds2 = ds
                    .iter()
                    .map(|d| align(d, &refreshed).map(|a| rename_derivation(&a, &right)))
                    .collect::<Result<Vec<_>, _>>()?;
                let rekey = |m: &BTreeMap<Var, Var>| -> Basis {
                    delta
                        .iter()
                        .map(|(v, t)| (m.get(v).cloned().unwrap_or_else(|| v.clone()), t.clone()))
                        .collect()
                };
                let (delta1, delta2) = (rekey(&left), rekey(&right));
                self.map.insert(
                    y1.clone(),
                    Entry {
                        term: n1,
                        used: false,
                        derivs: ds1,
                        delta: delta1.clone(),
                    },
                );
                self.map.insert(
                    y2.clone(),
                    Entry {
                        term: n2,
                        used: false,
                        derivs: ds2,
                        delta: delta2.clone(),
                    },
                );
                let body = self.go(&p[0]);
                self.map.remove(y1);
                self.map.remove(y2);
                let body = body?;
                triples
                    .into_iter()
                    .rev()
                    .try_fold(body, |acc, (z, z1, z2)| {
                        let (t1, t2) = (
                            delta1.get(&z1).cloned().unwrap(),
                            delta2.get(&z2).cloned().unwrap(),
                        );
                        sys.cont(&z, &z1, &z2, acc, &t1, &t2)
                    })
            }
        }
    }
}

/// Add `extra` to the stoup of a context typing. Possible through a
/// selection (the selected variable's type grows), through resource
/// operators, and through a cons when every new member is an arrow with the
/// cons's own domain.
pub fn widen_stoup(sys: Sys, d: &Derivation, extra: &IType) -> Result<Derivation, BuildError> {
    let Some(stoup) = d.stoup() else {
        return err("only a context judgment has a stoup");
    };
    if extra.subset_of(stoup) {
        return Ok(d.clone());
    }
    let p = &d.premises;
    match d.subject() {
        Expr::Sel(x, _) => {
            let body = sys.pad(&p[0], &Basis::single(x.clone(), extra.clone()))?;
            sys.sel(x, body, extra)
        }
        Expr::Weak(x, _) => {
            let body = widen_stoup(sys, &p[0], extra)?;
            sys.weak(x, d.basis().get(x).unwrap().clone(), body)
        }
        Expr::Contr(z, x, y, _) => {
            let body = widen_stoup(sys, &p[0], extra)?;
            let pb = p[0].basis();
            sys.cont(z, x, y, body, pb.get(x).unwrap(), pb.get(y).unwrap())
        }
        Expr::Cons(..) => {
            let (ts, k) = p.split_at(p.len() - 1);
            let dom = IType::new(ts.iter().map(|t| t.ty().clone()).collect());
            let mut cods = Vec::new();
            for m in extra.iter() {
                match m {
                    StrictType::Arrow(dm, c) if *dm == dom => cods.push((**c).clone()),
                    _ => return err(format!("cannot widen the stoup {stoup} of a cons with {m}")),
                }
            }
            let k = widen_stoup(sys, &k[0], &IType::new(cods))?;
            sys.cons(ts.to_vec(), k)
        }
        e => err(format!("{e} is not a context")),
    }
}

/// Type `k @ k2` from typings `Γ; α ⊢ k : τ_i` and `Δ; ∩τ_i ⊢ k2 : σ`.
/// Typings of `k` with different stoups are first widened to a common one.
/// The conclusion is `Γ ⊔_c Δ; α ⊢ k@k2 : σ`.
pub fn append_typing(
    sys: Sys,
    dks: &[Derivation],
    dk2: &Derivation,
) -> Result<Derivation, BuildError> {
    let Some(first) = dks.first() else {
        return err("append needs at least one typing of the first context");
    };
    let mut stoup = first
        .stoup()
        .cloned()
        .ok_or_else(|| BuildError("append on a term".into()))?;
    for d in dks {
        if d.subject() != first.subject() {
            return err("typings of the first context must share their subject");
        }
        stoup = stoup.meet(
            d.stoup()
                .ok_or_else(|| BuildError("append on a term".into()))?,
        );
    }
    let dks = dks
        .iter()
        .map(|d| widen_stoup(sys, d, &stoup))
        .collect::<Result<Vec<_>, _>>()?;
    let gamma = Basis::union_all(dks.iter().map(Derivation::basis));
    let target = gamma.union_c(dk2.basis(), sys.res).map_err(|xs| {
        BuildError(format!(
            "context bases share {}",
            xs.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ))
    })?;
    let out = append_go(sys, &dks, dk2)?;
    sys.pad_to(&out, &target)
}

fn append_go(sys: Sys, dks: &[Derivation], dk2: &Derivation) -> Result<Derivation, BuildError> {
    let firsts: Vec<Derivation> = dks.iter().map(|d| d.premises[0].clone()).collect();
    match dks[0].subject() {
        Expr::Sel(x, _) => {
            let alpha = dks[0].stoup().unwrap().clone();
            let inner = sys.cut(firsts, dk2.clone())?;
            sys.sel(x, inner, &alpha)
        }
        Expr::Cons(..) => {
            let mut us = Vec::new();
            let mut tails = Vec::new();
            for d in dks {
                let (ts, k) = d.premises.split_at(d.premises.len() - 1);
                us.extend(ts.iter().cloned());
                tails.push(k[0].clone());
            }
            let inner = append_go(sys, &tails, dk2)?;
            sys.cons(us, inner)
        }
        Expr::Weak(x, _) => {
            let inner = append_go(sys, &firsts, dk2)?;
            if fv_set(inner.subject()).contains(x) {
                Ok(inner)
            } else {
                let t = Basis::union_all(dks.iter().map(Derivation::basis))
                    .get(x)
                    .unwrap()
                    .clone();
                sys.weak(x, t, inner)
            }
        }
        Expr::Contr(z, x, y, _) => {
            let inner = append_go(sys, &firsts, dk2)?;
            let pb = Basis::union_all(firsts.iter().map(Derivation::basis));
            sys.cont(z, x, y, inner, pb.get(x).unwrap(), pb.get(y).unwrap())
        }
        e => err(format!("{e} is not a context")),
    }
}
