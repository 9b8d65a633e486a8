use std::collections::BTreeMap;

use super::oracle::{is_sn, SnVerdict};
use crate::rewrite::{redexes, rules_at, step, subst_par, Redex, Rule};
use crate::syntax::{Base, Expr, IType, Res, Sort, StrictType, Supply, Var};
use crate::typing::{
    align, check_derivation, rename_derivation, Basis, BuildError, Derivation, Sys,
};
use crate::wellformed::{fv_ordered, fv_set};

/// Why no derivation was produced.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("not known to be strongly normalising: {0}")]
    NotSn(String),
    #[error("expansion budget exhausted")]
    Fuel,
    #[error("unexpected shape: {0}")]
    Case(String),
    #[error("{0}")]
    Build(String),
    #[error("the synthesized derivation is invalid: {0}")]
    Invalid(String),
}

impl From<BuildError> for SynthError {
    fn from(e: BuildError) -> SynthError {
        SynthError::Build(e.0)
    }
}

type Res_<T> = Result<T, SynthError>;
type Typings = BTreeMap<Var, Vec<Derivation>>;

/// The state of one synthesis: the typing system, the name supply shared by
/// every step, the atom counter and the remaining budget.
pub struct Synth {
    pub sys: Sys,
    supply: Supply,
    atoms: u32,
    budget: usize,
    hints: BTreeMap<Var, StrictType>,
}

impl Synth {
    pub fn new(sys: Sys, e: &Expr, budget: usize) -> Synth {
        Synth {
            sys,
            supply: Supply::above(e),
            atoms: 0,
            budget,
            hints: BTreeMap::new(),
        }
    }

    fn atom(&mut self) -> StrictType {
        self.atoms += 1;
        StrictType::atom(&format!("p{}", self.atoms))
    }

    fn tick(&mut self) -> Res_<()> {
        if self.budget == 0 {
            return Err(SynthError::Fuel);
        }
        self.budget -= 1;
        Ok(())
    }

    /// The first redex on the head path: the root, then the function of an
    /// application or the head of a cut. Contexts only look at their root.
    fn head_redex(&self, e: &Expr) -> Option<Redex> {
        let mut path = Vec::new();
        let mut cur = e;
        loop {
            if let Some(&rule) = rules_at(cur, self.sys.base, self.sys.res).first() {
                return Some(Redex { path, rule });
            }
            match cur {
                Expr::App(f, _) | Expr::Cut(f, _) => {
                    cur = f;
                    path.push(0);
                }
                _ => return None,
            }
        }
    }

    /// A derivation of `e`, whose type is `demand` when given. Head redexes
    /// are reduced and expanded back; other shapes are assembled from
    /// derivations of their parts.
    pub fn synth(&mut self, e: &Expr, demand: Option<StrictType>) -> Res_<Derivation> {
        self.tick()?;
        if let Some(r) = self.head_redex(e) {
            let e2 = step(e, &r, self.sys.base, self.sys.res, &mut self.supply)
                .map_err(|x| SynthError::Case(x.to_string()))?;
            let d2 = self.synth(&e2, demand)?;
            return self.expand(&d2, e, &r.path, r.rule);
        }
        let sys = self.sys;
        match e {
            Expr::Var(x) => {
                let ty = match demand.or_else(|| self.hints.get(x).cloned()) {
                    Some(t) => t,
                    None => self.atom(),
                };
                Ok(sys.ax(x, IType::single(ty.clone()), ty)?)
            }
            Expr::Abs(x, b) => match demand {
                None => {
                    let db = self.synth(b, None)?;
                    let fb = self.fallback(&db, x);
                    Ok(sys.abs(x, db, &fb)?)
                }
                Some(StrictType::Arrow(dom, cod)) => {
                    let mark = self.atoms;
                    let db = self.synth(b, Some(*cod))?;
                    let db = self.meet_binder(db, x, &dom, mark)?;
                    Ok(sys.abs(x, db, &dom)?)
                }
                Some(t) => Err(SynthError::Case(format!(
                    "an abstraction cannot have the atomic type {t}"
                ))),
            },
            Expr::Weak(x, b) => {
                let db = self.synth(b, demand)?;
                let t = IType::single(self.hinted(x));
                Ok(sys.weak(x, t, db)?)
            }
            Expr::Contr(z, x1, x2, b) => {
                let db = self.synth(b, demand)?;
                let (f1, f2) = (self.fallback(&db, x1), self.fallback(&db, x2));
                Ok(sys.cont(z, x1, x2, db, &f1, &f2)?)
            }
            Expr::App(..) => {
                let mut args = Vec::new();
                let mut head = e;
                while let Expr::App(f, a) = head {
                    args.push(&**a);
                    head = f;
                }
                args.reverse();
                if !matches!(head, Expr::Var(_)) {
                    return self.synth_applied(head, &args, demand);
                }
                let mut das = Vec::with_capacity(args.len());
                for a in &args {
                    das.push(self.synth(a, None)?);
                }
                let result = match demand {
                    Some(t) => t,
                    None => self.atom(),
                };
                let hty = das
                    .iter()
                    .rev()
                    .fold(result, |acc, d| StrictType::fun(d.ty().clone(), acc));
                let mut d = self.synth(head, Some(hty))?;
                for da in das {
                    d = sys.app(d, vec![da])?;
                }
                Ok(d)
            }
            Expr::Cut(t, k) if !matches!(**t, Expr::Var(_)) => {
                match self.synth_cut(t, k, demand.clone()) {
                    Err(SynthError::Case(_)) => {
                        let mark = self.atoms;
                        let dt = self.synth(t, None)?;
                        let dt = self.extend_arity(dt, ctx_args(k).len(), mark);
                        let dk = self.synth_ctx_at(k, demand, Some(dt.ty().clone()))?;
                        Ok(sys.cut(vec![dt], dk)?)
                    }
                    other => other,
                }
            }
            Expr::Cut(t, k) => {
                let dk = self.synth_ctx(k, demand)?;
                let members: Vec<StrictType> = dk.stoup().unwrap().iter().cloned().collect();
                let mut dts = Vec::with_capacity(members.len());
                for m in members {
                    dts.push(self.synth(t, Some(m))?);
                }
                Ok(sys.cut(dts, dk)?)
            }
            Expr::Sel(..) | Expr::Cons(..) => self.synth_ctx(e, demand),
        }
    }

    /// The hinted type of `x`, or a fresh atom.
    fn hinted(&mut self, x: &Var) -> StrictType {
        match self.hints.get(x) {
            Some(t) => t.clone(),
            None => self.atom(),
        }
    }

    /// A cut whose head is not a variable: the context is typed first and
    /// the head once per stoup member, solving for the atoms issued on the
    /// way.
    fn synth_cut(&mut self, t: &Expr, k: &Expr, demand: Option<StrictType>) -> Res_<Derivation> {
        let mark = self.atoms;
        let dk = self.synth_ctx_at(k, demand, None)?;
        let mut s = Subst::new();
        let mut dts = Vec::new();
        for m in dk.stoup().unwrap().iter() {
            let dt = self.synth(t, None)?;
            if !unify(dt.ty(), m, mark, &mut s) {
                return Err(SynthError::Case(format!(
                    "{t} has type {}, but the context expects {m}",
                    dt.ty()
                )));
            }
            dts.push(dt);
        }
        let dts = distinct(dts.iter().map(|d| substitute(d, &s)).collect());
        Ok(self.sys.cut(dts, substitute(&dk, &s))?)
    }

    /// Give `d` at least `n` arrows by instantiating its final atom, when
    /// that atom was issued after `mark`.
    fn extend_arity(&mut self, d: Derivation, n: usize, mark: u32) -> Derivation {
        let mut ty = d.ty().clone();
        let mut have = 0;
        while let StrictType::Arrow(_, c) = ty {
            ty = *c;
            have += 1;
        }
        let StrictType::Atom(last) = ty else {
            unreachable!()
        };
        if have >= n || !local(&last, mark) {
            return d;
        }
        let mut chain = self.atom();
        for _ in have..n {
            chain = StrictType::fun(self.atom(), chain);
        }
        substitute(&d, &Subst::from([(last, chain)]))
    }

    /// Make the binder `x` of `d` have exactly `want`, by padding or by
    /// instantiating atoms issued after `mark`.
    fn meet_binder(&mut self, d: Derivation, x: &Var, want: &IType, mark: u32) -> Res_<Derivation> {
        let sys = self.sys;
        let Some(t) = d.basis().get(x).cloned() else {
            return Ok(d);
        };
        if &t == want {
            return Ok(d);
        }
        if t.subset_of(want) {
            return Ok(sys.pad(&d, &Basis::single(x.clone(), want.clone()))?);
        }
        let mut s = Subst::new();
        if unify_itype(&t, want, mark, &mut s) {
            let d = substitute(&d, &s);
            if d.basis().get(x) == Some(want) {
                return Ok(d);
            }
        }
        Err(SynthError::Case(format!(
            "{x} is used at {t}, but {want} is demanded"
        )))
    }

    /// A derivation of `head` applied to `args`: the head is typed on its
    /// own, then each argument is typed once per domain member and the
    /// atoms issued on the way are solved for.
    fn synth_applied(
        &mut self,
        head: &Expr,
        args: &[&Expr],
        demand: Option<StrictType>,
    ) -> Res_<Derivation> {
        let mark = self.atoms;
        let mut s = Subst::new();
        let dh = self.synth(head, None)?;
        let mut ty = dh.ty().clone();
        let mut groups = Vec::with_capacity(args.len());
        for a in args {
            ty = resolve(&ty, &s);
            if let StrictType::Atom(p) = &ty {
                let arrow = StrictType::fun(self.atom(), self.atom());
                if !unify(&StrictType::atom(p), &arrow, mark, &mut s) {
                    return Err(SynthError::Case(format!(
                        "{head} takes fewer arguments than given"
                    )));
                }
                ty = arrow;
            }
            let StrictType::Arrow(dom, cod) = ty else {
                unreachable!()
            };
            let mut group = Vec::with_capacity(dom.len());
            for m in dom.iter() {
                let da = self.synth(a, None)?;
                if !unify(da.ty(), m, mark, &mut s) {
                    return Err(SynthError::Case(format!(
                        "{a} has type {}, but {m} is demanded",
                        da.ty()
                    )));
                }
                group.push(da);
            }
            groups.push(group);
            ty = *cod;
        }
        if let Some(want) = &demand {
            if !unify(&ty, want, mark, &mut s) {
                return Err(SynthError::Case(format!(
                    "{head} returns {}, but {want} is demanded",
                    resolve(&ty, &s)
                )));
            }
        }
        let mut d = substitute(&dh, &s);
        for g in groups {
            d = self
                .sys
                .app(d, distinct(g.iter().map(|x| substitute(x, &s)).collect()))?;
        }
        Ok(d)
    }

    fn fallback(&mut self, d: &Derivation, x: &Var) -> IType {
        match d.basis().get(x) {
            Some(t) => t.clone(),
            None => IType::single(self.atom()),
        }
    }

    /// A derivation of the context `k`, whose type is `demand` when given.
    pub fn synth_ctx(&mut self, k: &Expr, demand: Option<StrictType>) -> Res_<Derivation> {
        self.synth_ctx_at(k, demand, None)
    }

    /// As [`Synth::synth_ctx`], with the stoup fixed to the single type
    /// `stoup` when given.
    fn synth_ctx_at(
        &mut self,
        k: &Expr,
        demand: Option<StrictType>,
        stoup: Option<StrictType>,
    ) -> Res_<Derivation> {
        self.tick()?;
        if let Some(&rule) = rules_at(k, self.sys.base, self.sys.res).first() {
            let r = Redex { path: vec![], rule };
            let k2 = step(k, &r, self.sys.base, self.sys.res, &mut self.supply)
                .map_err(|x| SynthError::Case(x.to_string()))?;
            let d2 = self.synth_ctx_at(&k2, demand, stoup)?;
            return self.expand(&d2, k, &[], rule);
        }
        let sys = self.sys;
        match k {
            Expr::Sel(x, t) => {
                let mark = self.atoms;
                let saved = match &stoup {
                    Some(s) => self.hints.insert(x.clone(), s.clone()),
                    None => self.hints.remove(x),
                };
                let dt = self.synth(t, demand);
                match saved {
                    Some(old) => self.hints.insert(x.clone(), old),
                    None => self.hints.remove(x),
                };
                let dt = dt?;
                let (dt, fb) = match stoup {
                    None => {
                        let fb = self.fallback(&dt, x);
                        (dt, fb)
                    }
                    Some(s) => {
                        let want = IType::single(s);
                        (self.meet_binder(dt, x, &want, mark)?, want)
                    }
                };
                let dt = widen(sys, dt, x, &fb)?;
                Ok(sys.sel(x, dt, &fb)?)
            }
            Expr::Cons(t, k2) => match stoup {
                None => {
                    let dk = self.synth_ctx_at(k2, demand, None)?;
                    let dt = self.synth(t, None)?;
                    Ok(sys.cons(vec![dt], dk)?)
                }
                Some(StrictType::Arrow(dom, cod)) => {
                    let dk = self.synth_ctx_at(k2, demand, Some(*cod))?;
                    let mut dts = Vec::with_capacity(dom.len());
                    for a in dom.iter() {
                        dts.push(self.synth(t, Some(a.clone()))?);
                    }
                    Ok(sys.cons(dts, dk)?)
                }
                Some(s) => Err(SynthError::Case(format!(
                    "a list context cannot have the atomic stoup {s}"
                ))),
            },
            Expr::Weak(x, b) => {
                let db = self.synth_ctx_at(b, demand, stoup)?;
                let t = IType::single(self.hinted(x));
                Ok(sys.weak(x, t, db)?)
            }
            Expr::Contr(z, x1, x2, b) => {
                let db = self.synth_ctx_at(b, demand, stoup)?;
                let (f1, f2) = (self.fallback(&db, x1), self.fallback(&db, x2));
                Ok(sys.cont(z, x1, x2, db, &f1, &f2)?)
            }
            _ => Err(SynthError::Case(format!("{k} is not a context"))),
        }
    }

    /// From a derivation `d2` of `step(e, path, rule)`, a derivation of `e`
    /// with the same type.
    pub fn expand(
        &mut self,
        d2: &Derivation,
        e: &Expr,
        path: &[usize],
        rule: Rule,
    ) -> Res_<Derivation> {
        let Some((&i, rest)) = path.split_first() else {
            return self.expand_root(d2, e, rule);
        };
        let sys = self.sys;
        let p = &d2.premises;
        let n = p.len();
        let child = e.children()[i];
        Ok(match e {
            Expr::Abs(x, _) | Expr::Sel(x, _) => {
                let body = self.expand(&p[0], child, rest, rule)?;
                let fb = binder_type(d2);
                if matches!(e, Expr::Abs(..)) {
                    sys.abs(x, body, &fb)?
                } else {
                    sys.sel(x, body, &fb)?
                }
            }
            Expr::Weak(x, _) => {
                let body = self.expand(&p[0], child, rest, rule)?;
                sys.weak(x, d2.basis().get(x).unwrap().clone(), body)?
            }
            Expr::Contr(z, x1, x2, _) => {
                let (f1, f2) = leaf_types(d2, &p[0], z, x1, x2);
                let body = self.expand(&p[0], child, rest, rule)?;
                sys.cont(z, x1, x2, body, &f1, &f2)?
            }
            Expr::App(..) if i == 0 => {
                let f = self.expand(&p[0], child, rest, rule)?;
                sys.app(f, p[1..].to_vec())?
            }
            Expr::App(..) => {
                let mut args = Vec::new();
                for a in &p[1..] {
                    args.push(self.expand(a, child, rest, rule)?);
                }
                sys.app(p[0].clone(), args)?
            }
            Expr::Cut(..) | Expr::Cons(..) => {
                let (ts, k) = if i == 0 {
                    let mut ts = Vec::new();
                    for t in &p[..n - 1] {
                        ts.push(self.expand(t, child, rest, rule)?);
                    }
                    (ts, p[n - 1].clone())
                } else {
                    (
                        p[..n - 1].to_vec(),
                        self.expand(&p[n - 1], child, rest, rule)?,
                    )
                };
                if matches!(e, Expr::Cut(..)) {
                    sys.cut(ts, k)?
                } else {
                    sys.cons(ts, k)?
                }
            }
            Expr::Var(_) => return Err(SynthError::Case("path runs past a variable".into())),
        })
    }

    fn expand_root(&mut self, d2: &Derivation, e: &Expr, rule: Rule) -> Res_<Derivation> {
        let sys = self.sys;
        let p = &d2.premises;
        let case = || SynthError::Case(format!("{rule} expansion of {e} from {}", d2.subject()));
        match (rule, e) {
            (Rule::Beta, Expr::App(f, arg)) => {
                let Expr::Abs(x, n) = &**f else {
                    return Err(case());
                };
                let (dn, ts) = self.inverse(d2, n, x, arg)?;
                let ts = ts
                    .into_iter()
                    .map(|t| drop_bound(sys, t))
                    .collect::<Result<Vec<_>, _>>()?;
                let dn = drop_stray(sys, dn, n, &ts)?;
                let alpha = itype_of(&ts);
                let dn = widen(sys, dn, x, &alpha)?;
                let abs = sys.abs(x, dn, &alpha)?;
                Ok(sys.app(abs, ts)?)
            }
            (Rule::Beta, Expr::Cut(f, _)) => {
                let Expr::Abs(x, _) = &**f else {
                    return Err(case());
                };
                let (dus, dsel) = split_last(p);
                let alpha = dsel.stoup().ok_or_else(case)?.clone();
                let (dts, dk) = split_last(&dsel.premises[0].premises);
                let mut abss = Vec::with_capacity(dts.len());
                for dt in dts {
                    abss.push(sys.abs(x, widen(sys, dt.clone(), x, &alpha)?, &alpha)?);
                }
                let cons = sys.cons(dus.to_vec(), dk.clone())?;
                Ok(sys.cut(abss, cons)?)
            }
            (Rule::Sigma, Expr::Cut(t, k)) => {
                let Expr::Sel(x, v) = &**k else {
                    return Err(case());
                };
                let (dv, ts) = self.inverse(d2, v, x, t)?;
                let ts = ts
                    .into_iter()
                    .map(|t| drop_bound(sys, t))
                    .collect::<Result<Vec<_>, _>>()?;
                let dv = drop_stray(sys, dv, v, &ts)?;
                let alpha = itype_of(&ts);
                let sel = sys.sel(x, widen(sys, dv, x, &alpha)?, &alpha)?;
                Ok(sys.cut(ts, sel)?)
            }
            (Rule::Pi, Expr::Cut(tk, k2)) => {
                let Expr::Cut(_, k) = &**tk else {
                    return Err(case());
                };
                let (dts, dkk) = split_last(p);
                let (dks, dk2) = self.inverse_append(dkk, k, k2)?;
                let mut inner = Vec::with_capacity(dks.len());
                for dk in dks {
                    inner.push(sys.cut(dts.to_vec(), dk)?);
                }
                Ok(sys.cut(inner, dk2)?)
            }
            (Rule::Mu, Expr::Sel(x, _)) => {
                let alpha = d2.stoup().ok_or_else(case)?.clone();
                let axs = alpha
                    .iter()
                    .map(|r| sys.ax(x, IType::single(r.clone()), r.clone()))
                    .collect::<Result<Vec<_>, _>>()?;
                let cut = sys.cut(axs, d2.clone())?;
                Ok(sys.sel(x, cut, &alpha)?)
            }
            (Rule::Gamma0, Expr::Contr(z, x1, x2, _)) => {
                let (f1, f2) = (IType::single(self.atom()), IType::single(self.atom()));
                Ok(sys.cont(z, x1, x2, d2.clone(), &f1, &f2)?)
            }
            (Rule::Gamma0p, Expr::Contr(z, x1, x2, b)) => {
                let Expr::Var(leaf) = &**b else {
                    return Err(case());
                };
                let t = d2.basis().get(z).ok_or_else(case)?.clone();
                let ax = sys.ax(leaf, t.clone(), d2.ty().clone())?;
                Ok(sys.cont(z, x1, x2, ax, &t, &t)?)
            }
            (Rule::Gamma1 | Rule::Gamma4, Expr::Contr(z, x1, x2, b)) => {
                let (Expr::Abs(y, _) | Expr::Sel(y, _)) = &**b else {
                    return Err(case());
                };
                let dc = &p[0];
                let (f1, f2) = leaf_types(dc, &dc.premises[0], z, x1, x2);
                let fb = binder_type(d2);
                let inner = dc.premises[0].clone();
                let bound = if rule == Rule::Gamma1 {
                    sys.abs(y, inner, &fb)?
                } else {
                    sys.sel(y, inner, &fb)?
                };
                Ok(sys.cont(z, x1, x2, bound, &f1, &f2)?)
            }
            (
                Rule::Gamma2 | Rule::Gamma3 | Rule::Gamma5 | Rule::Gamma6,
                Expr::Contr(z, x1, x2, _),
            ) => {
                let (mut first, mut second) = sides(d2);
                let target = if matches!(rule, Rule::Gamma2 | Rule::Gamma5) {
                    &mut first
                } else {
                    &mut second
                };
                let wrapped = std::mem::take(target);
                let (f1, f2) = {
                    let union = Basis::union_all(wrapped.iter().map(|w| w.premises[0].basis()));
                    let zt = Basis::union_all(wrapped.iter().map(Derivation::basis))
                        .get(z)
                        .cloned();
                    let pick = |v: &Var| {
                        union
                            .get(v)
                            .cloned()
                            .or_else(|| zt.clone())
                            .unwrap_or_else(|| IType::single(StrictType::atom("p0")))
                    };
                    (pick(x1), pick(x2))
                };
                *target = wrapped.iter().map(|w| w.premises[0].clone()).collect();
                let body = rebuild(sys, d2.subject(), first, second)?;
                Ok(sys.cont(z, x1, x2, body, &f1, &f2)?)
            }
            (Rule::Omega1 | Rule::Omega4, Expr::Abs(x, _) | Expr::Sel(x, _)) => {
                let Expr::Weak(y, _) = d2.subject() else {
                    return Err(case());
                };
                let t = d2.basis().get(y).unwrap().clone();
                let bound = &p[0];
                let fb = binder_type(bound);
                let inner = sys.weak(y, t, bound.premises[0].clone())?;
                Ok(if rule == Rule::Omega1 {
                    sys.abs(x, inner, &fb)?
                } else {
                    sys.sel(x, inner, &fb)?
                })
            }
            (Rule::Omega2 | Rule::Omega3 | Rule::Omega5 | Rule::Omega6, _) => {
                let weak_first = matches!(rule, Rule::Omega2 | Rule::Omega5);
                let side = if weak_first {
                    e.children()[0]
                } else {
                    e.children()[1]
                };
                let Expr::Weak(x, _) = side else {
                    return Err(case());
                };
                let t = d2.basis().get(x).ok_or_else(case)?.clone();
                let bin = match d2.subject() {
                    Expr::Weak(y, _) if y == x => &p[0],
                    _ => d2,
                };
                let (mut first, mut second) = sides(bin);
                let target = if weak_first { &mut first } else { &mut second };
                *target = std::mem::take(target)
                    .into_iter()
                    .map(|d| sys.weak(x, t.clone(), d))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(rebuild(sys, e, first, second)?)
            }
            (Rule::GammaOmega1, Expr::Contr(z, x1, x2, _)) => {
                let Expr::Weak(y, _) = d2.subject() else {
                    return Err(case());
                };
                let t = d2.basis().get(y).unwrap().clone();
                let dc = &p[0];
                let (f1, f2) = leaf_types(dc, &dc.premises[0], z, x1, x2);
                let inner = sys.weak(y, t, dc.premises[0].clone())?;
                Ok(sys.cont(z, x1, x2, inner, &f1, &f2)?)
            }
            (Rule::GammaOmega2, Expr::Contr(z, x1, x2, b)) => {
                let Expr::Weak(w, m) = &**b else {
                    return Err(case());
                };
                let other = if w == x1 { x2 } else { x1 };
                let back = rename_derivation(d2, &BTreeMap::from([(z.clone(), other.clone())]));
                let dm = align(&back, m)?;
                let t = dm.basis().get(other).ok_or_else(case)?.clone();
                let inner = sys.weak(w, t.clone(), dm)?;
                Ok(sys.cont(z, x1, x2, inner, &t, &t)?)
            }
            _ => Err(case()),
        }
    }

    /// A typing of `n` on its own, for arguments the reduct erased.
    fn alone(&mut self, n: &Expr) -> Res_<Derivation> {
        match n.root_sort() {
            Sort::Term => self.synth(n, None),
            Sort::Context => self.synth_ctx(n, None),
        }
    }

    /// Split a derivation of `m[n/x]` into one of `m` and typings of `n`,
    /// one per member of the type `x` receives.
    pub fn inverse(
        &mut self,
        d: &Derivation,
        m: &Expr,
        x: &Var,
        n: &Expr,
    ) -> Res_<(Derivation, Vec<Derivation>)> {
        let bindings = BTreeMap::from([(x.clone(), n.clone())]);
        let (dm, mut ts) = self.inv(d, m, &bindings)?;
        let mut ts = ts.remove(x).unwrap_or_default();
        if ts.is_empty() {
            ts.push(self.alone(n)?);
        }
        Ok((dm, ts))
    }

    fn inv(
        &mut self,
        d: &Derivation,
        m: &Expr,
        bindings: &BTreeMap<Var, Expr>,
    ) -> Res_<(Derivation, Typings)> {
        let sys = self.sys;
        let touched = m.used_names().iter().any(|v| bindings.contains_key(v));
        if !touched {
            return Ok((d.clone(), Typings::new()));
        }
        let p = &d.premises;
        let case = |what: &str| {
            SynthError::Case(format!(
                "inverse substitution at {what}: {} against {m}",
                d.subject()
            ))
        };
        match m {
            Expr::Var(y) => {
                let n = &bindings[y];
                let dn = align(d, n)?;
                let ty = dn.ty().clone();
                let ax = sys.ax(y, IType::single(ty.clone()), ty)?;
                Ok((ax, Typings::from([(y.clone(), vec![dn])])))
            }
            Expr::Abs(y, b) | Expr::Sel(y, b) => {
                let (db, ts) = self.inv(&p[0], b, bindings)?;
                let fb = binder_type(d);
                let out = if matches!(m, Expr::Abs(..)) {
                    sys.abs(y, db, &fb)?
                } else {
                    sys.sel(y, db, &fb)?
                };
                Ok((out, ts))
            }
            Expr::App(f, a) => {
                let (df, mut ts) = self.inv(&p[0], f, bindings)?;
                let mut args = Vec::new();
                for da in &p[1..] {
                    let (x, t2) = self.inv(da, a, bindings)?;
                    merge(&mut ts, t2);
                    args.push(x);
                }
                Ok((sys.app(df, args)?, ts))
            }
            Expr::Cut(t, k) | Expr::Cons(t, k) => {
                let (dts, dk) = split_last(p);
                let (dk, mut ts) = self.inv(dk, k, bindings)?;
                let mut heads = Vec::new();
                for dt in dts {
                    let (x, t2) = self.inv(dt, t, bindings)?;
                    merge(&mut ts, t2);
                    heads.push(x);
                }
                let out = if matches!(m, Expr::Cut(..)) {
                    sys.cut(heads, dk)?
                } else {
                    sys.cons(heads, dk)?
                };
                Ok((out, ts))
            }
            Expr::Weak(y, b) => {
                if let Some(n) = bindings.get(y) {
                    let mut rest = bindings.clone();
                    rest.remove(y);
                    let body = subst_par(
                        b,
                        &rest.clone().into_iter().collect::<Vec<_>>(),
                        &mut self.supply.clone(),
                    );
                    let fv = fv_set(&body);
                    let extra = fv_ordered(n)
                        .into_iter()
                        .filter(|v| !fv.contains(v))
                        .count();
                    let mut inner = d;
                    for _ in 0..extra {
                        if !matches!(inner.subject(), Expr::Weak(..)) {
                            return Err(case("a weakening block"));
                        }
                        inner = &inner.premises[0];
                    }
                    let (db, mut ts) = self.inv(inner, b, &rest)?;
                    let dn = self.alone(n)?;
                    let out = sys.weak(y, IType::single(dn.ty().clone()), db)?;
                    ts.entry(y.clone()).or_default().push(dn);
                    Ok((out, ts))
                } else {
                    let t = d
                        .basis()
                        .get(y)
                        .ok_or_else(|| case("a weakened variable"))?
                        .clone();
                    let inner = match d.subject() {
                        Expr::Weak(v, _) if v == y => &p[0],
                        _ => d,
                    };
                    let (db, ts) = self.inv(inner, b, bindings)?;
                    Ok((sys.weak(y, t, db)?, ts))
                }
            }
            Expr::Contr(z, a, c, body) => {
                let Some(n) = bindings.get(z) else {
                    let (fa, fc) = leaf_types(d, &p[0], z, a, c);
                    let (db, ts) = self.inv(&p[0], body, bindings)?;
                    return Ok((sys.cont(z, a, c, db, &fa, &fc)?, ts));
                };
                let zs = fv_ordered(n);
                let mut left = BTreeMap::new();
                let mut right = BTreeMap::new();
                let mut inner = d;
                for v in &zs {
                    match inner.subject() {
                        Expr::Contr(h, v1, v2, _) if h == v => {
                            left.insert(v.clone(), v1.clone());
                            right.insert(v.clone(), v2.clone());
                            inner = &inner.premises[0];
                        }
                        _ => return Err(case("a contraction block")),
                    }
                }
                let mut rest = bindings.clone();
                rest.remove(z);
                rest.insert(a.clone(), n.rename(&left));
                rest.insert(c.clone(), n.rename(&right));
                let (db, mut ts) = self.inv(inner, body, &rest)?;
                let back = |ds: Option<Vec<Derivation>>,
                            map: &BTreeMap<Var, Var>|
                 -> Res_<Vec<Derivation>> {
                    let inv: BTreeMap<Var, Var> =
                        map.iter().map(|(k, v)| (v.clone(), k.clone())).collect();
                    ds.unwrap_or_default()
                        .iter()
                        .map(|dd| Ok(align(&rename_derivation(dd, &inv), n)?))
                        .collect()
                };
                let ta = back(ts.remove(a), &left)?;
                let tc = back(ts.remove(c), &right)?;
                let mut all: Vec<Derivation> = ta.iter().chain(tc.iter()).cloned().collect();
                if all.is_empty() {
                    all.push(self.alone(n)?);
                }
                let fallback = itype_of(&all);
                let out = sys.cont(z, a, c, db, &fallback, &fallback)?;
                ts.insert(z.clone(), all);
                Ok((out, ts))
            }
        }
    }

    /// Split a derivation of `k @ k2` into typings of `k`, one per member of
    /// the stoup of `k2`, all with the stoup of `k @ k2`, and one of `k2`.
    fn inverse_append(
        &mut self,
        d: &Derivation,
        k: &Expr,
        k2: &Expr,
    ) -> Res_<(Vec<Derivation>, Derivation)> {
        let sys = self.sys;
        let p = &d.premises;
        let case = || SynthError::Case(format!("inverse append: {} against {k}", d.subject()));
        match k {
            Expr::Sel(x, _) => {
                let alpha = d.stoup().ok_or_else(case)?.clone();
                let (dvs, dk2) = split_last(&p[0].premises);
                let mut dks = Vec::with_capacity(dvs.len());
                for dv in dvs {
                    dks.push(sys.sel(x, widen(sys, dv.clone(), x, &alpha)?, &alpha)?);
                }
                Ok((dks, dk2.clone()))
            }
            Expr::Cons(_, k1) => {
                let (dus, d1) = split_last(p);
                let (dk1s, dk2) = self.inverse_append(d1, k1, k2)?;
                let dks = dk1s
                    .into_iter()
                    .map(|dk1| sys.cons(dus.to_vec(), dk1))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((dks, dk2))
            }
            Expr::Weak(x, k1) => {
                let t = d.basis().get(x).ok_or_else(case)?.clone();
                let inner = match d.subject() {
                    Expr::Weak(v, _) if v == x => &p[0],
                    _ => d,
                };
                let (dk1s, dk2) = self.inverse_append(inner, k1, k2)?;
                let dks = dk1s
                    .into_iter()
                    .map(|dk1| sys.weak(x, t.clone(), dk1))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((dks, dk2))
            }
            Expr::Contr(z, a, c, k1) => {
                let (fa, fc) = leaf_types(d, &p[0], z, a, c);
                let (dk1s, dk2) = self.inverse_append(&p[0], k1, k2)?;
                let dks = dk1s
                    .into_iter()
                    .map(|dk1| sys.cont(z, a, c, dk1, &fa, &fc))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((dks, dk2))
            }
            _ => Err(case()),
        }
    }
}

fn merge(into: &mut Typings, more: Typings) {
    for (k, v) in more {
        into.entry(k).or_default().extend(v);
    }
}

fn split_last(p: &[Derivation]) -> (&[Derivation], &Derivation) {
    let (a, b) = p.split_at(p.len() - 1);
    (a, &b[0])
}

fn itype_of(ds: &[Derivation]) -> IType {
    IType::new(ds.iter().map(|d| d.ty().clone()).collect())
}

type Subst = BTreeMap<String, StrictType>;

/// An atom issued after `mark`, which unification may instantiate.
fn local(a: &str, mark: u32) -> bool {
    a.strip_prefix('p')
        .and_then(|n| n.parse::<u32>().ok())
        .is_some_and(|n| n > mark)
}

fn resolve(t: &StrictType, s: &Subst) -> StrictType {
    t.map_atoms(&mut |a| match s.get(a) {
        Some(u) => resolve(u, s),
        None => StrictType::atom(a),
    })
}

fn occurs(a: &str, t: &StrictType) -> bool {
    let mut hit = false;
    t.for_each_atom(&mut |b| hit |= a == b);
    hit
}

/// Extend `s` so that `a` and `b` become equal, instantiating only atoms
/// issued after `mark`. Intersections are matched member by member in
/// their sorted order.
fn unify(a: &StrictType, b: &StrictType, mark: u32, s: &mut Subst) -> bool {
    let (a, b) = (resolve(a, s), resolve(b, s));
    if a == b {
        return true;
    }
    match (&a, &b) {
        (StrictType::Atom(x), _) if local(x, mark) && !occurs(x, &b) => {
            s.insert(x.clone(), b);
            true
        }
        (_, StrictType::Atom(y)) if local(y, mark) && !occurs(y, &a) => {
            s.insert(y.clone(), a);
            true
        }
        (StrictType::Arrow(d1, c1), StrictType::Arrow(d2, c2)) => {
            unify_itype(d1, d2, mark, s) && unify(c1, c2, mark, s)
        }
        _ => false,
    }
}

fn unify_itype(a: &IType, b: &IType, mark: u32, s: &mut Subst) -> bool {
    let (a, b) = (
        a.map_atoms(&mut |x| resolve(&StrictType::atom(x), s)),
        b.map_atoms(&mut |x| resolve(&StrictType::atom(x), s)),
    );
    a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| unify(x, y, mark, s))
}

/// Apply `s` throughout `d`. Substituting for atoms maps valid derivations
/// to valid derivations; groups are re-sorted.
fn substitute(d: &Derivation, s: &Subst) -> Derivation {
    if s.is_empty() {
        return d.clone();
    }
    let mut f = |x: &str| resolve(&StrictType::atom(x), s);
    let mut out = d.clone();
    out.concl.basis = Basis(
        d.basis()
            .iter()
            .map(|(v, t)| (v.clone(), t.map_atoms(&mut f)))
            .collect(),
    );
    out.concl.stoup = d.stoup().map(|t| t.map_atoms(&mut f));
    out.concl.ty = d.ty().map_atoms(&mut f);
    out.premises = d.premises.iter().map(|p| substitute(p, s)).collect();
    let n = out.premises.len();
    let group = match d.subject() {
        Expr::App(..) => 1..n,
        Expr::Cut(..) | Expr::Cons(..) => 0..n - 1,
        _ => 0..0,
    };
    out.premises[group.clone()].sort_by(|x, y| x.ty().cmp(y.ty()));
    out
}

/// One derivation per type.
fn distinct(mut ds: Vec<Derivation>) -> Vec<Derivation> {
    ds.sort_by(|x, y| x.ty().cmp(y.ty()));
    ds.dedup_by(|x, y| x.ty() == y.ty());
    ds
}

/// The terms a context supplies before its selection.
fn ctx_args(k: &Expr) -> Vec<&Expr> {
    match k {
        Expr::Cons(t, k) => std::iter::once(&**t).chain(ctx_args(k)).collect(),
        Expr::Weak(_, k) | Expr::Contr(_, _, _, k) => ctx_args(k),
        _ => Vec::new(),
    }
}

/// Remove from `d` the variables of the argument typings `ts` that `body`
/// does not use, so the two bases can be combined.
/// Remove from the conclusion basis the variables the subject binds, which
/// implicit weakening may have carried in from a reduct.
fn drop_bound(sys: Sys, d: Derivation) -> Result<Derivation, BuildError> {
    let bound = d.subject().binders();
    let extra: Vec<Var> = d
        .basis()
        .domain()
        .filter(|v| bound.contains(v))
        .cloned()
        .collect();
    extra.iter().try_fold(d, |acc, v| sys.drop_var(&acc, v))
}

fn drop_stray(
    sys: Sys,
    d: Derivation,
    body: &Expr,
    ts: &[Derivation],
) -> Result<Derivation, BuildError> {
    let used = fv_set(body);
    let stray: Vec<Var> = d
        .basis()
        .domain()
        .filter(|v| !used.contains(v) && ts.iter().any(|t| t.basis().contains(v)))
        .cloned()
        .collect();
    stray.iter().try_fold(d, |acc, v| sys.drop_var(&acc, v))
}

/// Make the type of `x` in `d` exactly `alpha`, growing it if needed.
fn widen(sys: Sys, d: Derivation, x: &Var, alpha: &IType) -> Result<Derivation, BuildError> {
    match d.basis().get(x) {
        Some(t) if t == alpha => Ok(d),
        None if sys.res.weakening => Ok(d),
        _ => sys.pad(&d, &Basis::single(x.clone(), alpha.clone())),
    }
}

/// The type a binder node gives its variable.
fn binder_type(d: &Derivation) -> IType {
    if let Some(s) = d.stoup() {
        if matches!(d.subject(), Expr::Sel(..)) {
            return s.clone();
        }
    }
    match d.ty() {
        StrictType::Arrow(dom, _) if matches!(d.subject(), Expr::Abs(..)) => dom.clone(),
        _ => IType::single(StrictType::atom("p0")),
    }
}

/// Leaf types of a contraction node, falling back to the head's type.
fn leaf_types(d: &Derivation, premise: &Derivation, z: &Var, x1: &Var, x2: &Var) -> (IType, IType) {
    let zt = d
        .basis()
        .get(z)
        .cloned()
        .unwrap_or_else(|| IType::single(StrictType::atom("p0")));
    let pb = premise.basis();
    (
        pb.get(x1).cloned().unwrap_or_else(|| zt.clone()),
        pb.get(x2).cloned().unwrap_or(zt),
    )
}

/// The two premise groups of a binary node: function and arguments, or
/// heads and context.
fn sides(d: &Derivation) -> (Vec<Derivation>, Vec<Derivation>) {
    let p = &d.premises;
    match d.subject() {
        Expr::App(..) => (p[..1].to_vec(), p[1..].to_vec()),
        _ => (p[..p.len() - 1].to_vec(), vec![p[p.len() - 1].clone()]),
    }
}

fn rebuild(
    sys: Sys,
    like: &Expr,
    first: Vec<Derivation>,
    second: Vec<Derivation>,
) -> Result<Derivation, BuildError> {
    let like = match like {
        Expr::Contr(_, _, _, b) => &**b,
        other => other,
    };
    match like {
        Expr::App(..) => sys.app(first.into_iter().next().unwrap(), second),
        Expr::Cut(..) => sys.cut(first, second.into_iter().next().unwrap()),
        Expr::Cons(..) => sys.cons(first, second.into_iter().next().unwrap()),
        other => Err(BuildError(format!("{other} is not a binary node"))),
    }
}

/// A derivation of a redex-free expression, by the recursion of the
/// grammar: atoms `p1, p2, …` in traversal order, heads typed by their
/// arguments, contractions intersecting.
pub fn type_normal_form(e: &Expr, base: Base, res: Res) -> Result<Derivation, SynthError> {
    if !redexes(e, base, res).is_empty() {
        return Err(SynthError::Case(format!("{e} is not a normal form")));
    }
    let sys = Sys::new(base, res);
    let mut s = Synth::new(sys, e, usize::MAX);
    Ok(drop_bound(sys, s.alone(e)?)?)
}

/// A derivation of `e[n/x]` split into one of `e`, in which `x` has the
/// intersection of the returned types, and typings of `n`.
pub fn inverse_subst_typing(
    sys: Sys,
    d: &Derivation,
    m: &Expr,
    x: &Var,
    n: &Expr,
    fuel: usize,
) -> Result<(Derivation, Vec<Derivation>), SynthError> {
    let mut s = Synth::new(sys, d.subject(), fuel);
    s.supply.observe(m);
    s.supply.observe(n);
    s.inverse(d, m, x, n)
}

/// Head subject expansion: from a derivation of the reduct of `e` at
/// `redex`, a derivation of `e` with the same type. The reduct is computed
/// with a supply above `e`; `d2` may use other bound names.
pub fn expand_head(
    sys: Sys,
    d2: &Derivation,
    e: &Expr,
    redex: &Redex,
    fuel: usize,
) -> Result<Derivation, SynthError> {
    let mut supply = Supply::above(e);
    let e2 = step(e, redex, sys.base, sys.res, &mut supply)
        .map_err(|x| SynthError::Case(x.to_string()))?;
    let d2 = align(d2, &e2)?;
    let mut s = Synth::new(sys, e, fuel);
    s.supply = supply;
    Ok(drop_bound(sys, s.expand(&d2, e, &redex.path, redex.rule)?)?)
}

/// A checked derivation of `e`, provided the oracle establishes strong
/// normalisation within `fuel` classes.
pub fn synthesize(e: &Expr, base: Base, res: Res, fuel: usize) -> Result<Derivation, SynthError> {
    match is_sn(e, base, res, fuel) {
        SnVerdict::StronglyNormalising { .. } => {}
        other => return Err(SynthError::NotSn(other.to_string())),
    }
    let sys = Sys::new(base, res);
    let mut s = Synth::new(sys, e, fuel.saturating_mul(20));
    let d = drop_bound(sys, s.alone(e)?)?;
    check_derivation(&d, base, res).map_err(|x| SynthError::Invalid(x.to_string()))?;
    Ok(d)
}
