use std::collections::BTreeMap;
use std::fmt;

use super::{Basis, Derivation, Sys};
use crate::syntax::{Base, Expr, IType, Res, StrictType, Var};

/// A simple typing: basis, optional stoup, type, and its derivation (every
/// multi-premise group has a single premise).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleTyping {
    pub basis: Basis,
    pub stoup: Option<StrictType>,
    pub ty: StrictType,
    pub derivation: Derivation,
}

/// No simple typing exists; `constraint` names the clash found.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("untypeable: {constraint}")]
pub struct Untypeable {
    pub constraint: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Ty {
    V(u32),
    Arrow(Box<Ty>, Box<Ty>),
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::V(n) => write!(f, "'{n}"),
            Ty::Arrow(a, b) if matches!(**a, Ty::V(_)) => write!(f, "{a} -> {b}"),
            Ty::Arrow(a, b) => write!(f, "({a}) -> {b}"),
        }
    }
}

type Env = BTreeMap<Var, Ty>;

struct Infer {
    res: Res,
    next: u32,
    subst: BTreeMap<u32, Ty>,
    /// Types recorded per node path: the variable's type at a leaf, the
    /// binder's at an abstraction or selection, the weakened variable's,
    /// and both leaves' at a contraction.
    notes: BTreeMap<Vec<usize>, Vec<Ty>>,
}

struct Out {
    env: Env,
    stoup: Option<Ty>,
    ty: Ty,
}

impl Infer {
    fn fresh(&mut self) -> Ty {
        self.next += 1;
        Ty::V(self.next - 1)
    }

    fn resolve(&self, t: &Ty) -> Ty {
        match t {
            Ty::V(n) => match self.subst.get(n) {
                Some(u) => self.resolve(u),
                None => t.clone(),
            },
            Ty::Arrow(a, b) => Ty::Arrow(Box::new(self.resolve(a)), Box::new(self.resolve(b))),
        }
    }

    fn occurs(&self, n: u32, t: &Ty) -> bool {
        match self.resolve(t) {
            Ty::V(m) => m == n,
            Ty::Arrow(a, b) => self.occurs(n, &a) || self.occurs(n, &b),
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty) -> Result<(), Untypeable> {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (&a, &b) {
            (Ty::V(n), Ty::V(m)) if n == m => Ok(()),
            (Ty::V(n), t) | (t, Ty::V(n)) => {
                if self.occurs(*n, t) {
                    return Err(Untypeable {
                        constraint: format!("{a} = {b} fails the occurs check"),
                    });
                }
                self.subst.insert(*n, t.clone());
                Ok(())
            }
            (Ty::Arrow(a1, b1), Ty::Arrow(a2, b2)) => {
                self.unify(a1, a2)?;
                self.unify(b1, b2)
            }
        }
    }

    fn merge(&mut self, g: Env, d: Env) -> Result<Env, Untypeable> {
        let mut out = g;
        for (x, t) in d {
            match out.get(&x).cloned() {
                Some(s) => {
                    if self.res.contraction {
                        return Err(Untypeable {
                            constraint: format!(
                                "{x} occurs in both parts without explicit contraction"
                            ),
                        });
                    }
                    self.unify(&s, &t)?;
                }
                None => {
                    out.insert(x, t);
                }
            }
        }
        Ok(out)
    }

    fn take(&mut self, env: &mut Env, x: &Var) -> Ty {
        env.remove(x).unwrap_or_else(|| self.fresh())
    }

    fn go(&mut self, e: &Expr, path: &mut Vec<usize>) -> Result<Out, Untypeable> {
        let child = |me: &mut Infer, i: usize, c: &Expr, path: &mut Vec<usize>| {
            path.push(i);
            let r = me.go(c, path);
            path.pop();
            r
        };
        match e {
            Expr::Var(x) => {
                let t = self.fresh();
                self.notes.insert(path.clone(), vec![t.clone()]);
                Ok(Out {
                    env: Env::from([(x.clone(), t.clone())]),
                    stoup: None,
                    ty: t,
                })
            }
            Expr::Abs(x, m) => {
                let mut o = child(self, 0, m, path)?;
                let a = self.take(&mut o.env, x);
                self.notes.insert(path.clone(), vec![a.clone()]);
                Ok(Out {
                    env: o.env,
                    stoup: None,
                    ty: Ty::Arrow(Box::new(a), Box::new(o.ty)),
                })
            }
            Expr::Sel(x, t) => {
                let mut o = child(self, 0, t, path)?;
                let a = self.take(&mut o.env, x);
                self.notes.insert(path.clone(), vec![a.clone()]);
                Ok(Out {
                    env: o.env,
                    stoup: Some(a),
                    ty: o.ty,
                })
            }
            Expr::App(m, n) => {
                let f = child(self, 0, m, path)?;
                let a = child(self, 1, n, path)?;
                let r = self.fresh();
                self.unify(&f.ty, &Ty::Arrow(Box::new(a.ty), Box::new(r.clone())))?;
                let env = self.merge(f.env, a.env)?;
                Ok(Out {
                    env,
                    stoup: None,
                    ty: r,
                })
            }
            Expr::Cut(t, k) => {
                let a = child(self, 0, t, path)?;
                let c = child(self, 1, k, path)?;
                self.unify(&a.ty, c.stoup.as_ref().expect("context"))?;
                let env = self.merge(a.env, c.env)?;
                Ok(Out {
                    env,
                    stoup: None,
                    ty: c.ty,
                })
            }
            Expr::Cons(t, k) => {
                let a = child(self, 0, t, path)?;
                let c = child(self, 1, k, path)?;
                let stoup = Ty::Arrow(Box::new(a.ty), Box::new(c.stoup.expect("context")));
                let env = self.merge(a.env, c.env)?;
                Ok(Out {
                    env,
                    stoup: Some(stoup),
                    ty: c.ty,
                })
            }
            Expr::Contr(z, x, y, m) => {
                let mut o = child(self, 0, m, path)?;
                let a = self.take(&mut o.env, x);
                let b = self.take(&mut o.env, y);
                self.unify(&a, &b)?;
                self.notes.insert(path.clone(), vec![a.clone(), b]);
                o.env.insert(z.clone(), a);
                Ok(o)
            }
            Expr::Weak(x, m) => {
                let mut o = child(self, 0, m, path)?;
                let a = self.fresh();
                self.notes.insert(path.clone(), vec![a.clone()]);
                o.env.insert(x.clone(), a);
                Ok(o)
            }
        }
    }
}

struct Namer<'a> {
    inf: &'a Infer,
    names: BTreeMap<u32, String>,
}

fn atom_name(i: usize) -> String {
    let letter = (b'a' + (i % 26) as u8) as char;
    if i < 26 {
        letter.to_string()
    } else {
        format!("{letter}{}", i / 26)
    }
}

impl Namer<'_> {
    fn visit(&mut self, t: &Ty) {
        match self.inf.resolve(t) {
            Ty::V(n) => {
                let k = self.names.len();
                self.names.entry(n).or_insert_with(|| atom_name(k));
            }
            Ty::Arrow(a, b) => {
                self.visit(&a);
                self.visit(&b)
            }
        }
    }

    fn strict(&mut self, t: &Ty) -> StrictType {
        self.visit(t);
        self.conv(&self.inf.resolve(t))
    }

    fn conv(&self, t: &Ty) -> StrictType {
        match t {
            Ty::V(n) => StrictType::atom(&self.names[n]),
            Ty::Arrow(a, b) => StrictType::fun(self.conv(a), self.conv(b)),
        }
    }
}

/// Principal simple typing by unification. Atoms are named `a`, `b`, …
/// in order of first occurrence in the type, the stoup, the basis and then
/// the rest of the derivation.
pub fn infer_simple(e: &Expr, base: Base, res: Res) -> Result<SimpleTyping, Untypeable> {
    let mut inf = Infer {
        res,
        next: 0,
        subst: BTreeMap::new(),
        notes: BTreeMap::new(),
    };
    let out = inf.go(e, &mut Vec::new())?;
    let mut namer = Namer {
        inf: &inf,
        names: BTreeMap::new(),
    };
    let ty = namer.strict(&out.ty);
    let stoup = out.stoup.as_ref().map(|s| namer.strict(s));
    let basis: Basis = out
        .env
        .iter()
        .map(|(x, t)| (x.clone(), IType::single(namer.strict(t))))
        .collect();
    for ts in inf.notes.values() {
        for t in ts {
            namer.visit(t);
        }
    }
    let notes: BTreeMap<Vec<usize>, Vec<StrictType>> = inf
        .notes
        .iter()
        .map(|(p, ts)| {
            (
                p.clone(),
                ts.iter().map(|t| namer.conv(&inf.resolve(t))).collect(),
            )
        })
        .collect();
    let sys = Sys::new(base, res);
    let derivation =
        build(&sys, e, &notes, &mut Vec::new()).map_err(|b| Untypeable { constraint: b.0 })?;
    let derivation = sys
        .pad_to(&derivation, &basis)
        .map_err(|b| Untypeable { constraint: b.0 })?;
    Ok(SimpleTyping {
        basis,
        stoup,
        ty,
        derivation,
    })
}

fn build(
    sys: &Sys,
    e: &Expr,
    notes: &BTreeMap<Vec<usize>, Vec<StrictType>>,
    path: &mut Vec<usize>,
) -> Result<Derivation, super::BuildError> {
    let note = |i: usize| IType::single(notes[&*path][i].clone());
    let sub = |i: usize, c: &Expr, path: &mut Vec<usize>| {
        path.push(i);
        let r = build(sys, c, notes, path);
        path.pop();
        r
    };
    match e {
        Expr::Var(x) => sys.ax(x, note(0), notes[&*path][0].clone()),
        Expr::Abs(x, m) => {
            let a = note(0);
            let body = sub(0, m, path)?;
            sys.abs(x, body, &a)
        }
        Expr::Sel(x, t) => {
            let a = note(0);
            let body = sub(0, t, path)?;
            sys.sel(x, body, &a)
        }
        Expr::App(m, n) => {
            let f = sub(0, m, path)?;
            let a = sub(1, n, path)?;
            sys.app(f, vec![a])
        }
        Expr::Cut(t, k) => {
            let a = sub(0, t, path)?;
            let c = sub(1, k, path)?;
            sys.cut(vec![a], c)
        }
        Expr::Cons(t, k) => {
            let a = sub(0, t, path)?;
            let c = sub(1, k, path)?;
            sys.cons(vec![a], c)
        }
        Expr::Contr(z, x, y, m) => {
            let (a, b) = (note(0), note(1));
            let body = sub(0, m, path)?;
            sys.cont(z, x, y, body, &a, &b)
        }
        Expr::Weak(x, m) => {
            let a = note(0);
            let body = sub(0, m, path)?;
            sys.weak(x, a, body)
        }
    }
}
