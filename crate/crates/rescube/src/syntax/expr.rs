use std::fmt;

use super::Var;

/// Which half of the cube a term belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    /// Natural deduction terms.
    Nd,
    /// Sequent (LJ) terms and contexts.
    Lj,
}

/// The set of explicit resource operators, a subset of `{c, w}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Res {
    pub contraction: bool,
    pub weakening: bool,
}

impl Res {
    pub const NONE: Res = Res {
        contraction: false,
        weakening: false,
    };
    pub const C: Res = Res {
        contraction: true,
        weakening: false,
    };
    pub const W: Res = Res {
        contraction: false,
        weakening: true,
    };
    pub const CW: Res = Res {
        contraction: true,
        weakening: true,
    };
    pub const ALL: [Res; 4] = [Res::NONE, Res::C, Res::W, Res::CW];

    pub fn name(self) -> &'static str {
        match (self.contraction, self.weakening) {
            (false, false) => "none",
            (true, false) => "c",
            (false, true) => "w",
            (true, true) => "cw",
        }
    }

    pub fn from_name(s: &str) -> Option<Res> {
        Res::ALL.into_iter().find(|r| r.name() == s)
    }
}

impl fmt::Display for Res {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Syntactic sort of an LJ expression. ND terms are always of sort `Term`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sort {
    Term,
    Context,
}

/// Abstract syntax shared by both bases.
///
/// `App` occurs only in ND terms. `Cut`, `Sel` and `Cons` occur only in LJ
/// expressions. `Contr` and `Weak` take the sort of their body.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Var(Var),
    Abs(Var, Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    Cut(Box<Expr>, Box<Expr>),
    Sel(Var, Box<Expr>),
    Cons(Box<Expr>, Box<Expr>),
    /// `C[x<x1,x2] e`: `x` is used, `x1` and `x2` are bound in `e`.
    Contr(Var, Var, Var, Box<Expr>),
    /// `W[x] e`: `x` is used and erased.
    Weak(Var, Box<Expr>),
}

/// Address of a subexpression: child indices from the root.
pub type Path = Vec<usize>;

pub fn path_string(p: &[usize]) -> String {
    if p.is_empty() {
        "root".to_string()
    } else {
        p.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(Var::new(name))
    }

    pub fn abs(x: Var, b: Expr) -> Expr {
        Expr::Abs(x, Box::new(b))
    }

    pub fn app(f: Expr, a: Expr) -> Expr {
        Expr::App(Box::new(f), Box::new(a))
    }

    pub fn cut(t: Expr, k: Expr) -> Expr {
        Expr::Cut(Box::new(t), Box::new(k))
    }

    pub fn sel(x: Var, t: Expr) -> Expr {
        Expr::Sel(x, Box::new(t))
    }

    pub fn cons(t: Expr, k: Expr) -> Expr {
        Expr::Cons(Box::new(t), Box::new(k))
    }

    pub fn contr(x: Var, x1: Var, x2: Var, e: Expr) -> Expr {
        Expr::Contr(x, x1, x2, Box::new(e))
    }

    pub fn weak(x: Var, e: Expr) -> Expr {
        Expr::Weak(x, Box::new(e))
    }

    /// Nested weakenings `W[x1] ... W[xn] e`; the empty list gives `e`.
    pub fn weaken_all<'a>(xs: impl IntoIterator<Item = &'a Var>, e: Expr) -> Expr {
        let xs: Vec<&Var> = xs.into_iter().collect();
        xs.into_iter()
            .rev()
            .fold(e, |acc, x| Expr::weak(x.clone(), acc))
    }

    /// The sort of this expression; `None` if it mixes sorts illegally.
    pub fn sort(&self) -> Option<Sort> {
        match self {
            Expr::Var(_) => Some(Sort::Term),
            Expr::Abs(_, b) => (b.sort()? == Sort::Term).then_some(Sort::Term),
            Expr::App(f, a) => {
                (f.sort()? == Sort::Term && a.sort()? == Sort::Term).then_some(Sort::Term)
            }
            Expr::Cut(t, k) => {
                (t.sort()? == Sort::Term && k.sort()? == Sort::Context).then_some(Sort::Term)
            }
            Expr::Sel(_, t) => (t.sort()? == Sort::Term).then_some(Sort::Context),
            Expr::Cons(t, k) => {
                (t.sort()? == Sort::Term && k.sort()? == Sort::Context).then_some(Sort::Context)
            }
            Expr::Contr(_, _, _, e) | Expr::Weak(_, e) => e.sort(),
        }
    }

    /// Sort of the root node, assuming the expression is well sorted.
    pub fn root_sort(&self) -> Sort {
        match self {
            Expr::Sel(..) | Expr::Cons(..) => Sort::Context,
            Expr::Contr(_, _, _, e) | Expr::Weak(_, e) => e.root_sort(),
            _ => Sort::Term,
        }
    }

    /// True if every node belongs to the given base and sorts line up.
    pub fn fits(&self, base: Base) -> bool {
        let nodes_ok = self.all_nodes(&mut |e| match (base, e) {
            (Base::Nd, Expr::Cut(..) | Expr::Sel(..) | Expr::Cons(..)) => false,
            (Base::Lj, Expr::App(..)) => false,
            _ => true,
        });
        nodes_ok && self.sort().is_some()
    }

    fn all_nodes(&self, f: &mut impl FnMut(&Expr) -> bool) -> bool {
        f(self) && self.children().into_iter().all(|c| c.all_nodes(f))
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Var(_) => vec![],
            Expr::Abs(_, b) | Expr::Sel(_, b) | Expr::Contr(_, _, _, b) | Expr::Weak(_, b) => {
                vec![b]
            }
            Expr::App(a, b) | Expr::Cut(a, b) | Expr::Cons(a, b) => vec![a, b],
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Expr> {
        match self {
            Expr::Var(_) => vec![],
            Expr::Abs(_, b) | Expr::Sel(_, b) | Expr::Contr(_, _, _, b) | Expr::Weak(_, b) => {
                vec![b]
            }
            Expr::App(a, b) | Expr::Cut(a, b) | Expr::Cons(a, b) => vec![a, b],
        }
    }

    pub fn at(&self, path: &[usize]) -> Option<&Expr> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.children().get(*i)?.at(rest),
        }
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut Expr> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.children_mut().into_iter().nth(*i)?.at_mut(rest),
        }
    }

    /// Replace the subexpression at `path`, returning the new whole.
    pub fn replace_at(&self, path: &[usize], new: Expr) -> Option<Expr> {
        let mut out = self.clone();
        *out.at_mut(path)? = new;
        Some(out)
    }

    /// Visit every variable occurrence, binders included.
    pub fn for_each_var(&self, f: &mut impl FnMut(&Var)) {
        match self {
            Expr::Var(x) => f(x),
            Expr::Abs(x, b) | Expr::Sel(x, b) | Expr::Weak(x, b) => {
                f(x);
                b.for_each_var(f)
            }
            Expr::Contr(x, y, z, b) => {
                f(x);
                f(y);
                f(z);
                b.for_each_var(f)
            }
            Expr::App(a, b) | Expr::Cut(a, b) | Expr::Cons(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f)
            }
        }
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        1 + self
            .children()
            .iter()
            .map(|c| c.node_count())
            .sum::<usize>()
    }

    /// Variables bound somewhere inside, in preorder.
    pub fn binders(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_binders(&mut out);
        out
    }

    fn collect_binders(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Abs(x, _) | Expr::Sel(x, _) => out.push(x.clone()),
            Expr::Contr(_, y, z, _) => {
                out.push(y.clone());
                out.push(z.clone())
            }
            _ => {}
        }
        for c in self.children() {
            c.collect_binders(out);
        }
    }

    /// Names used free in a syntactic sense: variable leaves, weakened names
    /// and contracted names, minus enclosing binders.
    pub fn used_names(&self) -> std::collections::BTreeSet<Var> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_used(&mut Vec::new(), &mut out);
        out
    }

    fn collect_used(&self, bound: &mut Vec<Var>, out: &mut std::collections::BTreeSet<Var>) {
        let mut note = |x: &Var, bound: &Vec<Var>| {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        };
        match self {
            Expr::Var(x) => note(x, bound),
            Expr::Abs(x, b) | Expr::Sel(x, b) => {
                bound.push(x.clone());
                b.collect_used(bound, out);
                bound.pop();
            }
            Expr::Weak(x, b) => {
                note(x, bound);
                b.collect_used(bound, out)
            }
            Expr::Contr(x, y, z, b) => {
                note(x, bound);
                bound.push(y.clone());
                bound.push(z.clone());
                b.collect_used(bound, out);
                bound.pop();
                bound.pop();
            }
            Expr::App(a, b) | Expr::Cut(a, b) | Expr::Cons(a, b) => {
                a.collect_used(bound, out);
                b.collect_used(bound, out)
            }
        }
    }

    /// Rename every occurrence (free, bound or binding) of variables in `map`.
    pub fn rename(&self, map: &std::collections::BTreeMap<Var, Var>) -> Expr {
        let r = |x: &Var| map.get(x).cloned().unwrap_or_else(|| x.clone());
        match self {
            Expr::Var(x) => Expr::Var(r(x)),
            Expr::Abs(x, b) => Expr::abs(r(x), b.rename(map)),
            Expr::Sel(x, b) => Expr::sel(r(x), b.rename(map)),
            Expr::Weak(x, b) => Expr::weak(r(x), b.rename(map)),
            Expr::Contr(x, y, z, b) => Expr::contr(r(x), r(y), r(z), b.rename(map)),
            Expr::App(a, b) => Expr::app(a.rename(map), b.rename(map)),
            Expr::Cut(a, b) => Expr::cut(a.rename(map), b.rename(map)),
            Expr::Cons(a, b) => Expr::cons(a.rename(map), b.rename(map)),
        }
    }

    /// Rename bound variables apart so that no binder shadows another binder
    /// or a used name. Already-conforming expressions are returned unchanged.
    pub fn rename_apart(&self, supply: &mut super::Supply) -> Expr {
        supply.observe(self);
        let mut taken = self.used_names();
        self.apart(&mut taken, &std::collections::BTreeMap::new(), supply)
    }

    fn apart(
        &self,
        taken: &mut std::collections::BTreeSet<Var>,
        env: &std::collections::BTreeMap<Var, Var>,
        supply: &mut super::Supply,
    ) -> Expr {
        let look = |x: &Var| env.get(x).cloned().unwrap_or_else(|| x.clone());
        let bind =
            |x: &Var, taken: &mut std::collections::BTreeSet<Var>, supply: &mut super::Supply| {
                if taken.insert(x.clone()) {
                    x.clone()
                } else {
                    let y = supply.fresh(&x.base);
                    taken.insert(y.clone());
                    y
                }
            };
        match self {
            Expr::Var(x) => Expr::Var(look(x)),
            Expr::Weak(x, b) => Expr::weak(look(x), b.apart(taken, env, supply)),
            Expr::Abs(x, b) | Expr::Sel(x, b) => {
                let y = bind(x, taken, supply);
                let mut env2 = env.clone();
                env2.insert(x.clone(), y.clone());
                let body = b.apart(taken, &env2, supply);
                if matches!(self, Expr::Abs(..)) {
                    Expr::abs(y, body)
                } else {
                    Expr::sel(y, body)
                }
            }
            Expr::Contr(x, a, c, b) => {
                let x2 = look(x);
                let a2 = bind(a, taken, supply);
                let c2 = bind(c, taken, supply);
                let mut env2 = env.clone();
                env2.insert(a.clone(), a2.clone());
                env2.insert(c.clone(), c2.clone());
                Expr::contr(x2, a2, c2, b.apart(taken, &env2, supply))
            }
            Expr::App(a, b) => Expr::app(a.apart(taken, env, supply), b.apart(taken, env, supply)),
            Expr::Cut(a, b) => Expr::cut(a.apart(taken, env, supply), b.apart(taken, env, supply)),
            Expr::Cons(a, b) => {
                Expr::cons(a.apart(taken, env, supply), b.apart(taken, env, supply))
            }
        }
    }

    /// Replace every binder with a fresh name, keeping free names.
    pub fn refresh_binders(&self, supply: &mut super::Supply) -> Expr {
        let map: std::collections::BTreeMap<Var, Var> = self
            .binders()
            .into_iter()
            .map(|b| {
                let f = supply.fresh(&b.base);
                (b, f)
            })
            .collect();
        self.rename(&map)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::print(self))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::print(self))
    }
}
