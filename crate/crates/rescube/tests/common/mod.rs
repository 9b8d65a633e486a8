//! Seeded generators of well-formed expressions for every system.
//!
//! A raw expression over a small pool of names is generated first; the
//! resource pass then inserts the weakenings and contractions the system
//! demands, plus a few optional ones, so the result is well formed by
//! construction and keeps the variable convention.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rescube::wellformed::{check, fv_list};
use rescube::{Base, Expr, Res, Var};

pub const FREE: [&str; 4] = ["f", "g", "u", "v"];

pub struct Gen {
    pub rng: ChaCha8Rng,
    pub base: Base,
    pub res: Res,
    next: u32,
}

impl Gen {
    pub fn new(seed: u64, base: Base, res: Res) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            base,
            res,
            next: 0,
        }
    }

    fn fresh(&mut self, prefix: &str) -> Var {
        self.next += 1;
        Var::new(&format!("{prefix}{}", self.next))
    }

    /// A well-formed term of roughly `size` nodes.
    pub fn term(&mut self, size: usize) -> Expr {
        let raw = self.raw_term(size, &mut Vec::new());
        self.resources(raw)
    }

    /// A well-formed LJ context of roughly `size` nodes.
    pub fn context(&mut self, size: usize) -> Expr {
        let raw = self.raw_ctx(size, &mut Vec::new());
        self.resources(raw)
    }

    /// A term, or in the sequent base sometimes a context.
    pub fn expr(&mut self, size: usize) -> Expr {
        if self.base == Base::Lj && self.rng.gen_bool(0.2) {
            self.context(size)
        } else {
            self.term(size)
        }
    }

    fn pick_var(&mut self, scope: &[Var]) -> Expr {
        if !scope.is_empty() && self.rng.gen_bool(0.75) {
            Expr::Var(scope[self.rng.gen_range(0..scope.len())].clone())
        } else {
            Expr::var(FREE[self.rng.gen_range(0..FREE.len())])
        }
    }

    fn raw_term(&mut self, size: usize, scope: &mut Vec<Var>) -> Expr {
        if size <= 1 {
            return self.pick_var(scope);
        }
        match self.rng.gen_range(0..10) {
            0..=3 => {
                let x = self.fresh("x");
                scope.push(x.clone());
                let body = self.raw_term(size - 1, scope);
                scope.pop();
                Expr::abs(x, body)
            }
            4 => self.pick_var(scope),
            _ => {
                let left = self.rng.gen_range(1..size);
                let f = self.raw_term(left, scope);
                match self.base {
                    Base::Nd => Expr::app(f, self.raw_term(size - left, scope)),
                    Base::Lj => Expr::cut(f, self.raw_ctx(size - left, scope)),
                }
            }
        }
    }

    fn raw_ctx(&mut self, size: usize, scope: &mut Vec<Var>) -> Expr {
        if size <= 2 || self.rng.gen_bool(0.4) {
            let x = self.fresh("y");
            scope.push(x.clone());
            let body = self.raw_term(size.saturating_sub(1).max(1), scope);
            scope.pop();
            return Expr::sel(x, body);
        }
        let left = self.rng.gen_range(1..size - 1);
        let t = self.raw_term(left, scope);
        Expr::cons(t, self.raw_ctx(size - left, scope))
    }

    /// Insert the resource operators the system needs, and some optional
    /// weakenings.
    pub fn resources(&mut self, e: Expr) -> Expr {
        let e = if self.res.contraction {
            self.linearise(e)
        } else {
            e
        };
        let e = if self.res.weakening {
            self.weaken(e)
        } else {
            e
        };
        debug_assert!(check(&e, self.res).is_ok(), "generated ill-formed {e}");
        e
    }

    /// Replace repeated occurrences by contraction trees placed at the
    /// smallest subexpression holding all of them.
    fn linearise(&mut self, e: Expr) -> Expr {
        let e = self.linearise_binders(e);
        let mut counts: BTreeMap<Var, usize> = BTreeMap::new();
        for v in fv_list(&e) {
            *counts.entry(v).or_default() += 1;
        }
        let mut out = e;
        for (v, n) in counts {
            if n > 1 {
                out = self.contract_var(out, &v);
            }
        }
        out
    }

    fn linearise_binders(&mut self, e: Expr) -> Expr {
        match e {
            Expr::Abs(x, b) => {
                let b = self.linearise_binders(*b);
                let b = self.contract_var(b, &x);
                Expr::abs(x, b)
            }
            Expr::Sel(x, b) => {
                let b = self.linearise_binders(*b);
                let b = self.contract_var(b, &x);
                Expr::sel(x, b)
            }
            Expr::App(a, b) => Expr::app(self.linearise_binders(*a), self.linearise_binders(*b)),
            Expr::Cut(a, b) => Expr::cut(self.linearise_binders(*a), self.linearise_binders(*b)),
            Expr::Cons(a, b) => Expr::cons(self.linearise_binders(*a), self.linearise_binders(*b)),
            other => other,
        }
    }

    /// Rename every occurrence of `x` apart and contract the copies.
    fn contract_var(&mut self, e: Expr, x: &Var) -> Expr {
        let n = count(&e, x);
        if n < 2 {
            return e;
        }
        let names: Vec<Var> = (0..n)
            .map(|_| self.fresh(&format!("{}c", x.base)))
            .collect();
        let mut i = 0;
        let renamed = rename_occurrences(&e, x, &names, &mut i);
        let at_top = self.rng.gen_bool(0.3);
        let path = if at_top {
            vec![]
        } else {
            lca(&renamed, &names)
        };
        let sub = renamed.at(&path).unwrap().clone();
        let mut acc = sub;
        let mut head = x.clone();
        let mut wraps = Vec::new();
        for (k, leaf) in names.iter().enumerate() {
            if k == names.len() - 1 {
                break;
            }
            let rest = if k == names.len() - 2 {
                names[k + 1].clone()
            } else {
                self.fresh(&format!("{}c", x.base))
            };
            wraps.push((head.clone(), leaf.clone(), rest.clone()));
            head = rest;
        }
        for (h, a, b) in wraps.into_iter().rev() {
            acc = Expr::contr(h, a, b, acc);
        }
        renamed.replace_at(&path, acc).unwrap()
    }

    /// Weaken unused binders, and sometimes erase a fresh free variable.
    fn weaken(&mut self, e: Expr) -> Expr {
        let out = match e {
            Expr::Abs(x, b) => {
                let b = self.weaken(*b);
                let b = if count(&b, &x) == 0 {
                    Expr::weak(x.clone(), b)
                } else {
                    b
                };
                Expr::abs(x, b)
            }
            Expr::Sel(x, b) => {
                let b = self.weaken(*b);
                let b = if count(&b, &x) == 0 {
                    Expr::weak(x.clone(), b)
                } else {
                    b
                };
                Expr::sel(x, b)
            }
            Expr::App(a, b) => Expr::app(self.weaken(*a), self.weaken(*b)),
            Expr::Cut(a, b) => Expr::cut(self.weaken(*a), self.weaken(*b)),
            Expr::Cons(a, b) => Expr::cons(self.weaken(*a), self.weaken(*b)),
            Expr::Contr(x, a, c, b) => Expr::contr(x, a, c, self.weaken(*b)),
            other => other,
        };
        if self.rng.gen_bool(0.08) {
            let z = self.fresh("w");
            Expr::weak(z, out)
        } else {
            out
        }
    }
}

fn count(e: &Expr, x: &Var) -> usize {
    fv_list(e).iter().filter(|v| *v == x).count()
}

fn rename_occurrences(e: &Expr, x: &Var, names: &[Var], i: &mut usize) -> Expr {
    match e {
        Expr::Var(v) if v == x => {
            *i += 1;
            Expr::Var(names[*i - 1].clone())
        }
        Expr::Var(_) => e.clone(),
        Expr::Abs(y, _) | Expr::Sel(y, _) if y == x => e.clone(),
        Expr::Abs(y, b) => Expr::abs(y.clone(), rename_occurrences(b, x, names, i)),
        Expr::Sel(y, b) => Expr::sel(y.clone(), rename_occurrences(b, x, names, i)),
        Expr::App(a, b) => {
            let a = rename_occurrences(a, x, names, i);
            Expr::app(a, rename_occurrences(b, x, names, i))
        }
        Expr::Cut(a, b) => {
            let a = rename_occurrences(a, x, names, i);
            Expr::cut(a, rename_occurrences(b, x, names, i))
        }
        Expr::Cons(a, b) => {
            let a = rename_occurrences(a, x, names, i);
            Expr::cons(a, rename_occurrences(b, x, names, i))
        }
        Expr::Weak(y, b) => Expr::weak(y.clone(), rename_occurrences(b, x, names, i)),
        Expr::Contr(h, a, c, b) => {
            let h = if h == x {
                *i += 1;
                names[*i - 1].clone()
            } else {
                h.clone()
            };
            Expr::contr(h, a.clone(), c.clone(), rename_occurrences(b, x, names, i))
        }
    }
}

/// The path of the smallest subexpression containing all of `names`.
fn lca(e: &Expr, names: &[Var]) -> Vec<usize> {
    let mut path = Vec::new();
    let mut cur = e;
    'down: loop {
        for (i, c) in cur.children().into_iter().enumerate() {
            let fv = fv_list(c);
            if names.iter().all(|n| fv.contains(n)) {
                path.push(i);
                cur = c;
                continue 'down;
            }
        }
        return path;
    }
}

/// Every system of one base.
pub fn systems(base: Base) -> [(Base, Res); 4] {
    Res::ALL.map(|r| (base, r))
}

pub fn all_systems() -> Vec<(Base, Res)> {
    [Base::Nd, Base::Lj].into_iter().flat_map(systems).collect()
}
