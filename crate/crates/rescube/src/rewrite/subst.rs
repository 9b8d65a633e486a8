use std::collections::BTreeMap;

use crate::syntax::{Expr, Supply, Var};
use crate::wellformed::{fv_ordered, fv_set};

/// `m[n/x]`, defined clause by clause for both bases.
///
/// Every copy of `n` after the first gets fresh binders, so the result keeps
/// the variable convention. A contraction on `x` splits `n` into two copies
/// whose free variables are renamed apart and contracted back.
pub fn subst(m: &Expr, n: &Expr, x: &Var, supply: &mut Supply) -> Expr {
    subst_par(m, &[(x.clone(), n.clone())], supply)
}

/// Simultaneous substitution `m[n1/x1, ..., nk/xk]`.
pub fn subst_par(m: &Expr, bindings: &[(Var, Expr)], supply: &mut Supply) -> Expr {
    supply.observe(m);
    for (_, n) in bindings {
        supply.observe(n);
    }
    let map = bindings
        .iter()
        .map(|(x, n)| {
            (
                x.clone(),
                Entry {
                    term: n.clone(),
                    used: false,
                },
            )
        })
        .collect();
    Subst { map, supply }.go(m)
}

struct Entry {
    term: Expr,
    used: bool,
}

struct Subst<'a> {
    map: BTreeMap<Var, Entry>,
    supply: &'a mut Supply,
}

impl Subst<'_> {
    fn take(&mut self, x: &Var) -> Expr {
        let entry = self.map.get_mut(x).expect("substituted variable");
        if entry.used {
            entry.term.refresh_binders(self.supply)
        } else {
            entry.used = true;
            entry.term.clone()
        }
    }

    fn touches(&self, m: &Expr) -> bool {
        m.used_names().iter().any(|v| self.map.contains_key(v))
    }

    fn go(&mut self, m: &Expr) -> Expr {
        if !self.touches(m) {
            return m.clone();
        }
        match m {
            Expr::Var(y) => self.take(y),
            Expr::Abs(y, b) => Expr::abs(y.clone(), self.go(b)),
            Expr::Sel(y, b) => Expr::sel(y.clone(), self.go(b)),
            Expr::App(a, b) => {
                let a = self.go(a);
                Expr::app(a, self.go(b))
            }
            Expr::Cut(a, b) => {
                let a = self.go(a);
                Expr::cut(a, self.go(b))
            }
            Expr::Cons(a, b) => {
                let a = self.go(a);
                Expr::cons(a, self.go(b))
            }
            Expr::Weak(y, b) => {
                let body = self.go(b);
                let fv = fv_set(&body);
                match self.map.get(y) {
                    Some(entry) => {
                        let extra: Vec<Var> = fv_ordered(&entry.term)
                            .into_iter()
                            .filter(|z| !fv.contains(z))
                            .collect();
                        Expr::weaken_all(&extra, body)
                    }
                    None if fv.contains(y) => body,
                    None => Expr::weak(y.clone(), body),
                }
            }
            Expr::Contr(y, y1, y2, b) => {
                if !self.map.contains_key(y) {
                    return Expr::contr(y.clone(), y1.clone(), y2.clone(), self.go(b));
                }
                let n = self.take(y);
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
                let n2 = n.refresh_binders(self.supply).rename(&right);
                self.map.insert(
                    y1.clone(),
                    Entry {
                        term: n1,
                        used: false,
                    },
                );
                self.map.insert(
                    y2.clone(),
                    Entry {
                        term: n2,
                        used: false,
                    },
                );
                let body = self.go(b);
                self.map.remove(y1);
                self.map.remove(y2);
                triples
                    .into_iter()
                    .rev()
                    .fold(body, |acc, (z, z1, z2)| Expr::contr(z, z1, z2, acc))
            }
        }
    }
}

/// `k @ k2`: plug `k2` at the end of the context `k`.
///
/// A weakening on the way is kept only if its variable is not free in the
/// joined context, which keeps the result well formed when contraction is
/// implicit.
pub fn append(k: &Expr, k2: &Expr) -> Expr {
    match k {
        Expr::Sel(x, t) => Expr::sel(x.clone(), Expr::cut((**t).clone(), k2.clone())),
        Expr::Cons(u, rest) => Expr::cons((**u).clone(), append(rest, k2)),
        Expr::Weak(x, rest) => {
            let r = append(rest, k2);
            if fv_set(&r).contains(x) {
                r
            } else {
                Expr::weak(x.clone(), r)
            }
        }
        Expr::Contr(x, y, z, rest) => {
            Expr::contr(x.clone(), y.clone(), z.clone(), append(rest, k2))
        }
        other => panic!("append on a term: {other}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{alpha_eq, parse_lj, parse_nd, Base};

    fn nd(s: &str) -> Expr {
        parse_nd(s).unwrap()
    }

    fn sub(m: &str, n: &str, x: &str) -> Expr {
        let (m, n) = (nd(m), nd(n));
        let mut s = Supply::above(&m);
        subst(&m, &n, &Var::new(x), &mut s)
    }

    #[test]
    fn variable_clauses() {
        assert_eq!(sub("x", "\\z. z", "x"), nd("\\z. z"));
        assert_eq!(sub("y", "\\z. z", "x"), nd("y"));
    }

    #[test]
    fn weakened_target_becomes_weakenings_over_fv() {
        assert_eq!(sub("W[x] y", "\\z. z", "x"), nd("y"));
        assert_eq!(sub("W[x] y", "u v", "x"), nd("W[u] W[v] y"));
        assert_eq!(sub("W[x] y", "u y", "x"), nd("W[u] y"));
    }

    #[test]
    fn other_weakening_absorbed_when_free() {
        assert_eq!(sub("x (W[x] y)", "z", "x"), nd("z (W[z] y)"));
        assert_eq!(sub("W[y] x", "y", "x"), nd("y"));
        assert_eq!(sub("W[y] x", "u", "x"), nd("W[y] u"));
    }

    #[test]
    fn contraction_target_splits_copies() {
        let got = sub("C[x<x1,x2] x1 x2", "w", "x");
        assert_eq!(got.to_string(), "C[w<w#1,w#2] (w#1 w#2)");
    }

    #[test]
    fn dead_contraction_still_splits() {
        let got = sub("C[x<x1,x2] y", "u v", "x");
        assert_eq!(got.to_string(), "C[u<u#1,u#2] C[v<v#3,v#4] y");
    }

    #[test]
    fn second_copy_gets_fresh_binders() {
        let got = sub("x x", "\\z. z", "x");
        match &got {
            Expr::App(a, b) => {
                assert!(alpha_eq(a, b));
                assert_ne!(a, b);
            }
            _ => panic!("{got}"),
        }
    }

    #[test]
    fn parallel_is_simultaneous() {
        let m = nd("x1 x2");
        let mut s = Supply::above(&m);
        let got = subst_par(
            &m,
            &[(Var::new("x1"), nd("x2")), (Var::new("x2"), nd("b"))],
            &mut s,
        );
        assert_eq!(got, nd("x2 b"));
    }

    #[test]
    fn sequent_clauses() {
        let e = parse_lj("^y. v").unwrap();
        let mut s = Supply::above(&e);
        let got = subst(&e, &parse_lj("\\q. q").unwrap(), &Var::new("v"), &mut s);
        assert_eq!(got, parse_lj("^y. \\q. q").unwrap());
        assert!(got.fits(Base::Lj));
    }

    #[test]
    fn append_clauses() {
        let lj = |s: &str| parse_lj(s).unwrap();
        assert_eq!(append(&lj("^x. x"), &lj("^y. y")), lj("^x. x (^y. y)"));
        assert_eq!(
            append(&lj("u :: ^x. x"), &lj("^y. y")),
            lj("u :: ^x. x (^y. y)")
        );
        assert_eq!(
            append(&lj("W[z] ^x. x"), &lj("^y. y")),
            lj("W[z] ^x. x (^y. y)")
        );
    }
}
