use std::collections::BTreeSet;

use crate::rewrite::{canonical, redexes};
use crate::syntax::{Base, Expr, Res, Var};
use crate::wellformed::fv_set;

/// Normal-form status of an expression, by three independent tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NfReport {
    /// The canonical representative has no redex.
    pub redex_free: bool,
    /// Membership in the grammar of normal forms as published.
    pub published: bool,
    /// Membership in the grammar derived from the rules, which also covers
    /// contraction-headed applications, nested contraction blocks and, in
    /// the sequent base, abstractions cut against a contraction.
    pub derived: bool,
}

impl NfReport {
    pub fn is_normal(&self) -> bool {
        self.redex_free
    }

    /// Redex-freeness and the derived grammar agree.
    pub fn consistent(&self) -> bool {
        self.redex_free == self.derived
    }
}

/// Classify `e`, taken modulo the equivalence.
pub fn is_normal_form(e: &Expr, base: Base, res: Res) -> NfReport {
    let c = canonical(e);
    NfReport {
        redex_free: redexes(&c, base, res).is_empty(),
        published: match base {
            Base::Nd => pub_nd_top(&c),
            Base::Lj => pub_lj_top(&c),
        },
        derived: match base {
            Base::Nd => nd_top(&c),
            Base::Lj => lj_top(&c),
        },
    }
}

fn is_var(e: &Expr) -> bool {
    matches!(e, Expr::Var(_))
}

/// `x ∈ Fv(a)` and `y ∈ Fv(b)`, or the other way round: the grammar is read
/// modulo the order of a contraction's leaves.
fn split(x: &Var, y: &Var, a: &Expr, b: &Expr) -> bool {
    let (fa, fb) = (fv_set(a), fv_set(b));
    (fa.contains(x) && fb.contains(y)) || (fa.contains(y) && fb.contains(x))
}

fn spine(e: &Expr) -> (&Expr, Vec<&Expr>) {
    let mut args = Vec::new();
    let mut cur = e;
    while let Expr::App(f, a) = cur {
        args.push(&**a);
        cur = f;
    }
    args.reverse();
    (cur, args)
}

// The grammar as published.

fn pub_nd_top(e: &Expr) -> bool {
    pub_m(e) || pub_w(e)
}

fn pub_m(e: &Expr) -> bool {
    match e {
        Expr::Var(_) => true,
        Expr::Abs(x, b) => match &**b {
            Expr::Weak(y, m) if y == x => pub_m(m),
            _ => pub_m(b),
        },
        Expr::App(..) => {
            let (h, args) = spine(e);
            is_var(h) && args.iter().all(|a| pub_m(a))
        }
        Expr::Contr(_, x1, x2, b) => match &**b {
            Expr::App(m, n) => split(x1, x2, m, n) && pub_m(m) && pub_m(n),
            _ => false,
        },
        _ => false,
    }
}

fn pub_w(e: &Expr) -> bool {
    match e {
        Expr::Weak(_, b) => pub_m(b) || pub_w(b),
        _ => false,
    }
}

fn pub_lj_top(e: &Expr) -> bool {
    pub_t(e) || pub_k(e) || pub_lw(e)
}

fn pub_t(e: &Expr) -> bool {
    match e {
        Expr::Var(_) => true,
        Expr::Abs(x, b) => match &**b {
            Expr::Weak(y, t) if y == x => pub_t(t),
            _ => pub_t(b),
        },
        Expr::Cut(h, k) => is_var(h) && matches!(&**k, Expr::Cons(t, k2) if pub_t(t) && pub_k(k2)),
        Expr::Contr(_, y, z, b) => match &**b {
            Expr::Cut(h, k) => {
                let head_is_leaf = matches!(&**h, Expr::Var(v) if v == y || v == z);
                head_is_leaf && matches!(&**k, Expr::Cons(t, k2) if pub_t(t) && pub_k(k2))
            }
            _ => false,
        },
        _ => false,
    }
}

fn pub_k(e: &Expr) -> bool {
    match e {
        Expr::Sel(x, b) => match &**b {
            Expr::Weak(y, t) if y == x => pub_t(t),
            _ => pub_t(b),
        },
        Expr::Cons(t, k) => pub_t(t) && pub_k(k),
        Expr::Contr(_, y, z, b) => match &**b {
            Expr::Cons(t, k) => split(y, z, t, k) && pub_t(t) && pub_k(k),
            _ => false,
        },
        _ => false,
    }
}

fn pub_lw(e: &Expr) -> bool {
    match e {
        Expr::Weak(_, b) => pub_t(b) || pub_k(b) || pub_lw(b),
        _ => false,
    }
}

// The grammar derived from the rules, on canonical representatives.

fn strip_weak(e: &Expr) -> &Expr {
    let mut cur = e;
    while let Expr::Weak(_, b) = cur {
        cur = b;
    }
    cur
}

fn nd_top(e: &Expr) -> bool {
    nd_a(strip_weak(e))
}

fn nd_a(e: &Expr) -> bool {
    match e {
        Expr::Var(_) => true,
        Expr::Abs(x, b) => match &**b {
            Expr::Weak(y, m) if y == x => nd_a(m),
            _ => nd_a(b),
        },
        Expr::App(..) => {
            let (h, args) = spine(e);
            nd_head(h) && args.iter().all(|a| nd_a(a))
        }
        Expr::Contr(..) => block(e, |b| match b {
            Expr::App(p, q) => Some((&**p, &**q)),
            _ => None,
        })
        .is_some_and(|b| nd_a(b)),
        Expr::Weak(..) => false,
        _ => false,
    }
}

fn nd_head(h: &Expr) -> bool {
    match h {
        Expr::Var(_) => true,
        Expr::Contr(..) => nd_a(h),
        _ => false,
    }
}

/// A block of contractions over a binary body in which every contraction
/// has exactly one leaf on each side. Returns the body.
fn block<'a>(
    e: &'a Expr,
    sides: impl Fn(&'a Expr) -> Option<(&'a Expr, &'a Expr)>,
) -> Option<&'a Expr> {
    let mut pairs = Vec::new();
    let mut cur = e;
    while let Expr::Contr(_, x1, x2, b) = cur {
        pairs.push((x1, x2));
        cur = b;
    }
    let (p, q) = sides(cur)?;
    let heads: BTreeSet<&Var> = block_heads(e);
    let ok = pairs
        .iter()
        .all(|(x1, x2)| !heads.contains(x1) && !heads.contains(x2) && split(x1, x2, p, q));
    ok.then_some(cur)
}

fn block_heads(e: &Expr) -> BTreeSet<&Var> {
    let mut out = BTreeSet::new();
    let mut cur = e;
    while let Expr::Contr(x, _, _, b) = cur {
        out.insert(x);
        cur = b;
    }
    out
}

fn lj_top(e: &Expr) -> bool {
    let e = strip_weak(e);
    lj_t(e) || lj_k(e)
}

fn lj_t(e: &Expr) -> bool {
    match e {
        Expr::Var(_) => true,
        Expr::Abs(x, b) => match &**b {
            Expr::Weak(y, t) if y == x => lj_t(t),
            _ => lj_t(b),
        },
        Expr::Cut(h, k) => {
            let k_ok = match &**k {
                Expr::Cons(..) => lj_k(k) && !matches!(&**h, Expr::Abs(..)),
                Expr::Contr(..) => lj_k(k),
                _ => false,
            };
            k_ok && match &**h {
                Expr::Var(_) => true,
                Expr::Abs(..) | Expr::Contr(..) => lj_t(h),
                _ => false,
            }
        }
        Expr::Contr(..) => block(e, |b| match b {
            Expr::Cut(p, q) => Some((&**p, &**q)),
            _ => None,
        })
        .is_some_and(|b| lj_t(b)),
        _ => false,
    }
}

fn lj_k(e: &Expr) -> bool {
    match e {
        Expr::Sel(x, b) => {
            let mu = matches!(&**b, Expr::Cut(h, k) if matches!(&**h, Expr::Var(v) if v == x) && !fv_set(k).contains(x));
            !mu && match &**b {
                Expr::Weak(y, t) if y == x => lj_t(t),
                _ => lj_t(b),
            }
        }
        Expr::Cons(t, k) => lj_t(t) && lj_k(k),
        Expr::Contr(..) => block(e, |b| match b {
            Expr::Cons(p, q) => Some((&**p, &**q)),
            _ => None,
        })
        .is_some_and(|b| lj_k(b)),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{parse_lj, parse_nd};

    fn nd(s: &str, res: Res) -> NfReport {
        is_normal_form(&parse_nd(s).unwrap(), Base::Nd, res)
    }

    fn lj(s: &str, res: Res) -> NfReport {
        is_normal_form(&parse_lj(s).unwrap(), Base::Lj, res)
    }

    #[test]
    fn published_examples() {
        let r = nd("\\x. W[x] \\y. y", Res::W);
        assert!(r.redex_free && r.published && r.derived);
        let r = nd("\\x. W[y] x", Res::W);
        assert!(!r.redex_free && !r.published && !r.derived);
        let r = nd("x (\\y. y) z (u v)", Res::NONE);
        assert!(r.redex_free && r.published && r.derived);
        let r = nd("C[x<a,b] a b", Res::C);
        assert!(r.redex_free && r.published && r.derived);
    }

    #[test]
    fn shapes_missing_from_the_published_grammar() {
        let r = nd("(C[x<a,b] a b) z", Res::C);
        assert!(r.redex_free && !r.published && r.derived);
        let r = nd("C[x<a,b] C[y<c,d] (a c) (b d)", Res::C);
        assert!(r.redex_free && !r.published && r.derived);
        let r = lj("(\\x. x) (C[y<a,b] a :: b :: ^z. z)", Res::C);
        assert!(r.redex_free && !r.published && r.derived);
    }

    #[test]
    fn a_published_shape_that_reduces() {
        let r = nd("C[x<a,b] (\\y. a) b", Res::C);
        assert!(!r.redex_free && r.published && !r.derived);
    }

    #[test]
    fn sequent_examples() {
        let r = lj("x (y :: ^z. z)", Res::NONE);
        assert!(r.redex_free && r.published && r.derived);
        let r = lj("x (^z. z)", Res::NONE);
        assert!(!r.redex_free && !r.derived);
        let r = lj("^x. x (y :: ^z. z)", Res::NONE);
        assert!(!r.redex_free && r.published && !r.derived);
        let r = lj("C[x<y,z] y (z :: ^q. q)", Res::C);
        assert!(r.redex_free && r.published && r.derived);
        let r = lj("W[u] \\x. W[x] x (y :: ^z. z)", Res::W);
        assert!(r.redex_free && r.published && r.derived);
    }
}
