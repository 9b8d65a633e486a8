use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::syntax::{alpha_norm, Expr, Var};
use crate::wellformed::{fv_list, fv_set};

/// A canonical representative of the equivalence class of `e` under the
/// permutation of weakenings and the rearrangement of contraction trees.
///
/// The representative exposes a redex whenever some member of the class has
/// one at the same position:
/// - a block of weakenings is sorted by name, except that under a binder the
///   binder's own weakening goes last and under a contraction the weakenings
///   of its leaves go last;
/// - a block of contractions is a forest of roots with their leaves; each
///   root becomes a comb, and when two leaves of one root can be contracted
///   directly above the body, that pair is placed innermost.
pub fn canonical(e: &Expr) -> Expr {
    canon(e, None)
}

/// Canonical form modulo renaming of bound variables: the fixpoint of
/// canonicalization and alpha normalization, as used for memo keys.
pub fn class_key(e: &Expr) -> Expr {
    let mut cur = alpha_norm(&canonical(e));
    for _ in 0..4 {
        let next = alpha_norm(&canonical(&cur));
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

fn canon(e: &Expr, binder: Option<&Var>) -> Expr {
    match e {
        Expr::Var(_) => e.clone(),
        Expr::Abs(x, b) => Expr::abs(x.clone(), canon(b, Some(x))),
        Expr::Sel(x, b) => Expr::sel(x.clone(), canon(b, Some(x))),
        Expr::App(a, b) => Expr::app(canon(a, None), canon(b, None)),
        Expr::Cut(a, b) => Expr::cut(canon(a, None), canon(b, None)),
        Expr::Cons(a, b) => Expr::cons(canon(a, None), canon(b, None)),
        Expr::Weak(..) => {
            let (ws, inner) = weak_block(e);
            let inner = canon(inner, None);
            let mut ws = ws;
            ws.sort();
            if let Some(x) = binder {
                if let Some(i) = ws.iter().position(|w| w == x) {
                    let w = ws.remove(i);
                    ws.push(w);
                }
            }
            Expr::weaken_all(&ws, inner)
        }
        Expr::Contr(..) => canon_contractions(e),
    }
}

fn weak_block(e: &Expr) -> (Vec<Var>, &Expr) {
    let mut ws = Vec::new();
    let mut cur = e;
    while let Expr::Weak(x, b) = cur {
        ws.push(x.clone());
        cur = b;
    }
    (ws, cur)
}

struct Forest {
    /// Roots with their leaves, in layout order.
    roots: Vec<(Var, Vec<Var>)>,
    /// Names used for inner nodes, reused in sorted order.
    internals: VecDeque<Var>,
}

fn forest(triples: &[(Var, Var, Var)]) -> Forest {
    let mut kids: BTreeMap<&Var, (&Var, &Var)> = BTreeMap::new();
    let mut bound: BTreeSet<&Var> = BTreeSet::new();
    let mut heads = Vec::new();
    for (h, a, b) in triples {
        kids.insert(h, (a, b));
        bound.insert(a);
        bound.insert(b);
        heads.push(h);
    }
    fn leaves<'a>(v: &'a Var, kids: &BTreeMap<&'a Var, (&'a Var, &'a Var)>, out: &mut Vec<Var>) {
        match kids.get(v) {
            Some((a, b)) => {
                leaves(a, kids, out);
                leaves(b, kids, out);
            }
            None => out.push(v.clone()),
        }
    }
    let mut roots = Vec::new();
    let mut internals = Vec::new();
    for h in heads {
        if bound.contains(h) {
            internals.push(h.clone());
        } else {
            let mut ls = Vec::new();
            leaves(h, &kids, &mut ls);
            roots.push((h.clone(), ls));
        }
    }
    internals.sort();
    Forest {
        roots,
        internals: internals.into(),
    }
}

fn canon_contractions(e: &Expr) -> Expr {
    let mut triples = Vec::new();
    let mut cur = e;
    while let Expr::Contr(x, a, b, body) = cur {
        triples.push((x.clone(), a.clone(), b.clone()));
        cur = body;
    }
    let (ws, inner) = weak_block(cur);
    let inner = canon(inner, None);

    let mut occ: Vec<Var> = {
        let mut s = ws.clone();
        s.sort();
        s
    };
    occ.extend(fv_list(&inner));
    let pos = |v: &Var| occ.iter().position(|o| o == v);
    let key = |v: &Var| match pos(v) {
        Some(p) => (0, p, v.clone()),
        None => (1, 0, v.clone()),
    };

    let mut f = forest(&triples);
    for (_, ls) in f.roots.iter_mut() {
        ls.sort_by_key(|l| key(l));
    }
    f.roots.sort_by_key(|(r, ls)| {
        let first = ls.iter().map(|l| key(l)).min();
        (first, r.clone())
    });

    if ws.is_empty() {
        if let Some((ri, pair)) = firing_pair(&f.roots, &inner) {
            let (r, mut ls) = f.roots.remove(ri);
            ls.retain(|l| !pair.contains(l));
            ls.extend(pair);
            f.roots.push((r, ls));
        }
    }

    let body = if ws.is_empty() {
        inner
    } else {
        let (a, b) = match f.roots.last() {
            Some((_, ls)) if ls.len() >= 2 => (ls[ls.len() - 2].clone(), ls[ls.len() - 1].clone()),
            _ => return rebuild(triples, cur.clone()),
        };
        let mut ws = ws;
        ws.sort_by_key(|w| (*w == a || *w == b, w.clone()));
        Expr::weaken_all(&ws, inner)
    };

    let mut layout = Vec::new();
    for (r, ls) in &f.roots {
        if ls.len() < 2 {
            return rebuild(triples, body);
        }
        let mut head = r.clone();
        for l in &ls[..ls.len() - 2] {
            let next = match f.internals.pop_front() {
                Some(n) => n,
                None => return rebuild(triples, body),
            };
            layout.push((head, l.clone(), next.clone()));
            head = next;
        }
        layout.push((head, ls[ls.len() - 2].clone(), ls[ls.len() - 1].clone()));
    }
    rebuild(layout, body)
}

fn rebuild(triples: Vec<(Var, Var, Var)>, body: Expr) -> Expr {
    triples
        .into_iter()
        .rev()
        .fold(body, |acc, (x, a, b)| Expr::contr(x, a, b, acc))
}

/// A root and two of its leaves that a contraction directly above `body`
/// could push into one side, if any.
fn firing_pair(roots: &[(Var, Vec<Var>)], body: &Expr) -> Option<(usize, Vec<Var>)> {
    let (p, q) = match body {
        Expr::App(p, q) | Expr::Cut(p, q) | Expr::Cons(p, q) => (fv_set(p), fv_set(q)),
        _ => return None,
    };
    for (i, (_, ls)) in roots.iter().enumerate() {
        for side in [&q, &p] {
            let ok: Vec<Var> = ls.iter().filter(|l| !side.contains(*l)).cloned().collect();
            if ok.len() >= 2 {
                return Some((i, ok[..2].to_vec()));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_nd;

    fn nd(s: &str) -> Expr {
        parse_nd(s).unwrap()
    }

    #[test]
    fn weakenings_commute() {
        assert_eq!(canonical(&nd("W[x] W[y] m")), canonical(&nd("W[y] W[x] m")));
    }

    #[test]
    fn contraction_leaves_commute() {
        let a = class_key(&nd("C[x<a,b] a b"));
        let b = class_key(&nd("C[x<b,a] a b"));
        assert_eq!(a, b);
    }

    #[test]
    fn contraction_trees_reassociate() {
        let a = class_key(&nd("C[x<y,z] C[y<u,v] u (v z)"));
        let b = class_key(&nd("C[x<y,u] C[y<z,v] u (v z)"));
        assert_eq!(a, b);
    }

    #[test]
    fn independent_contractions_commute() {
        let a = class_key(&nd("C[x<x1,x2] C[y<y1,y2] x1 y1 x2 y2"));
        let b = class_key(&nd("C[y<y1,y2] C[x<x1,x2] x1 y1 x2 y2"));
        assert_eq!(a, b);
    }

    #[test]
    fn binder_weakening_goes_last() {
        let e = nd("\\x. W[x] W[y] z");
        assert_eq!(canonical(&e), nd("\\x. W[y] W[x] z"));
    }

    #[test]
    fn firing_pair_goes_innermost() {
        let e = nd("C[x<a,y] C[y<b,c] a (b c)");
        let got = canonical(&e);
        match &got {
            Expr::Contr(_, _, _, inner) => match &**inner {
                Expr::Contr(_, p, q, _) => {
                    let mut pq = vec![p.to_string(), q.to_string()];
                    pq.sort();
                    assert_eq!(pq, ["b", "c"]);
                }
                _ => panic!("{got}"),
            },
            _ => panic!("{got}"),
        }
    }

    #[test]
    fn idempotent() {
        for s in [
            "C[x<y,z] C[y<u,v] u (v z)",
            "\\x. W[x] W[b] W[a] x#9",
            "C[x<x1,x2] W[x1] W[q] x2",
        ] {
            let once = canonical(&nd(s));
            assert_eq!(canonical(&once), once, "{s}");
        }
    }
}
