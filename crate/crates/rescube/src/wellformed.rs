//! Free variables and the formation rules indexed by the resource set.

use std::collections::BTreeSet;
use std::fmt;

use crate::syntax::{path_string, Expr, Path, Res, Var};

/// Free variables as an ordered list with multiplicity.
///
/// Weakening puts its variable first; a contraction with a live leaf puts its
/// head first, followed by the body's list with both leaves removed.
pub fn fv_list(e: &Expr) -> Vec<Var> {
    let mut out = Vec::new();
    push_fv(e, &mut out);
    out
}

fn push_fv(e: &Expr, out: &mut Vec<Var>) {
    match e {
        Expr::Var(x) => out.push(x.clone()),
        Expr::Abs(x, b) | Expr::Sel(x, b) => {
            let inner = fv_list(b);
            out.extend(inner.into_iter().filter(|y| y != x));
        }
        Expr::App(a, b) | Expr::Cut(a, b) | Expr::Cons(a, b) => {
            push_fv(a, out);
            push_fv(b, out);
        }
        Expr::Weak(x, b) => {
            out.push(x.clone());
            push_fv(b, out);
        }
        Expr::Contr(x, x1, x2, b) => {
            let inner = fv_list(b);
            if inner.iter().any(|y| y == x1 || y == x2) {
                out.push(x.clone());
                out.extend(inner.into_iter().filter(|y| y != x1 && y != x2));
            } else {
                out.extend(inner);
            }
        }
    }
}

/// Free variables as a set.
pub fn fv_set(e: &Expr) -> BTreeSet<Var> {
    fv_list(e).into_iter().collect()
}

/// Free variables without duplicates, in order of first occurrence.
pub fn fv_ordered(e: &Expr) -> Vec<Var> {
    let mut seen = BTreeSet::new();
    fv_list(e)
        .into_iter()
        .filter(|x| seen.insert(x.clone()))
        .collect()
}

/// The side condition a node fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Clause {
    /// A binder whose variable is not free in its body, with `w ∈ R`.
    BinderUnused(Var),
    /// Two premises share a free variable, with `c ∈ R`.
    SharedFree(Vec<Var>),
    /// Weakening with `w ∉ R`.
    WeakeningUnavailable,
    /// Weakening of a variable already free in the body.
    WeakenedVarFree(Var),
    /// Contraction with `c ∉ R`.
    ContractionUnavailable,
    /// Contraction with two identical leaves.
    SameLeaves,
    /// Contraction whose head is free in the body.
    HeadFree(Var),
    /// A contraction leaf missing from the body, with `w ∈ R`.
    LeafUnused(Var),
    /// A term where a context is required or vice versa.
    Sort,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::BinderUnused(x) => write!(f, "bound variable {x} does not occur in the body"),
            Clause::SharedFree(xs) => {
                let names: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                write!(f, "premises share free variables {}", names.join(", "))
            }
            Clause::WeakeningUnavailable => write!(f, "weakening is not available without w"),
            Clause::WeakenedVarFree(x) => write!(f, "weakened variable {x} is free in the body"),
            Clause::ContractionUnavailable => write!(f, "contraction is not available without c"),
            Clause::SameLeaves => write!(f, "contraction leaves must differ"),
            Clause::HeadFree(x) => write!(f, "contracted variable {x} is free in the body"),
            Clause::LeafUnused(x) => write!(f, "contraction leaf {x} does not occur in the body"),
            Clause::Sort => write!(f, "ill-sorted expression"),
        }
    }
}

/// A failed formation rule at a node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub path: Path,
    pub clause: Clause,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {}: {}", path_string(&self.path), self.clause)
    }
}

impl std::error::Error for Violation {}

/// Check every formation rule under `res`, reporting the first violation in
/// preorder.
pub fn check(e: &Expr, res: Res) -> Result<(), Violation> {
    if e.sort().is_none() {
        return Err(Violation {
            path: vec![],
            clause: Clause::Sort,
        });
    }
    let mut path = Vec::new();
    walk(e, res, &mut path).map(|_| ())
}

pub fn is_well_formed(e: &Expr, res: Res) -> bool {
    check(e, res).is_ok()
}

/// Returns the free set of `e` on success.
fn walk(e: &Expr, res: Res, path: &mut Path) -> Result<BTreeSet<Var>, Violation> {
    let fail = |path: &Path, clause| {
        Err(Violation {
            path: path.clone(),
            clause,
        })
    };
    match e {
        Expr::Var(x) => Ok(BTreeSet::from([x.clone()])),
        Expr::Abs(x, b) | Expr::Sel(x, b) => {
            let mut fv = child(b, 0, res, path)?;
            if res.weakening && !fv.contains(x) {
                return fail(path, Clause::BinderUnused(x.clone()));
            }
            fv.remove(x);
            Ok(fv)
        }
        Expr::App(a, b) | Expr::Cut(a, b) | Expr::Cons(a, b) => {
            let fa = child(a, 0, res, path)?;
            let fb = child(b, 1, res, path)?;
            if res.contraction {
                let shared: Vec<Var> = fa.intersection(&fb).cloned().collect();
                if !shared.is_empty() {
                    return fail(path, Clause::SharedFree(shared));
                }
            }
            Ok(fa.union(&fb).cloned().collect())
        }
        Expr::Weak(x, b) => {
            if !res.weakening {
                return fail(path, Clause::WeakeningUnavailable);
            }
            let mut fv = child(b, 0, res, path)?;
            if fv.contains(x) {
                return fail(path, Clause::WeakenedVarFree(x.clone()));
            }
            fv.insert(x.clone());
            Ok(fv)
        }
        Expr::Contr(x, x1, x2, b) => {
            if !res.contraction {
                return fail(path, Clause::ContractionUnavailable);
            }
            let mut fv = child(b, 0, res, path)?;
            if x1 == x2 {
                return fail(path, Clause::SameLeaves);
            }
            if fv.contains(x) && x != x1 && x != x2 {
                return fail(path, Clause::HeadFree(x.clone()));
            }
            if res.weakening {
                for leaf in [x1, x2] {
                    if !fv.contains(leaf) {
                        return fail(path, Clause::LeafUnused(leaf.clone()));
                    }
                }
            }
            let live = fv.remove(x1) | fv.remove(x2);
            if live {
                fv.insert(x.clone());
            }
            Ok(fv)
        }
    }
}

fn child(e: &Expr, i: usize, res: Res, path: &mut Path) -> Result<BTreeSet<Var>, Violation> {
    path.push(i);
    let r = walk(e, res, path);
    path.pop();
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{parse_lj, parse_nd};

    fn names(xs: &[Var]) -> Vec<String> {
        xs.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn list_concatenates() {
        assert_eq!(
            names(&fv_list(&parse_nd("x y x").unwrap())),
            ["x", "y", "x"]
        );
    }

    #[test]
    fn dead_contraction_keeps_body_list() {
        assert_eq!(names(&fv_list(&parse_nd("C[x<x1,x2] y").unwrap())), ["y"]);
    }

    #[test]
    fn live_contraction_puts_head_first() {
        assert_eq!(
            names(&fv_list(&parse_nd("C[x<x1,x2] y x2 x1").unwrap())),
            ["x", "y"]
        );
    }

    #[test]
    fn weakening_adds_variable() {
        assert_eq!(names(&fv_list(&parse_nd("W[x] \\y. y").unwrap())), ["x"]);
    }

    #[test]
    fn unused_binder_needs_no_w() {
        let e = parse_nd("\\x. y").unwrap();
        assert!(is_well_formed(&e, Res::NONE));
        assert!(is_well_formed(&e, Res::C));
        assert_eq!(
            check(&e, Res::W).unwrap_err().clause,
            Clause::BinderUnused(Var::new("x"))
        );
        assert!(!is_well_formed(&e, Res::CW));
    }

    #[test]
    fn dead_contraction_needs_no_w() {
        let e = parse_nd("C[y<y1,y2] x").unwrap();
        assert!(is_well_formed(&e, Res::C));
        assert!(!is_well_formed(&e, Res::CW));
        assert!(!is_well_formed(&e, Res::NONE));
    }

    #[test]
    fn duplication_needs_no_c() {
        let e = parse_nd("\\x. x x").unwrap();
        assert!(is_well_formed(&e, Res::NONE));
        assert!(is_well_formed(&e, Res::W));
        let v = check(&e, Res::C).unwrap_err();
        assert_eq!(v.path, vec![0]);
        assert!(matches!(v.clause, Clause::SharedFree(_)));
    }

    #[test]
    fn weakened_duplication() {
        let e = parse_nd("W[x] \\y. y y").unwrap();
        assert!(is_well_formed(&e, Res::W));
        assert!(!is_well_formed(&e, Res::CW));
        assert!(!is_well_formed(&e, Res::C));
    }

    #[test]
    fn sequent_example_needs_both() {
        let e = parse_lj("\\x. W[x] C[y<y1,y2] (y1 (y2 :: ^z. z))").unwrap();
        assert!(is_well_formed(&e, Res::CW));
        for r in [Res::NONE, Res::C, Res::W] {
            assert!(!is_well_formed(&e, r), "{r}");
        }
    }

    #[test]
    fn violation_path_points_at_node() {
        let e = parse_nd("a (\\x. W[x] x)").unwrap();
        let v = check(&e, Res::W).unwrap_err();
        assert_eq!(v.path, vec![1, 0]);
        assert_eq!(
            v.to_string(),
            "at 1.0: weakened variable x is free in the body"
        );
    }
}
