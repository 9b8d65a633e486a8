use std::collections::BTreeMap;

use super::{Expr, Var};

/// Rename bound variables to `%n` in binding order, leaving free names as
/// they are. Two expressions are alpha-equivalent iff their normalized forms
/// are equal.
pub fn alpha_norm(e: &Expr) -> Expr {
    let mut n = 0;
    norm(e, &BTreeMap::new(), &mut n)
}

pub fn alpha_eq(a: &Expr, b: &Expr) -> bool {
    alpha_norm(a) == alpha_norm(b)
}

fn norm(e: &Expr, env: &BTreeMap<Var, Var>, n: &mut u32) -> Expr {
    let look = |x: &Var| env.get(x).cloned().unwrap_or_else(|| x.clone());
    let fresh = |n: &mut u32| {
        *n += 1;
        Var::tagged("%", *n)
    };
    match e {
        Expr::Var(x) => Expr::Var(look(x)),
        Expr::Weak(x, b) => Expr::weak(look(x), norm(b, env, n)),
        Expr::Abs(x, b) | Expr::Sel(x, b) => {
            let y = fresh(n);
            let mut env2 = env.clone();
            env2.insert(x.clone(), y.clone());
            let body = norm(b, &env2, n);
            if matches!(e, Expr::Abs(..)) {
                Expr::abs(y, body)
            } else {
                Expr::sel(y, body)
            }
        }
        Expr::Contr(x, a, c, b) => {
            let x2 = look(x);
            let (a2, c2) = (fresh(n), fresh(n));
            let mut env2 = env.clone();
            env2.insert(a.clone(), a2.clone());
            env2.insert(c.clone(), c2.clone());
            Expr::contr(x2, a2, c2, norm(b, &env2, n))
        }
        Expr::App(a, b) => Expr::app(norm(a, env, n), norm(b, env, n)),
        Expr::Cut(a, b) => Expr::cut(norm(a, env, n), norm(b, env, n)),
        Expr::Cons(a, b) => Expr::cons(norm(a, env, n), norm(b, env, n)),
    }
}
