use std::fmt;

use thiserror::Error;

use super::subst::{append, subst};
use crate::syntax::{path_string, Base, Expr, Path, Res, Supply, Var};
use crate::wellformed::fv_set;

/// Reduction rule tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Beta,
    Sigma,
    Pi,
    Mu,
    Gamma0,
    Gamma0p,
    Gamma1,
    Gamma2,
    Gamma3,
    Gamma4,
    Gamma5,
    Gamma6,
    Omega1,
    Omega2,
    Omega3,
    Omega4,
    Omega5,
    Omega6,
    GammaOmega1,
    GammaOmega2,
}

impl Rule {
    pub const ALL: [Rule; 20] = [
        Rule::Beta,
        Rule::Sigma,
        Rule::Pi,
        Rule::Mu,
        Rule::Gamma0,
        Rule::Gamma0p,
        Rule::Gamma1,
        Rule::Gamma2,
        Rule::Gamma3,
        Rule::Gamma4,
        Rule::Gamma5,
        Rule::Gamma6,
        Rule::Omega1,
        Rule::Omega2,
        Rule::Omega3,
        Rule::Omega4,
        Rule::Omega5,
        Rule::Omega6,
        Rule::GammaOmega1,
        Rule::GammaOmega2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Beta => "beta",
            Rule::Sigma => "sigma",
            Rule::Pi => "pi",
            Rule::Mu => "mu",
            Rule::Gamma0 => "gamma0",
            Rule::Gamma0p => "gamma0'",
            Rule::Gamma1 => "gamma1",
            Rule::Gamma2 => "gamma2",
            Rule::Gamma3 => "gamma3",
            Rule::Gamma4 => "gamma4",
            Rule::Gamma5 => "gamma5",
            Rule::Gamma6 => "gamma6",
            Rule::Omega1 => "omega1",
            Rule::Omega2 => "omega2",
            Rule::Omega3 => "omega3",
            Rule::Omega4 => "omega4",
            Rule::Omega5 => "omega5",
            Rule::Omega6 => "omega6",
            Rule::GammaOmega1 => "gammaOmega1",
            Rule::GammaOmega2 => "gammaOmega2",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name() == s)
    }

    /// Whether the calculus of `base` and `res` has this rule.
    pub fn available(self, base: Base, res: Res) -> bool {
        let lj = base == Base::Lj;
        match self {
            Rule::Beta => true,
            Rule::Sigma | Rule::Pi | Rule::Mu => lj,
            Rule::Gamma0 | Rule::Gamma0p => res == Res::C,
            Rule::Gamma1 | Rule::Gamma2 | Rule::Gamma3 => res.contraction,
            Rule::Gamma4 | Rule::Gamma5 | Rule::Gamma6 => lj && res.contraction,
            Rule::Omega1 | Rule::Omega2 | Rule::Omega3 => res.weakening,
            Rule::Omega4 | Rule::Omega5 | Rule::Omega6 => lj && res.weakening,
            Rule::GammaOmega1 | Rule::GammaOmega2 => res == Res::CW,
        }
    }

    /// The rules of a calculus.
    pub fn of(base: Base, res: Res) -> Vec<Rule> {
        Rule::ALL
            .into_iter()
            .filter(|r| r.available(base, res))
            .collect()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A rule instance at a position.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Redex {
    pub path: Path,
    pub rule: Rule,
}

impl fmt::Display for Redex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.rule, path_string(&self.path))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("no subexpression at {0}")]
    BadPath(String),
    #[error("{rule} does not apply at {path}")]
    NoMatch { rule: Rule, path: String },
}

fn outside(e: &Expr, xs: &[&Var]) -> bool {
    let fv = fv_set(e);
    xs.iter().all(|x| !fv.contains(*x))
}

/// Whether the left-hand side of `rule` matches `e` at its root, side
/// conditions included. Availability is not checked here.
pub fn matches(e: &Expr, rule: Rule) -> bool {
    use Expr::*;
    match (rule, e) {
        (Rule::Beta, App(f, _)) => matches!(**f, Abs(..)),
        (Rule::Beta, Cut(f, k)) => matches!(**f, Abs(..)) && matches!(**k, Cons(..)),
        (Rule::Sigma, Cut(_, k)) => matches!(**k, Sel(..)),
        (Rule::Pi, Cut(t, _)) => matches!(**t, Cut(..)),
        (Rule::Mu, Sel(x, b)) => match &**b {
            Cut(h, k) => matches!(&**h, Var(y) if y == x) && outside(k, &[x]),
            _ => false,
        },
        (Rule::Gamma0, Contr(_, x1, x2, b)) => matches!(&**b, Var(y) if y != x1 && y != x2),
        (Rule::Gamma0p, Contr(_, x1, x2, b)) => matches!(&**b, Var(y) if y == x1 || y == x2),
        (Rule::Gamma1, Contr(_, _, _, b)) => matches!(**b, Abs(..)),
        (Rule::Gamma4, Contr(_, _, _, b)) => matches!(**b, Sel(..)),
        (Rule::Gamma2, Contr(_, x1, x2, b)) => match &**b {
            App(_, n) | Cut(_, n) => outside(n, &[x1, x2]),
            _ => false,
        },
        (Rule::Gamma3, Contr(_, x1, x2, b)) => match &**b {
            App(m, _) | Cut(m, _) => outside(m, &[x1, x2]),
            _ => false,
        },
        (Rule::Gamma5, Contr(_, x1, x2, b)) => match &**b {
            Cons(_, k) => outside(k, &[x1, x2]),
            _ => false,
        },
        (Rule::Gamma6, Contr(_, x1, x2, b)) => match &**b {
            Cons(t, _) => outside(t, &[x1, x2]),
            _ => false,
        },
        (Rule::Omega1, Abs(x, b)) | (Rule::Omega4, Sel(x, b)) => {
            matches!(&**b, Weak(y, _) if y != x)
        }
        (Rule::Omega2, App(m, _) | Cut(m, _)) | (Rule::Omega5, Cons(m, _)) => {
            matches!(**m, Weak(..))
        }
        (Rule::Omega3, App(_, n) | Cut(_, n)) | (Rule::Omega6, Cons(_, n)) => {
            matches!(**n, Weak(..))
        }
        (Rule::GammaOmega1, Contr(_, x1, x2, b)) => {
            matches!(&**b, Weak(y, _) if y != x1 && y != x2)
        }
        (Rule::GammaOmega2, Contr(_, x1, x2, b)) => {
            matches!(&**b, Weak(y, _) if y == x1 || y == x2)
        }
        _ => false,
    }
}

/// The rules of the calculus that apply at the root of `e`, in tag order.
pub fn rules_at(e: &Expr, base: Base, res: Res) -> Vec<Rule> {
    Rule::ALL
        .into_iter()
        .filter(|r| r.available(base, res) && matches(e, *r))
        .collect()
}

fn drop_if_free(x: &Var, e: Expr, other: &Expr) -> Expr {
    if fv_set(other).contains(x) {
        e
    } else {
        Expr::weak(x.clone(), e)
    }
}

/// Contract the redex of `rule` at the root of `e`. Panics if it does not
/// match; callers check with [`matches`] first.
pub fn contract(e: &Expr, rule: Rule, supply: &mut Supply) -> Expr {
    use Expr::*;
    assert!(matches(e, rule), "{rule} does not match {e}");
    let c = |x: &crate::syntax::Var, a: &crate::syntax::Var, b: &crate::syntax::Var, body: Expr| {
        Expr::contr(x.clone(), a.clone(), b.clone(), body)
    };
    match (rule, e) {
        (Rule::Beta, App(f, n)) => match &**f {
            Abs(x, m) => subst(m, n, x, supply),
            _ => unreachable!(),
        },
        (Rule::Beta, Cut(f, k)) => match (&**f, &**k) {
            (Abs(x, t), Cons(u, k)) => Expr::cut(
                (**u).clone(),
                Expr::sel(x.clone(), Expr::cut((**t).clone(), (**k).clone())),
            ),
            _ => unreachable!(),
        },
        (Rule::Sigma, Cut(t, k)) => match &**k {
            Sel(x, v) => subst(v, t, x, supply),
            _ => unreachable!(),
        },
        (Rule::Pi, Cut(tk, k2)) => match &**tk {
            Cut(t, k) => Expr::cut((**t).clone(), append(k, k2)),
            _ => unreachable!(),
        },
        (Rule::Mu, Sel(_, b)) => match &**b {
            Cut(_, k) => (**k).clone(),
            _ => unreachable!(),
        },
        (Rule::Gamma0, Contr(_, _, _, b)) => (**b).clone(),
        (Rule::Gamma0p, Contr(x, _, _, _)) => Var(x.clone()),
        (Rule::Gamma1, Contr(x, a, b2, body)) => match &**body {
            Abs(y, m) => Expr::abs(y.clone(), c(x, a, b2, (**m).clone())),
            _ => unreachable!(),
        },
        (Rule::Gamma4, Contr(x, a, b2, body)) => match &**body {
            Sel(y, m) => Expr::sel(y.clone(), c(x, a, b2, (**m).clone())),
            _ => unreachable!(),
        },
        (Rule::Gamma2, Contr(x, a, b2, body)) => match &**body {
            App(m, n) => Expr::app(c(x, a, b2, (**m).clone()), (**n).clone()),
            Cut(m, n) => Expr::cut(c(x, a, b2, (**m).clone()), (**n).clone()),
            _ => unreachable!(),
        },
        (Rule::Gamma3, Contr(x, a, b2, body)) => match &**body {
            App(m, n) => Expr::app((**m).clone(), c(x, a, b2, (**n).clone())),
            Cut(m, n) => Expr::cut((**m).clone(), c(x, a, b2, (**n).clone())),
            _ => unreachable!(),
        },
        (Rule::Gamma5, Contr(x, a, b2, body)) => match &**body {
            Cons(t, k) => Expr::cons(c(x, a, b2, (**t).clone()), (**k).clone()),
            _ => unreachable!(),
        },
        (Rule::Gamma6, Contr(x, a, b2, body)) => match &**body {
            Cons(t, k) => Expr::cons((**t).clone(), c(x, a, b2, (**k).clone())),
            _ => unreachable!(),
        },
        (Rule::Omega1, Abs(x, b)) => match &**b {
            Weak(y, t) => Expr::weak(y.clone(), Expr::abs(x.clone(), (**t).clone())),
            _ => unreachable!(),
        },
        (Rule::Omega4, Sel(x, b)) => match &**b {
            Weak(y, t) => Expr::weak(y.clone(), Expr::sel(x.clone(), (**t).clone())),
            _ => unreachable!(),
        },
        (Rule::Omega2, App(m, n)) | (Rule::Omega2, Cut(m, n)) | (Rule::Omega5, Cons(m, n)) => {
            match &**m {
                Weak(x, m0) => drop_if_free(x, rebuild(e, (**m0).clone(), (**n).clone()), n),
                _ => unreachable!(),
            }
        }
        (Rule::Omega3, App(m, n)) | (Rule::Omega3, Cut(m, n)) | (Rule::Omega6, Cons(m, n)) => {
            match &**n {
                Weak(x, n0) => drop_if_free(x, rebuild(e, (**m).clone(), (**n0).clone()), m),
                _ => unreachable!(),
            }
        }
        (Rule::GammaOmega1, Contr(x, a, b2, body)) => match &**body {
            Weak(y, inner) => Expr::weak(y.clone(), c(x, a, b2, (**inner).clone())),
            _ => unreachable!(),
        },
        (Rule::GammaOmega2, Contr(x, a, b2, body)) => match &**body {
            Weak(y, inner) => {
                let other = if y == a { b2 } else { a };
                subst(inner, &Var(x.clone()), other, supply)
            }
            _ => unreachable!(),
        },
        _ => unreachable!(),
    }
}

/// The same binary constructor as `like` with new children.
fn rebuild(like: &Expr, a: Expr, b: Expr) -> Expr {
    match like {
        Expr::App(..) => Expr::app(a, b),
        Expr::Cut(..) => Expr::cut(a, b),
        Expr::Cons(..) => Expr::cons(a, b),
        _ => unreachable!(),
    }
}

/// All redexes of `e` in leftmost-outermost order: preorder on positions,
/// tag order at one position.
pub fn redexes(e: &Expr, base: Base, res: Res) -> Vec<Redex> {
    let mut out = Vec::new();
    collect(e, base, res, &mut Vec::new(), &mut out);
    out
}

fn collect(e: &Expr, base: Base, res: Res, path: &mut Path, out: &mut Vec<Redex>) {
    for rule in rules_at(e, base, res) {
        out.push(Redex {
            path: path.clone(),
            rule,
        });
    }
    for (i, c) in e.children().into_iter().enumerate() {
        path.push(i);
        collect(c, base, res, path, out);
        path.pop();
    }
}

/// Contract one redex of `e`.
pub fn step(
    e: &Expr,
    redex: &Redex,
    base: Base,
    res: Res,
    supply: &mut Supply,
) -> Result<Expr, StepError> {
    let sub = e
        .at(&redex.path)
        .ok_or_else(|| StepError::BadPath(path_string(&redex.path)))?;
    if !redex.rule.available(base, res) || !matches(sub, redex.rule) {
        return Err(StepError::NoMatch {
            rule: redex.rule,
            path: path_string(&redex.path),
        });
    }
    supply.observe(e);
    let new = contract(sub, redex.rule, supply);
    Ok(e.replace_at(&redex.path, new).expect("path checked above"))
}
