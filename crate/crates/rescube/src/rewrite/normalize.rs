use std::fmt;

use super::canon::canonical;
use super::rules::{redexes, step, Redex};
use crate::syntax::{Base, Expr, Res, Supply};

/// Which redex to contract next.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// The first redex in preorder.
    Leftmost,
    /// The first redex in preorder that contains no other redex.
    Innermost,
}

impl Strategy {
    pub fn pick(self, rs: &[Redex]) -> Option<Redex> {
        match self {
            Strategy::Leftmost => rs.first().cloned(),
            Strategy::Innermost => rs
                .iter()
                .find(|r| {
                    !rs.iter()
                        .any(|o| o.path.len() > r.path.len() && o.path.starts_with(&r.path))
                })
                .cloned(),
        }
    }
}

/// One contraction and the canonical expression it produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub redex: Redex,
    pub result: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub start: Expr,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn last(&self) -> &Expr {
        self.steps.last().map(|s| &s.result).unwrap_or(&self.start)
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.start)?;
        for s in &self.steps {
            writeln!(f, "-> {} : {}", s.redex, s.result)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    NormalForm(Trace),
    FuelExhausted(Trace),
}

impl Outcome {
    pub fn trace(&self) -> &Trace {
        match self {
            Outcome::NormalForm(t) | Outcome::FuelExhausted(t) => t,
        }
    }

    pub fn is_normal(&self) -> bool {
        matches!(self, Outcome::NormalForm(_))
    }
}

/// Reduce on canonical representatives until no redex is left or `fuel`
/// steps have been made.
pub fn normalize(e: &Expr, base: Base, res: Res, strategy: Strategy, fuel: usize) -> Outcome {
    let start = canonical(e);
    let mut supply = Supply::above(&start);
    let mut cur = start.clone();
    let mut steps = Vec::new();
    loop {
        let rs = redexes(&cur, base, res);
        let Some(r) = strategy.pick(&rs) else {
            return Outcome::NormalForm(Trace { start, steps });
        };
        if steps.len() >= fuel {
            return Outcome::FuelExhausted(Trace { start, steps });
        }
        let next = step(&cur, &r, base, res, &mut supply).expect("enumerated redex applies");
        cur = canonical(&next);
        steps.push(TraceStep {
            redex: r,
            result: cur.clone(),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_nd;
    use crate::rewrite::Rule;

    #[test]
    fn identity_application() {
        let out = normalize(
            &parse_nd("(\\x. x) y").unwrap(),
            Base::Nd,
            Res::NONE,
            Strategy::Leftmost,
            10,
        );
        assert!(out.is_normal());
        assert_eq!(out.trace().steps.len(), 1);
        assert_eq!(out.trace().last(), &parse_nd("y").unwrap());
    }

    #[test]
    fn omega_runs_out_of_fuel() {
        let e = parse_nd("(\\x. x x) (\\x. x x)").unwrap();
        let out = normalize(&e, Base::Nd, Res::NONE, Strategy::Leftmost, 20);
        assert!(!out.is_normal());
        assert_eq!(out.trace().steps.len(), 20);
    }

    #[test]
    fn both_orders_of_the_weakening_example() {
        let e = parse_nd("(\\x. x (W[x] y)) z").unwrap();
        let rules = |s: Strategy| {
            let out = normalize(&e, Base::Nd, Res::W, s, 10);
            assert_eq!(out.trace().last(), &parse_nd("z y").unwrap());
            out.trace()
                .steps
                .iter()
                .map(|s| s.redex.rule)
                .collect::<Vec<_>>()
        };
        assert_eq!(rules(Strategy::Leftmost), vec![Rule::Beta, Rule::Omega3]);
        assert_eq!(rules(Strategy::Innermost), vec![Rule::Omega3, Rule::Beta]);
    }
}
