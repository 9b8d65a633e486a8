use std::collections::BTreeMap;
use std::fmt;

use crate::syntax::{IType, Res, Var};

/// A finite assignment of types to distinct variables.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Basis(pub BTreeMap<Var, IType>);

impl Basis {
    pub fn new() -> Basis {
        Basis(BTreeMap::new())
    }

    pub fn single(x: Var, t: IType) -> Basis {
        Basis(BTreeMap::from([(x, t)]))
    }

    pub fn get(&self, x: &Var) -> Option<&IType> {
        self.0.get(x)
    }

    pub fn contains(&self, x: &Var) -> bool {
        self.0.contains_key(x)
    }

    pub fn insert(&mut self, x: Var, t: IType) -> Option<IType> {
        self.0.insert(x, t)
    }

    pub fn remove(&mut self, x: &Var) -> Option<IType> {
        self.0.remove(x)
    }

    pub fn without(&self, x: &Var) -> Basis {
        let mut b = self.clone();
        b.remove(x);
        b
    }

    pub fn with(&self, x: Var, t: IType) -> Basis {
        let mut b = self.clone();
        b.insert(x, t);
        b
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.0.keys()
    }

    pub fn same_domain(&self, other: &Basis) -> bool {
        self.0.keys().eq(other.0.keys())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &IType)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self ⊔ other`: pointwise intersection on the shared domain.
    pub fn union(&self, other: &Basis) -> Basis {
        let mut out = self.clone();
        for (x, t) in other.iter() {
            let merged = match out.get(x) {
                Some(s) => s.meet(t),
                None => t.clone(),
            };
            out.insert(x.clone(), merged);
        }
        out
    }

    /// `self ⊔_c other`: plain union without explicit contraction, disjoint
    /// union with it. Returns the shared variables on a clash.
    pub fn union_c(&self, other: &Basis, res: Res) -> Result<Basis, Vec<Var>> {
        if res.contraction {
            let shared: Vec<Var> = self
                .domain()
                .filter(|x| other.contains(x))
                .cloned()
                .collect();
            if !shared.is_empty() {
                return Err(shared);
            }
        }
        Ok(self.union(other))
    }

    pub fn union_all<'a>(bases: impl IntoIterator<Item = &'a Basis>) -> Basis {
        bases.into_iter().fold(Basis::new(), |acc, b| acc.union(b))
    }

    /// Every assignment of `self` is contained in `other`'s, pointwise.
    pub fn below(&self, other: &Basis) -> bool {
        self.iter()
            .all(|(x, t)| other.get(x).is_some_and(|s| t.subset_of(s)))
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(x, t)| format!("{x}: {t}")).collect();
        f.write_str(&parts.join(", "))
    }
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl FromIterator<(Var, IType)> for Basis {
    fn from_iter<I: IntoIterator<Item = (Var, IType)>>(iter: I) -> Basis {
        Basis(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_itype;

    fn b(pairs: &[(&str, &str)]) -> Basis {
        pairs
            .iter()
            .map(|(x, t)| (Var::new(x), parse_itype(t).unwrap()))
            .collect()
    }

    #[test]
    fn union_intersects_shared() {
        let u = b(&[("x", "a"), ("y", "b")]).union(&b(&[("x", "c")]));
        assert_eq!(u, b(&[("x", "a /\\ c"), ("y", "b")]));
    }

    #[test]
    fn union_c_requires_disjointness_with_c() {
        let g = b(&[("x", "a")]);
        assert!(g.union_c(&b(&[("x", "b")]), Res::C).is_err());
        assert!(g.union_c(&b(&[("x", "b")]), Res::W).is_ok());
        assert!(g.union_c(&b(&[("y", "b")]), Res::CW).is_ok());
    }

    #[test]
    fn union_laws() {
        let (p, q, r) = (
            b(&[("x", "a")]),
            b(&[("x", "b"), ("y", "c")]),
            b(&[("y", "a -> a")]),
        );
        assert_eq!(p.union(&q), q.union(&p));
        assert_eq!(p.union(&q).union(&r), p.union(&q.union(&r)));
        assert_eq!(p.union(&p), p);
    }
}
