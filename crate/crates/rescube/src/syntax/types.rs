use std::fmt;

/// A strict type: an atom, or an arrow whose codomain is again strict.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StrictType {
    Atom(String),
    Arrow(IType, Box<StrictType>),
}

/// A nonempty intersection of strict types, kept sorted and duplicate free,
/// so that equal intersections are equal values.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IType(Vec<StrictType>);

impl StrictType {
    pub fn atom(name: &str) -> StrictType {
        StrictType::Atom(name.to_string())
    }

    pub fn arrow(dom: IType, cod: StrictType) -> StrictType {
        StrictType::Arrow(dom, Box::new(cod))
    }

    /// Simple arrow `a -> b` between strict types.
    pub fn fun(dom: StrictType, cod: StrictType) -> StrictType {
        StrictType::arrow(IType::single(dom), cod)
    }

    /// True if no intersection with two or more members occurs.
    pub fn is_simple(&self) -> bool {
        match self {
            StrictType::Atom(_) => true,
            StrictType::Arrow(d, c) => d.is_simple() && c.is_simple(),
        }
    }

    pub fn map_atoms(&self, f: &mut impl FnMut(&str) -> StrictType) -> StrictType {
        match self {
            StrictType::Atom(a) => f(a),
            StrictType::Arrow(d, c) => StrictType::arrow(d.map_atoms(f), c.map_atoms(f)),
        }
    }

    pub fn for_each_atom(&self, f: &mut impl FnMut(&str)) {
        match self {
            StrictType::Atom(a) => f(a),
            StrictType::Arrow(d, c) => {
                for s in d.iter() {
                    s.for_each_atom(f);
                }
                c.for_each_atom(f)
            }
        }
    }
}

impl IType {
    /// Canonical intersection of the given members. Panics on an empty list.
    pub fn new(mut members: Vec<StrictType>) -> IType {
        assert!(
            !members.is_empty(),
            "an intersection type needs at least one member"
        );
        members.sort();
        members.dedup();
        IType(members)
    }

    pub fn try_new(members: Vec<StrictType>) -> Option<IType> {
        (!members.is_empty()).then(|| IType::new(members))
    }

    pub fn single(s: StrictType) -> IType {
        IType(vec![s])
    }

    pub fn members(&self) -> &[StrictType] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, StrictType> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, s: &StrictType) -> bool {
        self.0.binary_search(s).is_ok()
    }

    /// Every member of `self` is a member of `other`.
    pub fn subset_of(&self, other: &IType) -> bool {
        self.0.iter().all(|s| other.contains(s))
    }

    /// The intersection `self ∩ other`.
    pub fn meet(&self, other: &IType) -> IType {
        IType::new(self.0.iter().chain(other.0.iter()).cloned().collect())
    }

    pub fn is_simple(&self) -> bool {
        self.0.len() == 1 && self.0[0].is_simple()
    }

    pub fn map_atoms(&self, f: &mut impl FnMut(&str) -> StrictType) -> IType {
        IType::new(self.0.iter().map(|s| s.map_atoms(f)).collect())
    }
}

impl fmt::Display for StrictType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrictType::Atom(a) => f.write_str(a),
            StrictType::Arrow(d, c) => {
                if d.len() == 1 && matches!(d.0[0], StrictType::Atom(_)) {
                    write!(f, "{} -> {}", d.0[0], c)
                } else if d.len() == 1 {
                    write!(f, "({}) -> {}", d.0[0], c)
                } else {
                    write!(f, "{} -> {}", d, c)
                }
            }
        }
    }
}

impl fmt::Display for IType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|s| match s {
                StrictType::Atom(a) => a.clone(),
                _ => format!("({s})"),
            })
            .collect();
        f.write_str(&parts.join(" /\\ "))
    }
}

impl fmt::Debug for StrictType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for IType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
