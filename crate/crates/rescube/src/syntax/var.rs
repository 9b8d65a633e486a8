use std::fmt;
use std::sync::Arc;

/// A term variable: a user-visible base name plus a freshness tag.
///
/// Tag 0 marks a name written by the user and prints as the bare base.
/// A positive tag marks a machine-issued name and prints as `base#tag`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub base: Arc<str>,
    pub tag: u32,
}

impl Var {
    pub fn new(base: &str) -> Var {
        Var {
            base: Arc::from(base),
            tag: 0,
        }
    }

    pub fn tagged(base: &str, tag: u32) -> Var {
        Var {
            base: Arc::from(base),
            tag,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tag == 0 {
            f.write_str(&self.base)
        } else {
            write!(f, "{}#{}", self.base, self.tag)
        }
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Deterministic supply of fresh variable names.
///
/// The supply is a single counter shared by all bases, so a name it issues
/// never collides with a name it issued before or with any name it has seen.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Supply {
    next: u32,
}

impl Supply {
    pub fn new() -> Supply {
        Supply { next: 1 }
    }

    /// A supply that will never reissue a tag occurring in `e`.
    pub fn above(e: &crate::Expr) -> Supply {
        let mut s = Supply::new();
        s.observe(e);
        s
    }

    /// Record every tag in `e` as used.
    pub fn observe(&mut self, e: &crate::Expr) {
        let mut max = 0;
        e.for_each_var(&mut |v| max = max.max(v.tag));
        self.observe_tag(max);
    }

    pub fn observe_tag(&mut self, tag: u32) {
        if tag >= self.next {
            self.next = tag + 1;
        }
    }

    pub fn fresh(&mut self, base: &str) -> Var {
        let v = Var::tagged(base, self.next.max(1));
        self.next = v.tag + 1;
        v
    }

    /// The tag the next call to [`Supply::fresh`] will use.
    pub fn peek(&self) -> u32 {
        self.next.max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_nd;

    #[test]
    fn first_issue_is_tag_one() {
        let mut s = Supply::new();
        assert_eq!(s.fresh("z").to_string(), "z#1");
        assert_eq!(s.fresh("z").to_string(), "z#2");
    }

    #[test]
    fn supply_skips_seen_tags() {
        let e = parse_nd("\\x. x z#5").unwrap();
        let mut s = Supply::above(&e);
        let v = s.fresh("z");
        assert!(v.tag >= 6);
    }

    #[test]
    fn same_state_same_name() {
        let a = Supply::new();
        let b = a.clone();
        assert_eq!(a.clone().fresh("q"), b.clone().fresh("q"));
    }
}
