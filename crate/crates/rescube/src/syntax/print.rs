use super::Expr;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    /// Top level, binder body, cons tail: binders may extend to the right.
    Open,
    /// Head of an application or cut.
    Fun,
    /// Argument of an application or cut, head of a cons.
    Arg,
    ConsHead,
}

/// Render an expression in the ASCII surface syntax. The output parses back
/// to the same expression.
pub fn print(e: &Expr) -> String {
    let mut s = String::new();
    go(e, Slot::Open, &mut s);
    s
}

fn go(e: &Expr, slot: Slot, out: &mut String) {
    let bare = match (e, slot) {
        (Expr::Var(_), _) => true,
        (_, Slot::Open) => true,
        (Expr::App(..) | Expr::Cut(..), Slot::Fun | Slot::ConsHead) => true,
        _ => false,
    };
    if !bare {
        out.push('(');
        go(e, Slot::Open, out);
        out.push(')');
        return;
    }
    match e {
        Expr::Var(x) => out.push_str(&x.to_string()),
        Expr::Abs(x, b) => {
            out.push_str(&format!("\\{x}. "));
            go(b, Slot::Open, out);
        }
        Expr::Sel(x, b) => {
            out.push_str(&format!("^{x}. "));
            go(b, Slot::Open, out);
        }
        Expr::Weak(x, b) => {
            out.push_str(&format!("W[{x}] "));
            prefix_body(b, out);
        }
        Expr::Contr(x, a, c, b) => {
            out.push_str(&format!("C[{x}<{a},{c}] "));
            prefix_body(b, out);
        }
        Expr::App(f, a) | Expr::Cut(f, a) => {
            go(f, Slot::Fun, out);
            out.push(' ');
            go(a, Slot::Arg, out);
        }
        Expr::Cons(h, t) => {
            go(h, Slot::ConsHead, out);
            out.push_str(" :: ");
            go(t, Slot::Open, out);
        }
    }
}

/// Bodies of weakening and contraction are grouped when they are compound,
/// which keeps the scope of the prefix visible.
fn prefix_body(b: &Expr, out: &mut String) {
    if matches!(b, Expr::App(..) | Expr::Cut(..) | Expr::Cons(..)) {
        go(b, Slot::Arg, out);
    } else {
        go(b, Slot::Open, out);
    }
}

#[cfg(test)]
mod tests {
    use crate::{parse_lj, parse_nd};

    fn round_nd(s: &str) -> String {
        parse_nd(s).unwrap().to_string()
    }

    #[test]
    fn weakening_over_abstraction() {
        assert_eq!(round_nd("W[x] \\y. y"), "W[x] \\y. y");
    }

    #[test]
    fn contraction_groups_application() {
        assert_eq!(round_nd("C[w<w#1,w#2] w#1 w#2"), "C[w<w#1,w#2] (w#1 w#2)");
    }

    #[test]
    fn abstraction_in_function_position() {
        assert_eq!(round_nd("(\\x. x) y z"), "(\\x. x) y z");
        assert_eq!(round_nd("a (b c)"), "a (b c)");
    }

    #[test]
    fn lj_contexts() {
        let s = "\\x. x (y :: z (^r. r) :: ^q. q)";
        assert_eq!(parse_lj(s).unwrap().to_string(), s);
        let t = parse_lj("W[z] (^x. x (^y. y))").unwrap();
        assert_eq!(t.to_string(), "W[z] ^x. x (^y. y)");
        assert_eq!(parse_lj(&t.to_string()).unwrap(), t);
    }
}
