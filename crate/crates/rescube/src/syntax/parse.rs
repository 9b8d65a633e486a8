use thiserror::Error;

use super::{Base, Expr, IType, StrictType, Supply, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String, u32),
    Lambda,
    Hat,
    Dot,
    LParen,
    RParen,
    ColonColon,
    WOpen,
    COpen,
    Lt,
    Comma,
    RBracket,
    Arrow,
    Meet,
    Eof,
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: String| ParseError { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let peek = chars.get(i + 1).copied();
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '-' if peek == Some('-') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '-' if peek == Some('>') => {
                adv = 2;
                Some(Tok::Arrow)
            }
            '/' if peek == Some('\\') => {
                adv = 2;
                Some(Tok::Meet)
            }
            '\\' => Some(Tok::Lambda),
            '^' => Some(Tok::Hat),
            '.' => Some(Tok::Dot),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '<' => Some(Tok::Lt),
            ',' => Some(Tok::Comma),
            ']' => Some(Tok::RBracket),
            ':' if peek == Some(':') => {
                adv = 2;
                Some(Tok::ColonColon)
            }
            'W' | 'C' if peek == Some('[') => {
                adv = 2;
                Some(if c == 'W' { Tok::WOpen } else { Tok::COpen })
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len()
                    && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'')
                {
                    j += 1;
                }
                let name: String = chars[start..j].iter().collect();
                let mut tag = 0u32;
                if j < chars.len() && chars[j] == '#' {
                    let mut k = j + 1;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    if k == j + 1 {
                        return Err(err(
                            line,
                            col + (j - start),
                            "expected digits after '#'".into(),
                        ));
                    }
                    let digits: String = chars[j + 1..k].iter().collect();
                    tag = digits
                        .parse()
                        .map_err(|_| err(line, col + (j - start), "tag out of range".into()))?;
                    j = k;
                }
                adv = j - i;
                Some(Tok::Ident(name, tag))
            }
            other => return Err(err(line, col, format!("unexpected character '{other}'"))),
        };
        if let Some(t) = tok {
            out.push((t, pos));
        }
        i += adv;
        col += adv;
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
}

/// Parsed tree before sorts are resolved: juxtaposition is left open.
enum Raw {
    Var(Var, Pos),
    Juxt(Box<Raw>, Box<Raw>, Pos),
    Abs(Var, Box<Raw>, Pos),
    Sel(Var, Box<Raw>, Pos),
    Cons(Box<Raw>, Box<Raw>, Pos),
    Contr(Var, Var, Var, Box<Raw>, Pos),
    Weak(Var, Box<Raw>, Pos),
}

impl Raw {
    fn pos(&self) -> Pos {
        match self {
            Raw::Var(_, p)
            | Raw::Juxt(_, _, p)
            | Raw::Abs(_, _, p)
            | Raw::Sel(_, _, p)
            | Raw::Cons(_, _, p)
            | Raw::Contr(_, _, _, _, p)
            | Raw::Weak(_, _, p) => *p,
        }
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let p = self.pos();
        Err(ParseError {
            line: p.line,
            col: p.col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn ident(&mut self) -> Result<Var, ParseError> {
        match self.peek().clone() {
            Tok::Ident(n, t) => {
                self.bump();
                Ok(Var::tagged(&n, t))
            }
            _ => self.fail("expected a variable"),
        }
    }

    fn starts_binder(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Lambda | Tok::Hat | Tok::WOpen | Tok::COpen
        )
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Tok::Ident(..) | Tok::LParen)
    }

    fn expr(&mut self) -> Result<Raw, ParseError> {
        if self.starts_binder() {
            return self.binder();
        }
        let head = self.juxt()?;
        if *self.peek() == Tok::ColonColon {
            let p = self.pos();
            self.bump();
            let tail = self.expr()?;
            return Ok(Raw::Cons(Box::new(head), Box::new(tail), p));
        }
        Ok(head)
    }

    fn binder(&mut self) -> Result<Raw, ParseError> {
        let p = self.pos();
        match self.bump() {
            Tok::Lambda => {
                let x = self.ident()?;
                self.expect(Tok::Dot, "'.'")?;
                Ok(Raw::Abs(x, Box::new(self.expr()?), p))
            }
            Tok::Hat => {
                let x = self.ident()?;
                self.expect(Tok::Dot, "'.'")?;
                Ok(Raw::Sel(x, Box::new(self.expr()?), p))
            }
            Tok::WOpen => {
                let x = self.ident()?;
                self.expect(Tok::RBracket, "']'")?;
                Ok(Raw::Weak(x, Box::new(self.expr()?), p))
            }
            Tok::COpen => {
                let x = self.ident()?;
                self.expect(Tok::Lt, "'<'")?;
                let a = self.ident()?;
                self.expect(Tok::Comma, "','")?;
                let b = self.ident()?;
                self.expect(Tok::RBracket, "']'")?;
                Ok(Raw::Contr(x, a, b, Box::new(self.expr()?), p))
            }
            _ => unreachable!(),
        }
    }

    fn juxt(&mut self) -> Result<Raw, ParseError> {
        let mut acc = self.atom()?;
        loop {
            if self.starts_atom() {
                let p = self.pos();
                let a = self.atom()?;
                acc = Raw::Juxt(Box::new(acc), Box::new(a), p);
            } else if self.starts_binder() {
                let p = self.pos();
                let a = self.binder()?;
                return Ok(Raw::Juxt(Box::new(acc), Box::new(a), p));
            } else {
                return Ok(acc);
            }
        }
    }

    fn atom(&mut self) -> Result<Raw, ParseError> {
        let p = self.pos();
        match self.peek() {
            Tok::Ident(..) => Ok(Raw::Var(self.ident()?, p)),
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            _ => self.fail("expected a variable, '(' or a binder"),
        }
    }

    fn ty_arrow(&mut self) -> Result<IType, ParseError> {
        let dom = self.ty_meet()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let cod = self.ty_arrow()?;
            if cod.len() != 1 {
                return self.fail("the codomain of an arrow must be a strict type");
            }
            return Ok(IType::single(StrictType::arrow(
                dom,
                cod.members()[0].clone(),
            )));
        }
        Ok(dom)
    }

    fn ty_meet(&mut self) -> Result<IType, ParseError> {
        let mut parts = self.ty_atom()?.members().to_vec();
        while *self.peek() == Tok::Meet {
            self.bump();
            parts.extend(self.ty_atom()?.members().iter().cloned());
        }
        Ok(IType::new(parts))
    }

    fn ty_atom(&mut self) -> Result<IType, ParseError> {
        match self.peek().clone() {
            Tok::Ident(n, 0) => {
                self.bump();
                Ok(IType::single(StrictType::Atom(n)))
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty_arrow()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(t)
            }
            _ => self.fail("expected a type atom or '('"),
        }
    }
}

fn sort_err<T>(p: Pos, msg: &str) -> Result<T, ParseError> {
    Err(ParseError {
        line: p.line,
        col: p.col,
        msg: msg.to_string(),
    })
}

fn resolve(raw: Raw, base: Base, want_ctx: bool) -> Result<Expr, ParseError> {
    let p = raw.pos();
    match raw {
        Raw::Var(x, _) => {
            if want_ctx {
                return sort_err(p, "a variable is a term, but a context is expected here");
            }
            Ok(Expr::Var(x))
        }
        Raw::Abs(x, b, _) => {
            if want_ctx {
                return sort_err(
                    p,
                    "an abstraction is a term, but a context is expected here",
                );
            }
            Ok(Expr::abs(x, resolve(*b, base, false)?))
        }
        Raw::Juxt(f, a, _) => {
            if want_ctx {
                return sort_err(
                    p,
                    "an application is a term, but a context is expected here",
                );
            }
            match base {
                Base::Nd => Ok(Expr::app(
                    resolve(*f, base, false)?,
                    resolve(*a, base, false)?,
                )),
                Base::Lj => Ok(Expr::cut(
                    resolve(*f, base, false)?,
                    resolve(*a, base, true)?,
                )),
            }
        }
        Raw::Sel(x, b, _) => {
            if base == Base::Nd {
                return sort_err(p, "selection '^' exists only in the sequent base");
            }
            if !want_ctx {
                return sort_err(p, "a selection is a context, but a term is expected here");
            }
            Ok(Expr::sel(x, resolve(*b, base, false)?))
        }
        Raw::Cons(h, t, _) => {
            if base == Base::Nd {
                return sort_err(p, "'::' exists only in the sequent base");
            }
            if !want_ctx {
                return sort_err(p, "a cons is a context, but a term is expected here");
            }
            Ok(Expr::cons(
                resolve(*h, base, false)?,
                resolve(*t, base, true)?,
            ))
        }
        Raw::Contr(x, a, b, e, _) => Ok(Expr::contr(x, a, b, resolve(*e, base, want_ctx)?)),
        Raw::Weak(x, e, _) => Ok(Expr::weak(x, resolve(*e, base, want_ctx)?)),
    }
}

fn top_is_ctx(raw: &Raw) -> bool {
    match raw {
        Raw::Sel(..) | Raw::Cons(..) => true,
        Raw::Contr(_, _, _, e, _) | Raw::Weak(_, e, _) => top_is_ctx(e),
        _ => false,
    }
}

/// Parse an expression of the given base. LJ input may be a term or a
/// context. Bound names that clash are renamed apart with tagged names.
pub fn parse(src: &str, base: Base) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        i: 0,
    };
    let raw = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.fail("unexpected input after the end of the expression");
    }
    let want_ctx = base == Base::Lj && top_is_ctx(&raw);
    let e = resolve(raw, base, want_ctx)?;
    Ok(e.rename_apart(&mut Supply::new()))
}

pub fn parse_nd(src: &str) -> Result<Expr, ParseError> {
    parse(src, Base::Nd)
}

pub fn parse_lj(src: &str) -> Result<Expr, ParseError> {
    parse(src, Base::Lj)
}

/// Parse a type. The result may be an intersection.
pub fn parse_itype(src: &str) -> Result<IType, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        i: 0,
    };
    let t = p.ty_arrow()?;
    if *p.peek() != Tok::Eof {
        return p.fail("unexpected input after the end of the type");
    }
    Ok(t)
}

/// Parse a strict type: an atom or an arrow.
pub fn parse_strict(src: &str) -> Result<StrictType, ParseError> {
    let t = parse_itype(src)?;
    if t.len() != 1 {
        return Err(ParseError {
            line: 1,
            col: 1,
            msg: "expected a strict type, found an intersection".into(),
        });
    }
    Ok(t.members()[0].clone())
}
