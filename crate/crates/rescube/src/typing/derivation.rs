use std::fmt;

use serde_json::{json, Map, Value};

use super::Basis;
use crate::syntax::{
    parse, parse_itype, parse_strict, print, Base, Expr, IType, Sort, StrictType, Var,
};

/// Rule tags of the typing systems of both bases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TRule {
    AxIw,
    AxEw,
    ArrI,
    ArrR,
    ArrE,
    ArrL,
    Sel,
    Cut,
    Cont,
    Weak,
    ContT,
    ContK,
    WeakT,
    WeakK,
}

impl TRule {
    pub const ALL: [TRule; 14] = [
        TRule::AxIw,
        TRule::AxEw,
        TRule::ArrI,
        TRule::ArrR,
        TRule::ArrE,
        TRule::ArrL,
        TRule::Sel,
        TRule::Cut,
        TRule::Cont,
        TRule::Weak,
        TRule::ContT,
        TRule::ContK,
        TRule::WeakT,
        TRule::WeakK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TRule::AxIw => "Ax_iw",
            TRule::AxEw => "Ax_ew",
            TRule::ArrI => "->I",
            TRule::ArrR => "->R",
            TRule::ArrE => "->E",
            TRule::ArrL => "->L",
            TRule::Sel => "Sel",
            TRule::Cut => "Cut",
            TRule::Cont => "Cont",
            TRule::Weak => "Weak",
            TRule::ContT => "Cont_t",
            TRule::ContK => "Cont_k",
            TRule::WeakT => "Weak_t",
            TRule::WeakK => "Weak_k",
        }
    }

    pub fn from_name(s: &str) -> Option<TRule> {
        TRule::ALL.into_iter().find(|r| r.name() == s)
    }
}

impl fmt::Display for TRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `basis ⊢ subject : ty` for terms, `basis; stoup ⊢ subject : ty` for
/// contexts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Judgment {
    pub basis: Basis,
    pub stoup: Option<IType>,
    pub subject: Expr,
    pub ty: StrictType,
}

/// An explicit derivation tree. Multi-premise rules store every premise:
/// `->E` is the function premise followed by one premise per member of its
/// domain; `Cut` and `->L` are the term premises followed by the context.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Derivation {
    pub rule: TRule,
    pub concl: Judgment,
    pub premises: Vec<Derivation>,
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.basis)?;
        if let Some(s) = &self.stoup {
            write!(f, "; {s}")?;
        }
        write!(f, " |- {} : {}", print(&self.subject), self.ty)
    }
}

impl Derivation {
    pub fn new(
        rule: TRule,
        basis: Basis,
        stoup: Option<IType>,
        subject: Expr,
        ty: StrictType,
        premises: Vec<Derivation>,
    ) -> Derivation {
        Derivation {
            rule,
            concl: Judgment {
                basis,
                stoup,
                subject,
                ty,
            },
            premises,
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.concl.basis
    }

    pub fn stoup(&self) -> Option<&IType> {
        self.concl.stoup.as_ref()
    }

    pub fn subject(&self) -> &Expr {
        &self.concl.subject
    }

    pub fn ty(&self) -> &StrictType {
        &self.concl.ty
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self
            .premises
            .iter()
            .map(Derivation::depth)
            .max()
            .unwrap_or(0)
    }

    pub fn at(&self, path: &[usize]) -> Option<&Derivation> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.premises.get(*i)?.at(rest),
        }
    }

    /// Serialise to the node format
    /// `{"rule", "basis", "stoup", "subject", "type", "premises"}`.
    pub fn to_json(&self) -> Value {
        let mut basis = Map::new();
        for (x, t) in self.basis().iter() {
            basis.insert(
                x.to_string(),
                Value::Array(t.iter().map(|s| Value::String(s.to_string())).collect()),
            );
        }
        json!({
            "rule": self.rule.name(),
            "basis": Value::Object(basis),
            "stoup": self.stoup().map(|s| Value::String(s.to_string())).unwrap_or(Value::Null),
            "subject": print(self.subject()),
            "type": self.ty().to_string(),
            "premises": self.premises.iter().map(Derivation::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("derivations always serialise")
    }

    /// Read a derivation back. Subjects are parsed in `base`, one node at a
    /// time, so a context subject needs no surrounding term.
    pub fn from_json(v: &Value, base: Base) -> Result<Derivation, JsonError> {
        let obj = v
            .as_object()
            .ok_or_else(|| JsonError::new("a derivation node must be an object"))?;
        let field = |k: &str| {
            obj.get(k)
                .ok_or_else(|| JsonError::new(format!("missing field {k:?}")))
        };
        let str_field = |k: &str| {
            field(k)?
                .as_str()
                .ok_or_else(|| JsonError::new(format!("field {k:?} must be a string")))
        };
        let rule_name = str_field("rule")?;
        let rule = TRule::from_name(rule_name)
            .ok_or_else(|| JsonError::new(format!("unknown rule {rule_name:?}")))?;
        let mut basis = Basis::new();
        let bobj = field("basis")?
            .as_object()
            .ok_or_else(|| JsonError::new("\"basis\" must be an object"))?;
        for (name, tys) in bobj {
            let x = parse_var(name)?;
            let arr = tys
                .as_array()
                .ok_or_else(|| JsonError::new(format!("types of {name} must be a list")))?;
            let mut members = Vec::new();
            for t in arr {
                let s = t
                    .as_str()
                    .ok_or_else(|| JsonError::new("a basis type must be a string"))?;
                members
                    .push(parse_strict(s).map_err(|e| JsonError::new(format!("type {s:?}: {e}")))?);
            }
            let it = IType::try_new(members)
                .ok_or_else(|| JsonError::new(format!("empty type list for {name}")))?;
            basis.insert(x, it);
        }
        let stoup = match field("stoup")? {
            Value::Null => None,
            Value::String(s) => {
                Some(parse_itype(s).map_err(|e| JsonError::new(format!("stoup {s:?}: {e}")))?)
            }
            _ => return Err(JsonError::new("\"stoup\" must be a string or null")),
        };
        let src = str_field("subject")?;
        let subject =
            parse(src, base).map_err(|e| JsonError::new(format!("subject {src:?}: {e}")))?;
        let tsrc = str_field("type")?;
        let ty = parse_strict(tsrc).map_err(|e| JsonError::new(format!("type {tsrc:?}: {e}")))?;
        let prem = field("premises")?
            .as_array()
            .ok_or_else(|| JsonError::new("\"premises\" must be a list"))?;
        let premises = prem
            .iter()
            .map(|p| Derivation::from_json(p, base))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Derivation::new(rule, basis, stoup, subject, ty, premises))
    }

    pub fn from_json_str(s: &str, base: Base) -> Result<Derivation, JsonError> {
        let v: Value = serde_json::from_str(s).map_err(|e| JsonError::new(e.to_string()))?;
        Derivation::from_json(&v, base)
    }

    fn fmt_tree(&self, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
        writeln!(
            f,
            "{:indent$}{}  [{}]",
            "",
            self.concl,
            self.rule,
            indent = indent
        )?;
        for p in &self.premises {
            p.fmt_tree(f, indent + 2)?;
        }
        Ok(())
    }

    /// Whether the subject is a context, judged from its root.
    pub fn is_context(&self) -> bool {
        self.subject().root_sort() == Sort::Context
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_tree(f, 0)
    }
}

fn parse_var(name: &str) -> Result<Var, JsonError> {
    match parse(name, Base::Nd) {
        Ok(Expr::Var(x)) => Ok(x),
        _ => Err(JsonError::new(format!("{name:?} is not a variable"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("derivation json: {msg}")]
pub struct JsonError {
    pub msg: String,
}

impl JsonError {
    fn new(msg: impl Into<String>) -> JsonError {
        JsonError { msg: msg.into() }
    }
}
