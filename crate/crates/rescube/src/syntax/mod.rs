//! Terms, contexts and types of the eight calculi, with a parser and printer.

mod alpha;
mod expr;
mod parse;
mod print;
mod types;
mod var;

pub use alpha::{alpha_eq, alpha_norm};
pub use expr::{path_string, Base, Expr, Path, Res, Sort};
pub use parse::{parse, parse_itype, parse_lj, parse_nd, parse_strict, ParseError};
pub use print::print;
pub use types::{IType, StrictType};
pub use var::{Supply, Var};
