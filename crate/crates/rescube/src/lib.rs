//! Resource control cube: the natural deduction calculi λ_R and the sequent
//! calculi λGtz_R for every R ⊆ {c, w}, with well-formedness, reduction,
//! intersection typing, the translation between the two bases and a strong
//! normalisation checker.

pub mod bridge;
pub mod rewrite;
pub mod sn;
pub mod syntax;
pub mod typing;
pub mod wellformed;

pub use syntax::{
    alpha_eq, alpha_norm, parse, parse_itype, parse_lj, parse_nd, parse_strict, path_string, print,
    Base, Expr, IType, ParseError, Path, Res, Sort, StrictType, Supply, Var,
};
