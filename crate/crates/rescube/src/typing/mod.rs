//! Simple and intersection typing for both bases: bases and their unions,
//! derivation trees with a checker and JSON form, simple-type inference,
//! and the generation, substitution and append lemmas as operations on
//! derivations, ending in subject reduction.

mod basis;
mod build;
mod check;
mod derivation;
mod lemmas;
mod reduce;
mod simple;

pub use basis::Basis;
pub use build::{align, rename_derivation, BuildError, Sys};
pub use check::{check_derivation, is_valid, rule_available, rule_for, Invalid};
pub use derivation::{Derivation, JsonError, Judgment, TRule};
pub use lemmas::{append_typing, generation, subst_typing, widen_stoup, Generation};
pub use reduce::subject_step;
pub use simple::{infer_simple, SimpleTyping, Untypeable};

pub use crate::syntax::IType;

#[cfg(test)]
mod tests;
