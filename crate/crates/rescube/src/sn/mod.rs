//! Strong normalisation: an exhaustive oracle modulo the equivalence, the
//! grammars of normal forms, typing of normal forms, head subject expansion
//! and synthesis of derivations for strongly normalising expressions.

mod nf;
mod oracle;
mod synth;
#[cfg(test)]
mod tests;

pub use nf::{is_normal_form, NfReport};
pub use oracle::{is_sn, successors, Divergence, SnVerdict, CLASS_NODES, NODE_BUDGET};
pub use synth::{
    expand_head, inverse_subst_typing, synthesize, type_normal_form, Synth, SynthError,
};
