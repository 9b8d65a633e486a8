//! Substitution, append, the reduction rules, the equivalences and
//! normalization.

mod canon;
mod normalize;
mod rules;
mod subst;

pub use canon::{canonical, class_key};
pub use normalize::{normalize, Outcome, Strategy, Trace, TraceStep};
pub use rules::{contract, matches, redexes, rules_at, step, Redex, Rule, StepError};
pub use subst::{append, subst, subst_par};
