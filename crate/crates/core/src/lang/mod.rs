//! A small ML-like concurrent language with probabilistic choice.
//!
//! Expressions are closed terms evaluated by substitution under left-to-right
//! evaluation contexts. `flip n₁ n₂` is the only probabilistic redex: it
//! yields `true` with probability `n₁/n₂` and is stuck unless that ratio is a
//! probability. A configuration is a nonempty thread pool plus a heap;
//! stepping a thread that cannot reduce leaves the configuration unchanged
//! (a stutter), so a scheduler may pick any index at any time.

mod step;
mod syntax;
mod text;
mod trace;

pub use step::{
    can_step, config_step, enabled, successors, thread_step, Config, State, ThreadStep,
};
pub use syntax::{BinOp, Closure, Expr, Name, Val, WILDCARD};
pub use text::{from_sexp, is_identifier, is_keyword, parse, parse_val, pretty, pretty_val};
pub use trace::Trace;

/// Default line width for [`pretty`].
pub const WIDTH: usize = 80;
