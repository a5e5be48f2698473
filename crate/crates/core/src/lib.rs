//! Executable semantics for concurrent randomized programs.
//!
//! The crate is organised bottom-up:
//!
//! * [`ival`]: exact finite indexed valuations (probabilistic choice that
//!   remembers *which* branch produced a value) and their induced
//!   distributions.
//! * [`ndset`]: nonempty finite sets of indexed valuations, modelling
//!   nondeterminism layered over probability, together with the orderings
//!   `⊆` / `⊆ₚ` and expected-value extrema.
//! * [`coupling`]: explicit witnesses for nondeterministic couplings and a
//!   checker that re-verifies every semantic side condition.
//! * [`lang`]: an ML-like concurrent language with `flip`, a heap and
//!   `fork`, with a small-step semantics producing indexed valuations.
//! * [`sched`]: schedulers, exact policy evaluation, adversarial extrema by
//!   backward induction, and Monte-Carlo simulation.
//! * [`models`]: approximate counters and a two-level skip list, each as a
//!   concrete program plus a monadic model.
//! * [`laws`]: seeded property suites for the algebraic theory.
//!
//! Parallelism is provided by rayon behind the `parallel` feature (on by
//! default); every parallel entry point takes an [`Exec`] and falls back to a
//! sequential loop when the feature is disabled.

pub mod coupling;
pub mod error;
pub mod exec;
pub mod ival;
pub mod lang;
pub mod laws;
pub mod lp;
pub mod models;
pub mod ndset;
pub mod rational;
pub mod sched;
pub mod sexp;

pub use error::{Error, Result};
pub use exec::Exec;
pub use ival::{Distribution, Index, IndexedValuation};
pub use ndset::ProcessSet;
pub use rational::Rational;
