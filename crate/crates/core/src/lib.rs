//! Planning on black-box tasks guided by heuristics computed over partial
//! STRIPS models.
//!
//! The crate is layered bottom-up:
//!
//! * [`strips`]: ground STRIPS tasks, states, successor generation and plan
//!   validation.
//! * [`pddl`]: a typed-STRIPS PDDL subset and its grounding into
//!   [`strips::StripsTask`].
//! * [`blackbox`]: tasks exposed only through `succ`/`goal`, partial models
//!   and heuristic lifting `h(s) = h_D(sigma(s))`.
//! * [`heuristics`]: FF, goal count, regression surrogates and
//!   discrepancy-based policy guidance.
//! * [`search`]: expansion-bounded greedy best-first search with single,
//!   alternating and tie-breaking open lists.

pub mod blackbox;
pub mod heuristics;
pub mod pddl;
pub mod search;
pub mod strips;
mod task_json;

pub use blackbox::{BlackBoxState, BlackBoxTask, Label, PartialModel, StateMapping};
pub use heuristics::{Evaluator, HValue, StripsHeuristic};
pub use search::{Outcome, SearchResult};
pub use strips::{ActionId, FactId, StripsAction, StripsState, StripsTask};
pub use task_json::TaskDump;
