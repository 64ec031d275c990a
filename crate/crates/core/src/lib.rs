//! Distributed automata on finite connected labeled graphs.
//!
//! Every node runs the same finite-state machine and reads its own state
//! together with a threshold-bounded multiset of its neighbors' states. A
//! scheduler selects which nodes move at each step. The crate simulates
//! such runs, compiles machines between scheduling models, and decides
//! exactly whether a machine accepts, rejects, or is inconsistent on a
//! given graph under a given fairness assumption.

pub mod error;
pub mod graph;
pub mod machine;
pub mod engine;
pub mod verdict;
pub mod popproto;
pub mod transforms;
pub mod zoo;
pub mod catalog;
pub mod corpus;
