//! Best-first backward chaining.
//!
//! A query is the root of a [`SearchGraph`]. Expanding a node picks one
//! literal of its clause and creates a child per matching fact (restriction
//! link), per rule whose consequent unifies with it (transformation link)
//! and per closure hop of a transitive predicate (also a transformation
//! link). The frontier is ordered by the net score of the configured
//! [`HeuristicModule`]s.

mod engine;
mod expand;
mod graph;

pub use engine::{
    answer_query, expand, net_score, ConstScorer, DepthScorer, Expansion, HeuristicModule, NodeScorer, QueryResult,
    ScoringContext, SearchConfig, SearchError, SearchStats, StopReason,
};
pub use expand::{children, matching_fact_count, select_literal, Child};
pub use graph::{Insertion, Link, LinkId, LinkKind, NodeId, SearchGraph, SearchNode, Step, MAX_LINK_SETS};
