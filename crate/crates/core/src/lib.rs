//! Backward-chaining inference over a knowledge base of facts, rules and a
//! concept taxonomy, with best-first node ordering driven by two learned
//! heuristics: per-rule decision trees of sort restrictions and a linear
//! answerability model over search meta-features.

pub mod bottom_up;
pub mod dtree;
pub mod features;
pub mod harness;
pub mod kb;
pub mod regression;
pub mod search;
pub mod sexpr;
pub mod symbol;
pub mod term;
pub mod unify;

pub use bottom_up::BottomUp;
pub use kb::{load_kb, load_kb_file, KbBuilder, KbError, KnowledgeBase, Rule};
pub use symbol::Symbol;
pub use term::{Clause, Literal, Term, Var};
pub use unify::{unify, Substitution};
pub use search::{answer_query, HeuristicModule, SearchConfig, SearchGraph};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/knowledge-bases.md")]
    mod knowledge_bases {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/decision-trees.md")]
    mod decision_trees {}
    #[doc = include_str!("../../../book/src/answerability.md")]
    mod answerability {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
