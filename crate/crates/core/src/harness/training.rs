//! Trains one decision tree per rule.

use std::collections::BTreeMap;
use std::thread;

use crate::dtree::{create_tree, generate_training_set, TrainingBudget, TreeSet, MIN_TRAINING_SIZE};
use crate::kb::KnowledgeBase;
use crate::symbol::Symbol;

/// How many rules got a tree and how large their training sets were.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingReport {
    pub rules: usize,
    pub trained: usize,
    /// Rules skipped for having fewer than the minimum tuples.
    pub too_small: usize,
    pub tuples: BTreeMap<Symbol, usize>,
}

impl TrainingReport {
    /// Fraction of rules that received a tree.
    pub fn coverage(&self) -> f64 {
        if self.rules == 0 {
            0.0
        } else {
            self.trained as f64 / self.rules as f64
        }
    }
}

/// Trains a tree for every rule with enough training tuples, spreading
/// rules over `threads` workers. The result does not depend on `threads`.
pub fn train_all_trees(kb: &KnowledgeBase, budget: &TrainingBudget, stop_fraction: f64, threads: usize) -> (TreeSet, TrainingReport) {
    let rules = kb.rules();
    let threads = threads.max(1).min(rules.len().max(1));
    let chunk = rules.len().div_ceil(threads).max(1);
    let results: Vec<(Symbol, usize, Option<crate::dtree::DecisionTree>)> = thread::scope(|s| {
        let handles: Vec<_> = rules
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    part.iter()
                        .map(|r| {
                            let set = generate_training_set(kb, r, budget);
                            let n = set.tuples.len();
                            let tree = (n >= MIN_TRAINING_SIZE).then(|| create_tree(kb, &set.tuples, r.vars(), stop_fraction));
                            (r.id, n, tree)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("training worker panicked")).collect()
    });
    let mut trees = TreeSet::default();
    let mut report = TrainingReport { rules: rules.len(), ..Default::default() };
    for (id, n, tree) in results {
        report.tuples.insert(id, n);
        match tree {
            Some(t) => {
                report.trained += 1;
                trees.trees.insert(id, t);
            }
            None => report.too_small += 1,
        }
    }
    (trees, report)
}
