//! Per-rule decision trees over restriction conditions `?x:Concept`.
//!
//! A tree is induced top-down from the successful bindings of a rule's
//! antecedent. Each branch tests membership of one variable's binding in a
//! concept; the and-child refines the tuples that pass, the or-child keeps
//! looking for another concept covering the rest. During search a
//! transformation link scores 1 when its bindings reach an accepting leaf.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::io::Read;
use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

use crate::kb::{KnowledgeBase, Rule};
use crate::search::{answer_query, DepthScorer, HeuristicModule, NodeId, NodeScorer, ScoringContext, SearchConfig, SearchGraph, Step};
use crate::sexpr::{parse_all, Sexp};
use crate::symbol::Symbol;
use crate::term::{Clause, Term, Var};
use crate::unify::Substitution;

/// Default fraction of the original training set below which growth stops.
pub const DEFAULT_STOP_FRACTION: f64 = 0.05;
/// Rules with fewer training tuples get no tree.
pub const MIN_TRAINING_SIZE: usize = 5;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct RestrictionCondition {
    pub variable: Var,
    pub concept: Symbol,
}

impl fmt::Display for RestrictionCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.variable, self.concept)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DecisionTree {
    Leaf(bool),
    Branch { test: RestrictionCondition, and_child: Box<DecisionTree>, or_child: Box<DecisionTree> },
}

impl DecisionTree {
    pub fn depth(&self) -> usize {
        match self {
            DecisionTree::Leaf(_) => 0,
            DecisionTree::Branch { and_child, or_child, .. } => 1 + and_child.depth().max(or_child.depth()),
        }
    }

    /// Condition lists of every path ending in an accepting leaf. Each
    /// entry is `(condition, passed)`; `passed` is false on or-edges.
    pub fn accepting_paths(&self) -> Vec<Vec<(RestrictionCondition, bool)>> {
        fn walk(t: &DecisionTree, path: &mut Vec<(RestrictionCondition, bool)>, out: &mut Vec<Vec<(RestrictionCondition, bool)>>) {
            match t {
                DecisionTree::Leaf(true) => out.push(path.clone()),
                DecisionTree::Leaf(false) => {}
                DecisionTree::Branch { test, and_child, or_child } => {
                    path.push((*test, true));
                    walk(and_child, path, out);
                    path.pop();
                    path.push((*test, false));
                    walk(or_child, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    fn write_expr(&self, out: &mut String) {
        match self {
            DecisionTree::Leaf(true) => out.push_str("(leaf accept)"),
            DecisionTree::Leaf(false) => out.push_str("(leaf reject)"),
            DecisionTree::Branch { test, and_child, or_child } => {
                let _ = write!(out, "(branch {} {} ", test.variable, test.concept);
                and_child.write_expr(out);
                out.push(' ');
                or_child.write_expr(out);
                out.push(')');
            }
        }
    }
}

impl fmt::Display for DecisionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_expr(&mut s);
        f.write_str(&s)
    }
}

/// Ground bindings of a rule's variables, one map per successful use.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    pub rule: Symbol,
    pub tuples: Vec<Substitution>,
}

/// Limits for querying a rule's antecedent.
#[derive(Clone, Copy, Debug)]
pub struct TrainingBudget {
    pub cutoff: Option<Duration>,
    pub max_tuples: Option<usize>,
    pub max_nodes: Option<usize>,
}

impl Default for TrainingBudget {
    fn default() -> Self {
        TrainingBudget { cutoff: Some(Duration::from_secs(1)), max_tuples: Some(2000), max_nodes: Some(50_000) }
    }
}

/// Collects bindings of `rule`'s variables by answering its antecedent.
pub fn generate_training_set(kb: &KnowledgeBase, rule: &Rule, budget: &TrainingBudget) -> TrainingSet {
    let query = Clause(rule.antecedent.clone());
    let config = SearchConfig {
        cutoff: budget.cutoff,
        max_nodes: budget.max_nodes,
        max_answers: budget.max_tuples,
        ..SearchConfig::default()
    };
    let modules = [HeuristicModule::new(1.0, DepthScorer)];
    let mut tuples = match answer_query(kb, &query, &config, &modules) {
        Ok(r) => r.answers,
        Err(_) => Vec::new(),
    };
    if let Some(m) = budget.max_tuples {
        tuples.truncate(m);
    }
    TrainingSet { rule: rule.id, tuples }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoveringTest {
    pub condition: RestrictionCondition,
    /// Indices into the tuple slice that pass the test.
    pub covered: Vec<usize>,
}

fn binding(t: &Substitution, v: Var) -> Option<Symbol> {
    t.get(v).and_then(|t| t.as_const())
}

/// The (variable, concept) test covering the most tuples. Ties go to the
/// more specific concept (lower stored generality), then the concept name,
/// then the earlier variable. `None` when no binding has a generalization.
pub fn best_covering_generalization(kb: &KnowledgeBase, tuples: &[Substitution], vars: &[Var]) -> Option<CoveringTest> {
    let mut gen_cache: HashMap<Symbol, Vec<Symbol>> = HashMap::new();
    let mut best: Option<(usize, u64, Symbol, usize, Var)> = None;
    for (vi, &v) in vars.iter().enumerate() {
        let mut counts: BTreeMap<Symbol, usize> = BTreeMap::new();
        for t in tuples {
            if let Some(b) = binding(t, v) {
                let gens = gen_cache.entry(b).or_insert_with(|| kb.generalizations(b).into_iter().collect());
                for c in gens.iter() {
                    *counts.entry(*c).or_default() += 1;
                }
            }
        }
        for (c, n) in counts {
            let g = kb.term_generality(c);
            let better = match best {
                None => true,
                Some((bn, bg, bc, bvi, _)) => (n, std::cmp::Reverse(g), std::cmp::Reverse(c), std::cmp::Reverse(vi)) > (bn, std::cmp::Reverse(bg), std::cmp::Reverse(bc), std::cmp::Reverse(bvi)),
            };
            if better {
                best = Some((n, g, c, vi, v));
            }
        }
    }
    let (_, _, concept, _, variable) = best?;
    let covered = tuples
        .iter()
        .enumerate()
        .filter(|(_, t)| binding(t, variable).is_some_and(|b| kb.holds_isa(b, concept)))
        .map(|(i, _)| i)
        .collect();
    Some(CoveringTest { condition: RestrictionCondition { variable, concept }, covered })
}

/// Induces a tree. Growth stops when fewer than `stop_fraction` of the
/// original tuples remain, when no variables are left, or when no test
/// exists. Stopped and-sides accept; stopped or-sides reject.
pub fn create_tree(kb: &KnowledgeBase, tuples: &[Substitution], vars: &[Var], stop_fraction: f64) -> DecisionTree {
    assert!(stop_fraction > 0.0 && stop_fraction < 1.0, "stop_fraction must lie in (0, 1)");
    if tuples.is_empty() {
        return DecisionTree::Leaf(false);
    }
    let threshold = stop_fraction * tuples.len() as f64;
    grow(kb, tuples, vars, threshold, true)
}

fn grow(kb: &KnowledgeBase, tuples: &[Substitution], vars: &[Var], threshold: f64, and_side: bool) -> DecisionTree {
    if tuples.is_empty() {
        return DecisionTree::Leaf(false);
    }
    if (tuples.len() as f64) < threshold || vars.is_empty() {
        return DecisionTree::Leaf(and_side);
    }
    let Some(test) = best_covering_generalization(kb, tuples, vars) else {
        return DecisionTree::Leaf(and_side);
    };
    let mut covered = Vec::with_capacity(test.covered.len());
    let mut rest = Vec::with_capacity(tuples.len() - test.covered.len());
    let mut ci = test.covered.iter().peekable();
    for (i, t) in tuples.iter().enumerate() {
        if ci.peek() == Some(&&i) {
            ci.next();
            covered.push(t.clone());
        } else {
            rest.push(t.clone());
        }
    }
    let fewer: Vec<Var> = vars.iter().copied().filter(|v| *v != test.condition.variable).collect();
    DecisionTree::Branch {
        test: test.condition,
        and_child: Box::new(grow(kb, &covered, &fewer, threshold, true)),
        or_child: Box::new(grow(kb, &rest, vars, threshold, false)),
    }
}

/// Walks the tree under `theta`. A test on a variable without a constant
/// binding passes.
pub fn satisfies(kb: &KnowledgeBase, tree: &DecisionTree, theta: &Substitution) -> bool {
    let mut t = tree;
    loop {
        match t {
            DecisionTree::Leaf(accept) => return *accept,
            DecisionTree::Branch { test, and_child, or_child } => {
                let pass = match binding(theta, test.variable) {
                    Some(b) => kb.holds_isa(b, test.concept),
                    None => true,
                };
                t = if pass { and_child } else { or_child };
            }
        }
    }
}

/// Learned trees keyed by rule id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TreeSet {
    pub trees: BTreeMap<Symbol, DecisionTree>,
}

#[derive(Debug, Error)]
pub enum TreeFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

impl TreeSet {
    pub fn get(&self, rule: Symbol) -> Option<&DecisionTree> {
        self.trees.get(&rule)
    }

    /// 1 when the link's bindings satisfy its rule's tree, when the rule
    /// has no tree, or for closure hops.
    pub fn indicator(&self, kb: &KnowledgeBase, step: Step, theta: &Substitution) -> f64 {
        match step {
            Step::Rule(r) => match self.trees.get(&r) {
                Some(t) => f64::from(u8::from(satisfies(kb, t, theta))),
                None => 1.0,
            },
            Step::Transitive { .. } => 1.0,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (r, t) in &self.trees {
            let _ = writeln!(s, "(tree {r} {t})");
        }
        s
    }

    pub fn parse(mut source: impl Read) -> Result<TreeSet, TreeFileError> {
        let mut text = String::new();
        source.read_to_string(&mut text).map_err(|e| TreeFileError::Io(e.to_string()))?;
        let mut trees = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| TreeFileError::Syntax { line, message };
            for s in parse_all(raw).map_err(|e| err(e.message))? {
                let items = s.list().filter(|_| s.head() == Some("tree")).ok_or_else(|| err(format!("expected (tree ID expr), found {s}")))?;
                if items.len() != 3 {
                    return Err(err("expected (tree ID expr)".into()));
                }
                let id = items[1].atom().ok_or_else(|| err("tree id must be an atom".into()))?;
                let tree = parse_expr(&items[2]).map_err(err)?;
                trees.insert(Symbol::intern(id), tree);
            }
        }
        Ok(TreeSet { trees })
    }
}

fn parse_expr(s: &Sexp) -> Result<DecisionTree, String> {
    let items = s.list().ok_or_else(|| format!("expected a tree expression, found {s}"))?;
    match (s.head(), items.len()) {
        (Some("leaf"), 2) => match items[1].atom() {
            Some("accept") => Ok(DecisionTree::Leaf(true)),
            Some("reject") => Ok(DecisionTree::Leaf(false)),
            _ => Err(format!("bad leaf {s}")),
        },
        (Some("branch"), 5) => {
            let var = items[1].atom().filter(|a| a.starts_with('?')).ok_or_else(|| format!("bad variable in {s}"))?;
            let concept = items[2].atom().ok_or_else(|| format!("bad concept in {s}"))?;
            Ok(DecisionTree::Branch {
                test: RestrictionCondition { variable: Var::new(var), concept: Symbol::intern(concept) },
                and_child: Box::new(parse_expr(&items[3])?),
                or_child: Box::new(parse_expr(&items[4])?),
            })
        }
        _ => Err(format!("expected (leaf ..) or (branch ..), found {s}")),
    }
}

/// Decision-tree score of `node`: over every transformation-link set p from the
/// root, the fraction of p's links whose bindings satisfy their tree.
pub fn f_dt(kb: &KnowledgeBase, graph: &SearchGraph, node: NodeId, trees: &TreeSet) -> f64 {
    let mut total = 0.0;
    for p in graph.link_sets_to_root(node) {
        if p.is_empty() {
            continue;
        }
        let w = 1.0 / p.len() as f64;
        for l in &p {
            let link = graph.link(*l);
            if let Some(step) = link.step() {
                total += w * trees.indicator(kb, step, link.substitution());
            }
        }
    }
    total
}

/// Heuristic module scorer for [`f_dt`].
#[derive(Clone, Debug)]
pub struct DtScorer {
    pub trees: Arc<TreeSet>,
}

impl NodeScorer for DtScorer {
    fn name(&self) -> &str {
        "dt"
    }

    fn score(&self, ctx: &ScoringContext<'_>, node: NodeId) -> f64 {
        f_dt(ctx.kb, ctx.graph, node, &self.trees)
    }
}

/// Convenience for tests and fixtures: a substitution from `(var, const)`
/// names.
pub fn tuple(pairs: &[(&str, &str)]) -> Substitution {
    let mut s = Substitution::new();
    for (v, c) in pairs {
        s.insert(Var::new(v), Term::constant(c));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::load_kb;

    fn kb(s: &str) -> KnowledgeBase {
        load_kb(s.as_bytes()).unwrap()
    }

    fn x() -> Var {
        Var::new("x")
    }

    #[test]
    fn single_tuple_tree() {
        let k = kb("(concept C)\n(isa a C)\n");
        let t = create_tree(&k, &[tuple(&[("x", "a")])], &[x()], DEFAULT_STOP_FRACTION);
        assert_eq!(t.to_string(), "(branch ?x C (leaf accept) (leaf reject))");
    }

    #[test]
    fn empty_training_rejects() {
        assert_eq!(create_tree(&KnowledgeBase::empty(), &[], &[x()], 0.05), DecisionTree::Leaf(false));
    }

    #[test]
    fn coverage_beats_specificity() {
        let k = kb("(concept C)\n(concept D)\n(isa a C)\n(isa b C)\n(isa c C)\n(isa c D)\n(isa d D)\n");
        let ts: Vec<_> = ["a", "b", "c", "d"].iter().map(|v| tuple(&[("x", v)])).collect();
        let best = best_covering_generalization(&k, &ts, &[x()]).unwrap();
        assert_eq!(best.condition.concept.as_str(), "C");
        assert_eq!(best.covered, vec![0, 1, 2]);
    }

    #[test]
    fn stop_fraction_makes_or_leaf() {
        let mut text = String::from("(concept C)\n(concept D)\n");
        for i in 0..6 {
            text.push_str(&format!("(isa c{i} C)\n"));
        }
        for i in 0..4 {
            text.push_str(&format!("(isa d{i} D)\n"));
        }
        let k = kb(&text);
        let ts: Vec<_> = (0..6).map(|i| tuple(&[("x", &format!("c{i}"))])).chain((0..4).map(|i| tuple(&[("x", &format!("d{i}"))]))).collect();
        let t = create_tree(&k, &ts, &[x()], 0.5);
        let DecisionTree::Branch { test, or_child, .. } = &t else { panic!("{t}") };
        assert_eq!(test.concept.as_str(), "C");
        assert_eq!(**or_child, DecisionTree::Leaf(false));
    }

    #[test]
    fn unbound_variables_pass() {
        let k = kb("(concept C)\n(isa a C)\n(isa b D)\n(concept D)\n");
        let tree = TreeSet::parse("(tree r (branch ?x C (branch ?y C (leaf accept) (leaf reject)) (leaf reject)))".as_bytes()).unwrap();
        let t = tree.get(Symbol::intern("r")).unwrap();
        assert!(satisfies(&k, t, &tuple(&[("x", "a")])));
        assert!(satisfies(&k, t, &Substitution::new()));
        assert!(!satisfies(&k, t, &tuple(&[("x", "b")])));
        assert!(!satisfies(&k, t, &tuple(&[("x", "a"), ("y", "b")])));
    }

    #[test]
    fn tree_file_round_trip() {
        let text = "(tree r1 (branch ?x C (leaf accept) (leaf reject)))\n(tree r2 (leaf accept))\n";
        let set = TreeSet::parse(text.as_bytes()).unwrap();
        assert_eq!(set.to_text(), text);
        assert!(TreeSet::parse("(tree r1 (leaf maybe))".as_bytes()).is_err());
    }
}
