//! Best-first search driver and the heuristic-module interface.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::kb::KnowledgeBase;
use crate::term::Clause;
use crate::unify::Substitution;

use super::expand::children;
use super::graph::{Insertion, NodeId, SearchGraph};

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Wall-clock budget; `None` disables it.
    pub cutoff: Option<Duration>,
    /// Maximum number of node expansions.
    pub max_nodes: Option<usize>,
    /// Children deeper than this are not generated.
    pub max_depth: Option<u32>,
    /// Stop once this many distinct answers are known.
    pub max_answers: Option<usize>,
    pub probe_seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            cutoff: Some(Duration::from_secs(5)),
            max_nodes: Some(50_000),
            max_depth: Some(25),
            max_answers: None,
            probe_seed: 0,
        }
    }
}

impl SearchConfig {
    /// No time, node or answer limits. Depth stays bounded.
    pub fn unbounded() -> Self {
        SearchConfig { cutoff: None, max_nodes: None, max_answers: None, ..Self::default() }
    }
}

/// Read-only view handed to scorers.
pub struct ScoringContext<'a> {
    pub graph: &'a SearchGraph,
    pub kb: &'a KnowledgeBase,
    pub probe_seed: u64,
}

pub trait NodeScorer: Send + Sync {
    fn name(&self) -> &str;
    fn score(&self, ctx: &ScoringContext<'_>, node: NodeId) -> f64;
}

/// A weighted scorer. The net score of a node is the weighted sum over
/// modules.
#[derive(Clone)]
pub struct HeuristicModule {
    pub weight: f64,
    pub scorer: Arc<dyn NodeScorer>,
}

impl HeuristicModule {
    pub fn new(weight: f64, scorer: impl NodeScorer + 'static) -> Self {
        HeuristicModule { weight, scorer: Arc::new(scorer) }
    }
}

impl std::fmt::Debug for HeuristicModule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}*{}", self.weight, self.scorer.name())
    }
}

/// Σ wᵢ fᵢ(node). Zero-weight modules are not evaluated.
pub fn net_score(ctx: &ScoringContext<'_>, node: NodeId, modules: &[HeuristicModule]) -> f64 {
    modules.iter().filter(|m| m.weight != 0.0).map(|m| m.weight * m.scorer.score(ctx, node)).sum()
}

/// Baseline ordering: shallower nodes first.
#[derive(Clone, Copy, Debug, Default)]
pub struct DepthScorer;

impl NodeScorer for DepthScorer {
    fn name(&self) -> &str {
        "depth"
    }

    fn score(&self, ctx: &ScoringContext<'_>, node: NodeId) -> f64 {
        -f64::from(ctx.graph.node(node).depth)
    }
}

/// Returns the same value for every node.
#[derive(Clone, Copy, Debug)]
pub struct ConstScorer(pub f64);

impl NodeScorer for ConstScorer {
    fn name(&self) -> &str {
        "const"
    }

    fn score(&self, _: &ScoringContext<'_>, _: NodeId) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StopReason {
    Exhausted,
    Cutoff,
    MaxNodes,
    MaxAnswers,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Exhausted => "exhausted",
            StopReason::Cutoff => "cutoff",
            StopReason::MaxNodes => "max-nodes",
            StopReason::MaxAnswers => "max-answers",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchStats {
    pub nodes_expanded: usize,
    pub nodes_created: usize,
    pub transformation_links: usize,
    pub restriction_links: usize,
    pub answers: usize,
    pub wall_time: Duration,
    pub stop: StopReason,
}

impl SearchStats {
    /// `key=value` lines.
    pub fn to_records(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "nodes_expanded={}", self.nodes_expanded);
        let _ = writeln!(s, "nodes_created={}", self.nodes_created);
        let _ = writeln!(s, "transformation_links={}", self.transformation_links);
        let _ = writeln!(s, "restriction_links={}", self.restriction_links);
        let _ = writeln!(s, "answers={}", self.answers);
        let _ = writeln!(s, "wall_time_secs={:.6}", self.wall_time.as_secs_f64());
        let _ = writeln!(s, "stop={}", self.stop.as_str());
        s
    }
}

#[derive(Clone, Debug)]
pub struct QueryResult {
    pub answers: Vec<Substitution>,
    pub graph: SearchGraph,
    pub stats: SearchStats,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("malformed query: {0}")]
    MalformedQuery(String),
}

/// Nodes touched by one expansion.
#[derive(Clone, Debug, Default)]
pub struct Expansion {
    /// Fresh non-answer children.
    pub created: Vec<NodeId>,
    /// Existing nodes that gained an incoming link.
    pub relinked: Vec<NodeId>,
    /// Fresh answer nodes (empty clause).
    pub answers: Vec<NodeId>,
}

/// Generates and commits the children of `node`, marking it expanded.
/// Children beyond `max_depth` are not generated. Each fresh answer node
/// is passed to [`SearchGraph::mark_success`].
pub fn expand(graph: &mut SearchGraph, node: NodeId, kb: &KnowledgeBase, max_depth: Option<u32>) -> Expansion {
    graph.mark_expanded(node);
    let (clause, terms, depth) = {
        let n = graph.node(node);
        (n.clause.clone(), n.answer_terms.clone(), n.depth)
    };
    let mut out = Expansion::default();
    for child in children(kb, &clause, &terms, node.0 + 1) {
        if child.is_transformation() && max_depth.is_some_and(|m| depth + 1 > m) {
            continue;
        }
        let is_answer = child.clause.is_empty();
        match graph.insert_child(node, child.clause, child.answer_terms, child.kind) {
            Insertion::New(id) if is_answer => {
                graph.mark_success(id);
                out.answers.push(id);
            }
            Insertion::New(id) => out.created.push(id),
            Insertion::Existing { id, linked: true } => out.relinked.push(id),
            Insertion::Existing { linked: false, .. } => {}
        }
    }
    out
}

fn check_query(kb: &KnowledgeBase, query: &Clause) -> Result<(), SearchError> {
    if query.is_empty() {
        return Err(SearchError::MalformedQuery("empty query".into()));
    }
    for l in query.literals() {
        if let Some(n) = kb.arity(l.predicate) {
            if n != l.arity() {
                return Err(SearchError::MalformedQuery(format!(
                    "{l}: {} takes {n} argument(s)",
                    l.predicate
                )));
            }
        }
    }
    Ok(())
}

/// Runs best-first backward chaining on `query`.
pub fn answer_query(
    kb: &KnowledgeBase,
    query: &Clause,
    config: &SearchConfig,
    modules: &[HeuristicModule],
) -> Result<QueryResult, SearchError> {
    check_query(kb, query)?;
    let start = Instant::now();
    let mut graph = SearchGraph::new(query.clone());
    let score = |g: &SearchGraph, id: NodeId| {
        net_score(&ScoringContext { graph: g, kb, probe_seed: config.probe_seed }, id, modules)
    };
    let root = graph.root();
    let s = score(&graph, root);
    graph.push_frontier(root, s);
    let mut expanded = 0;
    let stop = loop {
        if config.max_answers.is_some_and(|m| graph.answer_count() >= m) {
            break StopReason::MaxAnswers;
        }
        if config.cutoff.is_some_and(|c| start.elapsed() >= c) {
            break StopReason::Cutoff;
        }
        if config.max_nodes.is_some_and(|m| expanded >= m) {
            break StopReason::MaxNodes;
        }
        let Some(id) = graph.pop_frontier() else {
            break StopReason::Exhausted;
        };
        expanded += 1;
        let e = expand(&mut graph, id, kb, config.max_depth);
        for n in e.created.into_iter().chain(e.relinked) {
            if !graph.node(n).expanded {
                let s = score(&graph, n);
                graph.push_frontier(n, s);
            }
        }
    };
    let (t, r) = graph.links().iter().fold((0, 0), |(t, r), l| if l.is_transformation() { (t + 1, r) } else { (t, r + 1) });
    let stats = SearchStats {
        nodes_expanded: expanded,
        nodes_created: graph.len(),
        transformation_links: t,
        restriction_links: r,
        answers: graph.answer_count(),
        wall_time: start.elapsed(),
        stop,
    };
    Ok(QueryResult { answers: graph.answers(), graph, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::load_kb;
    use crate::sexpr::parse_clause;
    use crate::term::Term;

    fn kb(s: &str) -> KnowledgeBase {
        load_kb(s.as_bytes()).unwrap()
    }

    fn baseline() -> Vec<HeuristicModule> {
        vec![HeuristicModule::new(1.0, DepthScorer)]
    }

    #[test]
    fn net_score_sums_weighted_modules() {
        let g = SearchGraph::new(parse_clause("(p ?x)").unwrap());
        let k = KnowledgeBase::empty();
        let ctx = ScoringContext { graph: &g, kb: &k, probe_seed: 0 };
        assert_eq!(net_score(&ctx, g.root(), &[]), 0.0);
        let mods = [HeuristicModule::new(1.0, ConstScorer(3.0)), HeuristicModule::new(2.0, ConstScorer(-1.0))];
        assert_eq!(net_score(&ctx, g.root(), &mods), 1.0);
    }

    #[test]
    fn direct_lookup() {
        let k = kb("(concept C1)\n(isa A C1)\n");
        let r = answer_query(&k, &parse_clause("(isa A C1)").unwrap(), &SearchConfig::unbounded(), &baseline()).unwrap();
        assert_eq!(r.answers.len(), 1);
        assert_eq!(r.stats.transformation_links, 0);
    }

    #[test]
    fn one_transformation_one_restriction() {
        let k = kb("(fact (P a))\n(rule r (ante (P ?x)) (conseq (Q ?x)))\n");
        let r = answer_query(&k, &parse_clause("(Q a)").unwrap(), &SearchConfig::unbounded(), &baseline()).unwrap();
        assert_eq!(r.answers, vec![Substitution::new()]);
        assert_eq!(r.stats.transformation_links, 1);
        assert_eq!(r.stats.restriction_links, 1);
        assert_eq!(r.stats.stop, StopReason::Exhausted);
    }

    #[test]
    fn transitive_chain_answers() {
        let k = kb("(genls C1 C2)\n(genls C2 C3)\n(genls C3 Person)\n(transitive genls 1)\n");
        let r = answer_query(&k, &parse_clause("(genls ?x Person)").unwrap(), &SearchConfig::unbounded(), &baseline()).unwrap();
        let mut got: Vec<String> = r.answers.iter().map(|a| a.apply_term(Term::var("x")).to_string()).collect();
        got.sort();
        assert_eq!(got, vec!["C1", "C2", "C3"]);
    }

    #[test]
    fn malformed_queries() {
        let k = kb("(fact (p a b))");
        let cfg = SearchConfig::unbounded();
        assert!(answer_query(&k, &Clause::default(), &cfg, &[]).is_err());
        assert!(answer_query(&k, &parse_clause("(p a)").unwrap(), &cfg, &[]).is_err());
    }

    #[test]
    fn node_budget_stops_search() {
        let k = kb("(fact (p a))\n(rule r (ante (q ?x)) (conseq (p ?x)))\n(rule s (ante (p ?x)) (conseq (q ?x)))\n");
        let cfg = SearchConfig { max_nodes: Some(2), ..SearchConfig::unbounded() };
        let r = answer_query(&k, &parse_clause("(p ?x)").unwrap(), &cfg, &baseline()).unwrap();
        assert_eq!(r.stats.nodes_expanded, 2);
        assert_eq!(r.stats.stop, StopReason::MaxNodes);
    }

    #[test]
    fn stats_records() {
        let k = kb("(fact (p a))");
        let r = answer_query(&k, &parse_clause("(p ?x)").unwrap(), &SearchConfig::unbounded(), &baseline()).unwrap();
        let rec = r.stats.to_records();
        assert!(rec.contains("answers=1\n"));
        assert!(rec.contains("stop=exhausted\n"));
    }
}
