//! The search graph: timestamped nodes joined by transformation links
//! (rule back-chaining) and restriction links (resolution against a fact),
//! plus the set-of-support frontier.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use indexmap::IndexSet;

use crate::symbol::Symbol;
use crate::term::{Clause, Literal, Term, Var};
use crate::unify::Substitution;

/// Node timestamp. Ids are handed out in creation order, so a child always
/// has a larger id than the node it was generated from.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct NodeId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LinkId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// What a transformation link applied.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Step {
    Rule(Symbol),
    /// One closure hop for a predicate declared transitive at `position`.
    Transitive { predicate: Symbol, position: usize },
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Rule(r) => write!(f, "{r}"),
            Step::Transitive { predicate, position } => write!(f, "transitive:{predicate}:{position}"),
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum LinkKind {
    /// `substitution` maps the rule's own (unrenamed) variables to the
    /// terms they were bound to when the link was created.
    Transformation { step: Step, substitution: Substitution },
    Restriction { fact: Literal, substitution: Substitution },
}

#[derive(Clone, PartialEq, Debug)]
pub struct Link {
    pub id: LinkId,
    pub from: NodeId,
    pub to: NodeId,
    pub kind: LinkKind,
}

impl Link {
    pub fn is_transformation(&self) -> bool {
        matches!(self.kind, LinkKind::Transformation { .. })
    }

    pub fn step(&self) -> Option<Step> {
        match &self.kind {
            LinkKind::Transformation { step, .. } => Some(*step),
            LinkKind::Restriction { .. } => None,
        }
    }

    pub fn substitution(&self) -> &Substitution {
        match &self.kind {
            LinkKind::Transformation { substitution, .. } | LinkKind::Restriction { substitution, .. } => substitution,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchNode {
    pub id: NodeId,
    /// Open subgoals.
    pub clause: Clause,
    /// Current values of the root query's variables.
    pub answer_terms: Vec<Term>,
    /// Shortest number of transformation links from the root.
    pub depth: u32,
    pub answers_below: u32,
    pub in_transformation: Vec<LinkId>,
    pub in_restriction: Vec<LinkId>,
    pub out_links: Vec<LinkId>,
    /// The link this node was created through.
    pub primary: Option<LinkId>,
    /// Transformation links along the creation path.
    pub path_transformations: u32,
    /// Restriction links along the creation path.
    pub path_restrictions: u32,
    pub expanded: bool,
    pub score: f64,
}

impl SearchNode {
    pub fn is_answer(&self) -> bool {
        self.clause.is_empty()
    }

    pub fn in_links(&self) -> impl Iterator<Item = LinkId> + '_ {
        self.in_transformation.iter().chain(&self.in_restriction).copied()
    }
}

#[derive(Clone, Copy, Debug)]
struct FrontierEntry {
    score: f64,
    id: NodeId,
    version: u32,
}

impl PartialEq for FrontierEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for FrontierEntry {}

impl Ord for FrontierEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // max score first, then smaller id
        self.score
            .total_cmp(&other.score)
            .then_with(|| Reverse(self.id).cmp(&Reverse(other.id)))
            .then_with(|| self.version.cmp(&other.version))
    }
}

impl PartialOrd for FrontierEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Result of offering a child to the graph.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Insertion {
    New(NodeId),
    /// An equivalent node already existed; `linked` tells whether a new
    /// edge was added (only forward edges are kept).
    Existing { id: NodeId, linked: bool },
}

/// Upper bound on enumerated link sets per node. Beyond it the
/// enumeration is truncated.
pub const MAX_LINK_SETS: usize = 4096;

#[derive(Clone, Debug)]
pub struct SearchGraph {
    nodes: Vec<SearchNode>,
    links: Vec<Link>,
    query: Clause,
    query_vars: Vec<Var>,
    answers: IndexSet<Vec<Term>>,
    memo: HashMap<Vec<u64>, NodeId>,
    frontier: BinaryHeap<FrontierEntry>,
    versions: Vec<u32>,
    expansion_order: Vec<NodeId>,
}

impl SearchGraph {
    pub fn new(query: Clause) -> SearchGraph {
        let query_vars = query.vars();
        let answer_terms: Vec<Term> = query_vars.iter().map(|v| Term::Var(*v)).collect();
        let mut g = SearchGraph {
            nodes: Vec::new(),
            links: Vec::new(),
            query: query.clone(),
            query_vars,
            answers: IndexSet::new(),
            memo: HashMap::new(),
            frontier: BinaryHeap::new(),
            versions: Vec::new(),
            expansion_order: Vec::new(),
        };
        let key = canonical_key(&query, &answer_terms);
        g.push_node(query, answer_terms, 0, None, 0, 0);
        g.memo.insert(key, NodeId(0));
        g
    }

    fn push_node(
        &mut self,
        clause: Clause,
        answer_terms: Vec<Term>,
        depth: u32,
        primary: Option<LinkId>,
        path_t: u32,
        path_r: u32,
    ) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(SearchNode {
            id,
            clause,
            answer_terms,
            depth,
            answers_below: 0,
            in_transformation: Vec::new(),
            in_restriction: Vec::new(),
            out_links: Vec::new(),
            primary,
            path_transformations: path_t,
            path_restrictions: path_r,
            expanded: false,
            score: 0.0,
        });
        self.versions.push(0);
        id
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn query(&self) -> &Clause {
        &self.query
    }

    pub fn query_vars(&self) -> &[Var] {
        &self.query_vars
    }

    pub fn node(&self, id: NodeId) -> &SearchNode {
        &self.nodes[id.0 as usize]
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut SearchNode {
        &mut self.nodes[id.0 as usize]
    }

    pub fn nodes(&self) -> &[SearchNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.0 as usize]
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    /// Distinct ground answers, in discovery order, as query-variable
    /// bindings.
    pub fn answers(&self) -> Vec<Substitution> {
        self.answers
            .iter()
            .map(|terms| {
                let mut s = Substitution::new();
                for (v, t) in self.query_vars.iter().zip(terms) {
                    s.insert(*v, *t);
                }
                s
            })
            .collect()
    }

    pub fn answer_count(&self) -> usize {
        self.answers.len()
    }

    /// Nodes in the order they were expanded.
    pub fn expansion_order(&self) -> &[NodeId] {
        &self.expansion_order
    }

    fn add_link(&mut self, from: NodeId, to: NodeId, kind: LinkKind) -> LinkId {
        assert!(to > from, "links must point from older to newer nodes");
        let id = LinkId(self.links.len() as u32);
        let transformation = matches!(kind, LinkKind::Transformation { .. });
        self.links.push(Link { id, from, to, kind });
        self.node_mut(from).out_links.push(id);
        let target = self.node_mut(to);
        if transformation {
            target.in_transformation.push(id);
        } else {
            target.in_restriction.push(id);
        }
        id
    }

    /// Adds a child of `from`. Children equal to an existing node up to
    /// variable renaming (clause and query bindings) are merged: a forward
    /// edge is added when the existing node is younger than `from`,
    /// otherwise the repeat is dropped.
    pub fn insert_child(&mut self, from: NodeId, clause: Clause, answer_terms: Vec<Term>, kind: LinkKind) -> Insertion {
        let key = canonical_key(&clause, &answer_terms);
        if let Some(&existing) = self.memo.get(&key) {
            if existing > from {
                let already = self.node(from).out_links.iter().any(|l| self.link(*l).to == existing && self.link(*l).kind == kind);
                if !already {
                    let is_t = matches!(kind, LinkKind::Transformation { .. });
                    self.add_link(from, existing, kind);
                    let cand = self.node(from).depth + u32::from(is_t);
                    self.relax_depth(existing, cand);
                    return Insertion::Existing { id: existing, linked: true };
                }
            }
            return Insertion::Existing { id: existing, linked: false };
        }
        let id = self.insert_unmemoized(from, clause, answer_terms, kind);
        self.memo.insert(key, id);
        Insertion::New(id)
    }

    /// Adds a fresh child without repeated-state detection. Used to build
    /// graph fixtures by hand.
    pub fn insert_unmemoized(&mut self, from: NodeId, clause: Clause, answer_terms: Vec<Term>, kind: LinkKind) -> NodeId {
        let is_t = matches!(kind, LinkKind::Transformation { .. });
        let parent = self.node(from);
        let depth = parent.depth + u32::from(is_t);
        let path_t = parent.path_transformations + u32::from(is_t);
        let path_r = parent.path_restrictions + u32::from(!is_t);
        let link_id = LinkId(self.links.len() as u32);
        let ground = clause.is_empty();
        let id = self.push_node(clause, answer_terms, depth, Some(link_id), path_t, path_r);
        self.add_link(from, id, kind);
        if ground {
            let terms = self.node(id).answer_terms.clone();
            self.answers.insert(terms);
        }
        id
    }

    /// Adds an extra link between two existing nodes (`to` younger than
    /// `from`).
    pub fn connect(&mut self, from: NodeId, to: NodeId, kind: LinkKind) -> LinkId {
        let is_t = matches!(kind, LinkKind::Transformation { .. });
        let id = self.add_link(from, to, kind);
        let cand = self.node(from).depth + u32::from(is_t);
        self.relax_depth(to, cand);
        id
    }

    fn relax_depth(&mut self, start: NodeId, depth: u32) {
        let mut queue = VecDeque::from([(start, depth)]);
        while let Some((id, d)) = queue.pop_front() {
            if d >= self.node(id).depth {
                continue;
            }
            self.node_mut(id).depth = d;
            for l in self.node(id).out_links.clone() {
                let link = self.link(l);
                queue.push_back((link.to, d + u32::from(link.is_transformation())));
            }
        }
    }

    pub(crate) fn push_frontier(&mut self, id: NodeId, score: f64) {
        let v = &mut self.versions[id.0 as usize];
        *v += 1;
        let version = *v;
        self.nodes[id.0 as usize].score = score;
        self.frontier.push(FrontierEntry { score, id, version });
    }

    /// Removes and returns the best unexpanded frontier node, marking it
    /// expanded.
    pub(crate) fn pop_frontier(&mut self) -> Option<NodeId> {
        while let Some(e) = self.frontier.pop() {
            let node = &self.nodes[e.id.0 as usize];
            if node.expanded || self.versions[e.id.0 as usize] != e.version {
                continue;
            }
            self.nodes[e.id.0 as usize].expanded = true;
            self.expansion_order.push(e.id);
            return Some(e.id);
        }
        None
    }

    /// Unexpanded frontier nodes with their current scores.
    pub fn frontier(&self) -> Vec<(NodeId, f64)> {
        let mut live: Vec<(NodeId, f64)> = self
            .frontier
            .iter()
            .filter(|e| !self.nodes[e.id.0 as usize].expanded && self.versions[e.id.0 as usize] == e.version)
            .map(|e| (e.id, e.score))
            .collect();
        live.sort_by_key(|e| e.0);
        live
    }

    pub(crate) fn mark_expanded(&mut self, id: NodeId) {
        if !self.node(id).expanded {
            self.node_mut(id).expanded = true;
            self.expansion_order.push(id);
        }
    }

    /// Nodes with a transformation link into `x`.
    pub fn parents(&self, x: NodeId) -> BTreeSet<NodeId> {
        self.node(x).in_transformation.iter().map(|l| self.link(*l).from).collect()
    }

    /// Nodes reachable from `x` through one or more transformation links.
    pub fn successors(&self, x: NodeId) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![x];
        while let Some(n) = stack.pop() {
            for l in &self.node(n).out_links {
                let link = self.link(*l);
                if link.is_transformation() && seen.insert(link.to) {
                    stack.push(link.to);
                }
            }
        }
        seen
    }

    /// Every distinct set of transformation links on a path from the root
    /// to `node`, each ordered root to node. Restriction links on a path
    /// contribute nothing. The root yields one empty set.
    pub fn link_sets_to_root(&self, node: NodeId) -> Vec<Vec<LinkId>> {
        let mut out: BTreeSet<Vec<LinkId>> = BTreeSet::new();
        let mut suffix: Vec<LinkId> = Vec::new();
        self.collect_link_sets(node, &mut suffix, &mut out);
        out.into_iter().collect()
    }

    fn collect_link_sets(&self, node: NodeId, suffix: &mut Vec<LinkId>, out: &mut BTreeSet<Vec<LinkId>>) {
        if out.len() >= MAX_LINK_SETS {
            return;
        }
        if node == self.root() {
            out.insert(suffix.iter().rev().copied().collect());
            return;
        }
        for l in self.node(node).in_links() {
            let link = self.link(l);
            if link.is_transformation() {
                suffix.push(l);
                self.collect_link_sets(link.from, suffix, out);
                suffix.pop();
            } else {
                self.collect_link_sets(link.from, suffix, out);
            }
        }
    }

    /// Records an answer at `answer_node`: it and every ancestor gain one
    /// answer below.
    pub fn mark_success(&mut self, answer_node: NodeId) {
        let mut seen = BTreeSet::from([answer_node]);
        let mut stack = vec![answer_node];
        while let Some(n) = stack.pop() {
            self.node_mut(n).answers_below += 1;
            for l in self.node(n).in_links().collect::<Vec<_>>() {
                let from = self.link(l).from;
                if seen.insert(from) {
                    stack.push(from);
                }
            }
        }
    }

    /// Text dump: one `node` line per node and one `link` line per link.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let _ = writeln!(
                out,
                "node {} depth={} answers_below={} expanded={} score={} clause={}",
                n.id,
                n.depth,
                n.answers_below,
                u8::from(n.expanded),
                n.score,
                n.clause
            );
        }
        for l in &self.links {
            match &l.kind {
                LinkKind::Transformation { step, substitution } => {
                    let _ = writeln!(out, "link {} t {} {} {} {}", l.id.0, l.from, l.to, step, substitution);
                }
                LinkKind::Restriction { fact, substitution } => {
                    let _ = writeln!(out, "link {} r {} {} {} {}", l.id.0, l.from, l.to, fact, substitution);
                }
            }
        }
        out
    }
}

/// Encodes a (clause, query bindings) pair so that two pairs get the same
/// key iff they are equal up to consistent variable renaming.
pub(crate) fn canonical_key(clause: &Clause, answer_terms: &[Term]) -> Vec<u64> {
    let mut vars: HashMap<Var, u64> = HashMap::new();
    let mut key = Vec::with_capacity(answer_terms.len() + 4 * clause.len() + 1);
    let mut term = |t: &Term, key: &mut Vec<u64>| match t {
        Term::Const(c) => key.push(u64::from(c.index()) << 1),
        Term::Var(v) => {
            let n = vars.len() as u64;
            let idx = *vars.entry(*v).or_insert(n);
            key.push((idx << 1) | 1);
        }
    };
    for t in answer_terms {
        term(t, &mut key);
    }
    key.push(u64::MAX);
    for l in clause.literals() {
        key.push((u64::from(l.predicate.index()) << 2) | u64::from(l.positive) | ((l.args.len() as u64) << 40));
        for a in &l.args {
            term(a, &mut key);
        }
    }
    key
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::parse_clause;

    fn clause(s: &str) -> Clause {
        parse_clause(s).unwrap()
    }

    fn t_link(rule: &str) -> LinkKind {
        LinkKind::Transformation { step: Step::Rule(Symbol::intern(rule)), substitution: Substitution::new() }
    }

    fn r_link() -> LinkKind {
        LinkKind::Restriction { fact: clause("(f a)").0.remove(0), substitution: Substitution::new() }
    }

    #[test]
    fn canonical_key_is_renaming_invariant() {
        let a = canonical_key(&clause("(and (p ?x ?y) (q ?y))"), &[Term::var("x")]);
        let b = canonical_key(&clause("(and (p ?u ?v) (q ?v))"), &[Term::var("u")]);
        let c = canonical_key(&clause("(and (p ?u ?v) (q ?u))"), &[Term::var("u")]);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn root_has_one_empty_link_set() {
        let g = SearchGraph::new(clause("(p ?x)"));
        assert_eq!(g.link_sets_to_root(g.root()), vec![Vec::<LinkId>::new()]);
    }

    #[test]
    fn chain_and_diamond_link_sets() {
        let mut g = SearchGraph::new(clause("(p ?x)"));
        let a = g.insert_unmemoized(g.root(), clause("(q ?x)"), vec![Term::var("x")], t_link("r1"));
        let b = g.insert_unmemoized(a, clause("(s ?x)"), vec![Term::var("x")], t_link("r2"));
        assert_eq!(g.link_sets_to_root(b).len(), 1);
        assert_eq!(g.link_sets_to_root(b)[0].len(), 2);
        assert_eq!(g.node(b).depth, 2);

        // diamond: root -> c (r3), c -> b (r4) adds a second path to b
        let c = g.insert_unmemoized(g.root(), clause("(w ?x)"), vec![Term::var("x")], t_link("r3"));
        let d = g.insert_unmemoized(c, clause("(v ?x)"), vec![Term::var("x")], t_link("r5"));
        let e = g.insert_unmemoized(d, clause("(u ?x)"), vec![Term::var("x")], t_link("r6"));
        g.connect(b, e, t_link("r7"));
        let sets = g.link_sets_to_root(e);
        assert_eq!(sets.len(), 2);
        assert_eq!(g.node(e).depth, 3);
    }

    #[test]
    fn restriction_links_are_skipped_in_link_sets() {
        let mut g = SearchGraph::new(clause("(p ?x)"));
        let a = g.insert_unmemoized(g.root(), clause("(q ?x)"), vec![Term::var("x")], t_link("r1"));
        let b = g.insert_unmemoized(a, clause("(s a)"), vec![Term::constant("a")], r_link());
        let sets = g.link_sets_to_root(b);
        assert_eq!(sets, vec![vec![LinkId(0)]]);
        assert_eq!(g.node(b).depth, 1);
    }

    #[test]
    fn mark_success_counts() {
        let mut g = SearchGraph::new(clause("(p ?x)"));
        g.mark_success(g.root());
        assert_eq!(g.node(g.root()).answers_below, 1);

        let mut g = SearchGraph::new(clause("(p ?x)"));
        let mut cur = g.root();
        for i in 0..3 {
            cur = g.insert_unmemoized(cur, clause(&format!("(q{i} ?x)")), vec![Term::var("x")], t_link("r"));
        }
        g.mark_success(cur);
        assert_eq!(g.nodes().iter().filter(|n| n.answers_below == 1).count(), 4);
    }

    #[test]
    fn two_answers_under_shared_parent() {
        let mut g = SearchGraph::new(clause("(p ?x)"));
        let parent = g.insert_unmemoized(g.root(), clause("(q ?x)"), vec![Term::var("x")], t_link("r"));
        let a1 = g.insert_unmemoized(parent, Clause::default(), vec![Term::constant("a")], r_link());
        let a2 = g.insert_unmemoized(parent, Clause::default(), vec![Term::constant("b")], r_link());
        g.mark_success(a1);
        g.mark_success(a2);
        assert_eq!(g.node(parent).answers_below, 2);
        assert_eq!(g.node(g.root()).answers_below, 2);
        assert_eq!(g.answer_count(), 2);
    }

    #[test]
    fn memo_merges_forward_repeats_only() {
        let mut g = SearchGraph::new(clause("(p ?x)"));
        let a = g.insert_child(g.root(), clause("(q ?x)"), vec![Term::var("x")], t_link("r1"));
        let Insertion::New(a) = a else { panic!() };
        // a repeat of the root from below is a back edge and is dropped
        let back = g.insert_child(a, clause("(p ?y)"), vec![Term::var("y")], t_link("r2"));
        assert_eq!(back, Insertion::Existing { id: g.root(), linked: false });
        let b = g.insert_child(g.root(), clause("(s ?x)"), vec![Term::var("x")], t_link("r3"));
        let Insertion::New(b) = b else { panic!() };
        let Insertion::New(c) = g.insert_child(a, clause("(w ?z)"), vec![Term::var("z")], t_link("r4")) else { panic!() };
        let again = g.insert_child(b, clause("(w ?q)"), vec![Term::var("q")], t_link("r5"));
        assert_eq!(again, Insertion::Existing { id: c, linked: true });
        for l in g.links() {
            assert!(l.to > l.from);
        }
    }

    #[test]
    fn frontier_pops_max_score_then_smallest_id() {
        let mut g = SearchGraph::new(clause("(p ?x)"));
        let a = g.insert_unmemoized(g.root(), clause("(q ?x)"), vec![Term::var("x")], t_link("r"));
        let b = g.insert_unmemoized(g.root(), clause("(s ?x)"), vec![Term::var("x")], t_link("r"));
        g.push_frontier(b, 1.0);
        g.push_frontier(a, 1.0);
        g.push_frontier(g.root(), 0.5);
        assert_eq!(g.pop_frontier(), Some(a));
        // rescoring invalidates the old entry
        g.push_frontier(g.root(), 2.0);
        assert_eq!(g.pop_frontier(), Some(g.root()));
        assert_eq!(g.pop_frontier(), Some(b));
        assert_eq!(g.pop_frontier(), None);
    }
}
