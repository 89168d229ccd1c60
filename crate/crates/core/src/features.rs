//! Search meta-features of a node: problem size, search state, knowledge
//! statistics, transitivity, random probes below the node, balance terms,
//! squares and interactions. Feature 46 is the number of answers below the
//! node and is only known after search.

use std::cell::Cell;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kb::KnowledgeBase;
use crate::search::{children, LinkKind, NodeId, SearchGraph, Step};
use crate::symbol::Symbol;
use crate::term::{Clause, Literal, Term};

pub const NUM_FEATURES: usize = 46;
/// Index of the target column (1-based).
pub const TARGET: usize = 46;

pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "num_variables",
    "num_literals",
    "num_fully_unbound_literals",
    "single_literal",
    "multi_literal",
    "fully_bound",
    "partially_bound",
    "fully_unbound_single_literal",
    "depth",
    "transformation_links",
    "restriction_links",
    "fan_out_score",
    "recursive_rules",
    "generality_unbound_literals",
    "min_term_generality",
    "gafs_single_literal",
    "min_gafs",
    "generality_fully_unbound_single",
    "open_transitive_positions",
    "open_transitive_positions_multi_var",
    "open_genls_disjoint_positions",
    "probe_mean_transformation_links",
    "probe_mean_literals",
    "probe_median_out_degree",
    "probe_max_out_degree",
    "probe_median_variables",
    "parent_successor_union",
    "probe_median_depth",
    "knuth_estimate",
    "variable_literal_ratio",
    "positive_negative_ratio",
    "positives_minus_one",
    "num_literals_sq",
    "num_variables_sq",
    "depth_sq",
    "transformation_links_sq",
    "variable_literal_ratio_sq",
    "parent_successor_union_sq",
    "depth_x_transformation_links",
    "depth_x_parent_successor_union",
    "depth_x_knuth_estimate",
    "single_literal_x_open_transitive",
    "min_term_generality_x_single_literal",
    "generality_unbound_x_multi_literal",
    "procedural_single_literal",
    "answers",
];

/// The deployed feature subset when none is configured.
pub const DEFAULT_MASK: [usize; 10] = [5, 8, 9, 12, 16, 26, 29, 31, 32, 36];

/// Squares: (feature, base).
pub const QUADRATICS: [(usize, usize); 6] = [(33, 2), (34, 1), (35, 9), (36, 10), (37, 30), (38, 27)];
/// Products: (feature, left, right).
pub const INTERACTIONS: [(usize, usize, usize); 6] =
    [(39, 9, 10), (40, 9, 27), (41, 9, 29), (42, 4, 19), (43, 15, 4), (44, 14, 5)];

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Cost {
    Cheap,
    Moderate,
    Expensive,
}

pub fn feature_cost(i: usize) -> Cost {
    match i {
        1..=13 | 30..=38 | 45 | 46 => Cost::Cheap,
        14..=21 | 39..=44 => Cost::Moderate,
        22..=29 => Cost::Expensive,
        _ => panic!("feature index {i} out of range"),
    }
}

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name).map(|i| i + 1)
}

/// Values indexed 1..=46; `None` marks a missing value.
#[derive(Clone, PartialEq, Debug)]
pub struct FeatureVector {
    values: [Option<f64>; NUM_FEATURES],
}

impl Default for FeatureVector {
    fn default() -> Self {
        FeatureVector { values: [None; NUM_FEATURES] }
    }
}

impl FeatureVector {
    pub fn get(&self, i: usize) -> Option<f64> {
        self.values[i - 1]
    }

    pub fn set(&mut self, i: usize, v: Option<f64>) {
        self.values[i - 1] = v;
    }

    pub fn is_missing(&self, i: usize) -> bool {
        self.values[i - 1].is_none()
    }

    pub fn values(&self) -> &[Option<f64>; NUM_FEATURES] {
        &self.values
    }

    pub fn csv_header() -> String {
        FEATURE_NAMES.join(",")
    }

    /// One CSV line; missing values are empty cells.
    pub fn to_csv_row(&self) -> String {
        let mut s = String::new();
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            if let Some(v) = v {
                let _ = write!(s, "{v}");
            }
        }
        s
    }

    pub fn from_values(values: [Option<f64>; NUM_FEATURES]) -> FeatureVector {
        FeatureVector { values }
    }
}

thread_local! {
    static PROBES: Cell<u64> = const { Cell::new(0) };
    static EXPANSIONS: Cell<u64> = const { Cell::new(0) };
}

/// Per-thread counts of probe walks and child generations performed by
/// feature extraction.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Instrumentation {
    pub probes: u64,
    pub child_generations: u64,
}

pub fn instrumentation() -> Instrumentation {
    Instrumentation { probes: PROBES.with(Cell::get), child_generations: EXPANSIONS.with(Cell::get) }
}

pub fn reset_instrumentation() {
    PROBES.with(|c| c.set(0));
    EXPANSIONS.with(|c| c.set(0));
}

/// Σ over distinct predicates of log₁₀(1 + NumRules(p)).
pub fn fan_out_score<'a>(kb: &KnowledgeBase, literals: impl IntoIterator<Item = &'a Literal>) -> f64 {
    let mut preds: Vec<Symbol> = literals.into_iter().map(|l| l.predicate).collect();
    preds.sort();
    preds.dedup();
    preds.iter().map(|p| (1.0 + kb.num_rules(*p) as f64).log10()).sum()
}

/// Π over distinct predicates of log₁₀(1 + TermGenerality(p)). The empty
/// product is 1.
pub fn generality_estimate<'a>(kb: &KnowledgeBase, literals: impl IntoIterator<Item = &'a Literal>) -> f64 {
    let mut preds: Vec<Symbol> = literals.into_iter().map(|l| l.predicate).collect();
    preds.sort();
    preds.dedup();
    preds.iter().map(|p| (1.0 + kb.term_generality(*p) as f64).log10()).product()
}

/// Outcome of one random walk.
#[derive(Clone, Debug, PartialEq)]
pub struct Walk<T> {
    /// 1 + b₁ + b₁b₂ + … over the observed branching factors.
    pub estimate: f64,
    /// Nodes below the start, in walk order.
    pub visited: Vec<T>,
    /// Out-degree of every node whose children were generated, the start
    /// included.
    pub degrees: Vec<usize>,
}

/// Knuth's random-path estimator. `expand` lists a node's children and
/// `choose(n)` picks one of `n` indices. The walk stops at a childless
/// node or after `max_steps` moves.
pub fn knuth_walk<T: Clone>(
    start: T,
    mut expand: impl FnMut(&T, usize) -> Vec<T>,
    mut choose: impl FnMut(usize) -> usize,
    max_steps: usize,
) -> Walk<T> {
    let mut estimate = 1.0;
    let mut product = 1.0;
    let mut visited = Vec::new();
    let mut degrees = Vec::new();
    let mut current = start;
    for step in 0..max_steps {
        let mut kids = expand(&current, step);
        degrees.push(kids.len());
        if kids.is_empty() {
            break;
        }
        product *= kids.len() as f64;
        estimate += product;
        let pick = choose(kids.len());
        current = kids.swap_remove(pick);
        visited.push(current.clone());
    }
    Walk { estimate, visited, degrees }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeStats {
    pub mean_transformation_links: Option<f64>,
    pub mean_literals: Option<f64>,
    pub median_out_degree: Option<f64>,
    pub max_out_degree: Option<f64>,
    pub median_variables: Option<f64>,
    pub median_depth: Option<f64>,
    pub knuth_estimate: f64,
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    Some(if n % 2 == 1 { xs[n / 2] } else { (xs[n / 2 - 1] + xs[n / 2]) / 2.0 })
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Scope range for probe renaming; committed nodes never get this high.
const PROBE_SCOPE: u32 = 1 << 30;

#[derive(Clone)]
struct ProbeNode {
    clause: Clause,
    terms: Vec<Term>,
    depth: u32,
    transformations: u32,
}

/// Walks one random path below `node` without touching the graph.
pub fn probe(graph: &SearchGraph, node: NodeId, kb: &KnowledgeBase, seed: u64, max_steps: usize, max_depth: Option<u32>) -> ProbeStats {
    PROBES.with(|c| c.set(c.get() + 1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ u64::from(node.0).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let n = graph.node(node);
    let start = ProbeNode {
        clause: n.clause.clone(),
        terms: n.answer_terms.clone(),
        depth: n.depth,
        transformations: n.path_transformations,
    };
    let walk = knuth_walk(
        start,
        |p, step| {
            EXPANSIONS.with(|c| c.set(c.get() + 1));
            children(kb, &p.clause, &p.terms, PROBE_SCOPE + step as u32)
                .into_iter()
                .filter(|c| !(c.is_transformation() && max_depth.is_some_and(|m| p.depth + 1 > m)))
                .map(|c| {
                    let t = u32::from(c.is_transformation());
                    ProbeNode { clause: c.clause, terms: c.answer_terms, depth: p.depth + t, transformations: p.transformations + t }
                })
                .collect()
        },
        |k| rng.gen_range(0..k),
        max_steps,
    );
    let v = &walk.visited;
    let col = |f: &dyn Fn(&ProbeNode) -> f64| v.iter().map(f).collect::<Vec<f64>>();
    ProbeStats {
        mean_transformation_links: mean(&col(&|p| f64::from(p.transformations))),
        mean_literals: mean(&col(&|p| p.clause.len() as f64)),
        median_out_degree: if v.is_empty() { None } else { median(walk.degrees[1..].iter().map(|d| *d as f64).collect()) },
        max_out_degree: if v.is_empty() { None } else { walk.degrees[1..].iter().max().map(|d| *d as f64) },
        median_variables: median(col(&|p| p.clause.vars().len() as f64)),
        median_depth: median(col(&|p| f64::from(p.depth))),
        knuth_estimate: walk.estimate,
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FeatureConfig {
    pub probe_seed: u64,
    pub max_steps: usize,
    pub max_depth: Option<u32>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { probe_seed: 0, max_steps: 30, max_depth: Some(25) }
    }
}

/// Which features to compute, 1-based; index 0 is unused.
pub type Needed = [bool; NUM_FEATURES + 1];

/// Expands a request to include every base feature it depends on.
pub fn with_dependencies(features: &[usize]) -> Needed {
    let mut need = [false; NUM_FEATURES + 1];
    for &f in features {
        need[f] = true;
    }
    for (f, b) in QUADRATICS {
        if need[f] {
            need[b] = true;
        }
    }
    for (f, a, b) in INTERACTIONS {
        if need[f] {
            need[a] = true;
            need[b] = true;
        }
    }
    if need[30] || need[37] {
        need[1] = true;
        need[2] = true;
    }
    need
}

fn flag(b: bool) -> Option<f64> {
    Some(f64::from(u8::from(b)))
}

fn recursive_rules(graph: &SearchGraph, node: NodeId) -> usize {
    let mut uses: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut cur = node;
    while let Some(l) = graph.node(cur).primary {
        let link = graph.link(l);
        if let LinkKind::Transformation { step: Step::Rule(r), .. } = &link.kind {
            *uses.entry(*r).or_default() += 1;
        }
        cur = link.from;
    }
    uses.values().filter(|n| **n >= 2).count()
}

fn open_transitive(kb: &KnowledgeBase, clause: &Clause) -> usize {
    clause
        .literals()
        .iter()
        .map(|l| kb.transitive_positions(l.predicate).filter(|k| l.args.get(k - 1).is_some_and(Term::is_var)).count())
        .sum()
}

/// Features 1–45 of `node`. Feature 46 is left missing.
pub fn extract_features(graph: &SearchGraph, node: NodeId, kb: &KnowledgeBase, config: &FeatureConfig) -> FeatureVector {
    extract_selected(graph, node, kb, config, &[true; NUM_FEATURES + 1])
}

/// Computes only the features flagged in `need` (see
/// [`with_dependencies`]); the rest stay missing. Probing runs only when a
/// probe feature is requested.
pub fn extract_selected(graph: &SearchGraph, node: NodeId, kb: &KnowledgeBase, config: &FeatureConfig, need: &Needed) -> FeatureVector {
    let n = graph.node(node);
    let c = &n.clause;
    let lits = c.literals();
    let mut fv = FeatureVector::default();
    let nvars = c.vars().len();
    let nlits = lits.len();
    let single = nlits == 1;
    let fully_unbound = |l: &Literal| !l.args.is_empty() && l.args.iter().all(Term::is_var);
    let has_const = lits.iter().any(|l| l.args.iter().any(|t| !t.is_var()));
    let positives = lits.iter().filter(|l| l.positive).count();
    let negatives = nlits - positives;
    let fu_single = single && fully_unbound(&lits[0]);

    let mut put = |i: usize, f: &dyn Fn() -> Option<f64>| {
        if need[i] {
            fv.set(i, f());
        }
    };
    put(1, &|| Some(nvars as f64));
    put(2, &|| Some(nlits as f64));
    put(3, &|| Some(lits.iter().filter(|l| fully_unbound(l)).count() as f64));
    put(4, &|| flag(single));
    put(5, &|| flag(nlits > 1));
    put(6, &|| flag(nvars == 0));
    put(7, &|| flag(nvars > 0 && has_const));
    put(8, &|| flag(fu_single));
    put(9, &|| Some(f64::from(n.depth)));
    put(10, &|| Some(f64::from(n.path_transformations)));
    put(11, &|| Some(f64::from(n.path_restrictions)));
    put(12, &|| Some(fan_out_score(kb, lits)));
    put(13, &|| Some(recursive_rules(graph, node) as f64));
    put(14, &|| Some(generality_estimate(kb, lits.iter().filter(|l| l.args.iter().any(Term::is_var)))));
    put(15, &|| c.constants().iter().map(|t| kb.term_generality(*t)).min().map(|g| g as f64));
    put(16, &|| Some(if single { kb.num_gafs(lits[0].predicate) as f64 } else { 0.0 }));
    put(17, &|| lits.iter().map(|l| kb.num_gafs(l.predicate)).min().map(|g| g as f64));
    put(18, &|| Some(if fu_single { generality_estimate(kb, lits) } else { 0.0 }));
    put(19, &|| Some(open_transitive(kb, c) as f64));
    put(20, &|| Some(if nvars >= 2 { open_transitive(kb, c) as f64 } else { 0.0 }));
    put(21, &|| {
        let count = lits
            .iter()
            .filter(|l| matches!(l.predicate.as_str(), "genls" | "disjointWith"))
            .map(|l| l.args.iter().filter(|t| t.is_var()).count())
            .sum::<usize>();
        Some(count as f64)
    });
    put(27, &|| {
        let mut union = std::collections::BTreeSet::new();
        for p in graph.parents(node) {
            union.extend(graph.successors(p));
        }
        Some(union.len() as f64)
    });
    put(30, &|| (nlits > 0).then(|| nvars as f64 / nlits as f64));
    put(31, &|| Some(positives as f64 / (1.0 + negatives as f64)));
    put(32, &|| Some((positives as f64 - 1.0).abs()));
    put(45, &|| flag(single && kb.is_procedural(lits[0].predicate)));

    if (22..=29).any(|i| i != 27 && need[i]) {
        let p = probe(graph, node, kb, config.probe_seed, config.max_steps, config.max_depth);
        let stats = [
            (22, p.mean_transformation_links),
            (23, p.mean_literals),
            (24, p.median_out_degree),
            (25, p.max_out_degree),
            (26, p.median_variables),
            (28, p.median_depth),
            (29, Some(p.knuth_estimate)),
        ];
        for (i, v) in stats {
            if need[i] {
                fv.set(i, v);
            }
        }
    }
    for (f, b) in QUADRATICS {
        if need[f] {
            fv.set(f, fv.get(b).map(|x| x * x));
        }
    }
    for (f, a, b) in INTERACTIONS {
        if need[f] {
            fv.set(f, fv.get(a).zip(fv.get(b)).map(|(x, y)| x * y));
        }
    }
    fv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::load_kb;
    use crate::search::{LinkKind, Step};
    use crate::sexpr::parse_clause;
    use crate::unify::Substitution;

    fn kb(s: &str) -> KnowledgeBase {
        load_kb(s.as_bytes()).unwrap()
    }

    #[test]
    fn names_and_costs() {
        assert_eq!(FEATURE_NAMES.len(), 46);
        assert_eq!(feature_index("depth"), Some(9));
        assert_eq!(feature_index("answers"), Some(TARGET));
        assert_eq!(feature_cost(29), Cost::Expensive);
        for (f, b) in QUADRATICS {
            assert_eq!(FEATURE_NAMES[f - 1], format!("{}_sq", FEATURE_NAMES[b - 1]));
        }
    }

    #[test]
    fn fan_out_and_generality() {
        let mut text = String::new();
        for i in 0..9 {
            text.push_str(&format!("(rule a{i} (ante (z ?x)) (conseq (p ?x)))\n"));
        }
        for i in 0..99 {
            text.push_str(&format!("(rule b{i} (ante (z ?x)) (conseq (q ?x)))\n"));
        }
        text.push_str("(generality p 9)\n(generality q 99)\n(generality r 0)\n");
        let k = kb(&text);
        let c = parse_clause("(and (p ?x) (q ?x) (p ?y))").unwrap();
        assert!((fan_out_score(&k, c.literals()) - 3.0).abs() < 1e-12);
        assert!((generality_estimate(&k, c.literals()) - 2.0).abs() < 1e-12);
        let r = parse_clause("(and (p ?x) (r ?x))").unwrap();
        assert_eq!(generality_estimate(&k, r.literals()), 0.0);
        assert_eq!(generality_estimate(&k, &[]), 1.0);
    }

    #[test]
    fn root_single_literal_features() {
        let k = KnowledgeBase::empty();
        let g = SearchGraph::new(parse_clause("(p ?x)").unwrap());
        let f = extract_features(&g, g.root(), &k, &FeatureConfig::default());
        assert_eq!(f.get(2), Some(1.0));
        assert_eq!(f.get(1), Some(1.0));
        assert_eq!(f.get(4), Some(1.0));
        assert_eq!(f.get(31), Some(1.0));
        assert_eq!(f.get(32), Some(0.0));
        assert_eq!(f.get(9), Some(0.0));
        assert_eq!(f.get(29), Some(1.0));
        assert!(f.is_missing(15));
        assert!(f.is_missing(26));
        assert!(f.is_missing(TARGET));
    }

    #[test]
    fn depth_times_transformations() {
        let k = KnowledgeBase::empty();
        let mut g = SearchGraph::new(parse_clause("(p ?x)").unwrap());
        let t = |r: &str| LinkKind::Transformation { step: Step::Rule(Symbol::intern(r)), substitution: Substitution::new() };
        let mut cur = g.root();
        for i in 0..3 {
            cur = g.insert_unmemoized(cur, parse_clause(&format!("(q{i} ?x)")).unwrap(), vec![Term::var("x")], t("r"));
        }
        let f = extract_features(&g, cur, &k, &FeatureConfig::default());
        assert_eq!(f.get(9), Some(3.0));
        assert_eq!(f.get(10), Some(3.0));
        assert_eq!(f.get(39), Some(9.0));
        assert_eq!(f.get(13), Some(1.0));
    }

    #[test]
    fn genls_open_positions() {
        let k = kb("(genls C1 Person)\n(transitive genls 1)\n");
        let g = SearchGraph::new(parse_clause("(genls ?x Person)").unwrap());
        let f = extract_features(&g, g.root(), &k, &FeatureConfig::default());
        assert_eq!(f.get(21), Some(1.0));
        assert_eq!(f.get(19), Some(1.0));
        assert_eq!(f.get(20), Some(0.0));
    }

    #[test]
    fn knuth_uniform_binary_tree_is_exact() {
        // node = depth; every internal node has two children
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = knuth_walk(0u32, |d, _| if *d < 2 { vec![d + 1, d + 1] } else { vec![] }, |k| rng.gen_range(0..k), 30);
            assert_eq!(w.estimate, 7.0);
        }
    }

    #[test]
    fn cheap_features_do_not_probe() {
        let k = kb("(fact (p a))\n(rule r (ante (p ?x)) (conseq (q ?x)))\n");
        let g = SearchGraph::new(parse_clause("(q ?x)").unwrap());
        reset_instrumentation();
        let cheap: Vec<usize> = (1..=45).filter(|i| feature_cost(*i) == Cost::Cheap).collect();
        extract_selected(&g, g.root(), &k, &FeatureConfig::default(), &with_dependencies(&cheap));
        assert_eq!(instrumentation(), Instrumentation::default());
        extract_features(&g, g.root(), &k, &FeatureConfig::default());
        assert_eq!(instrumentation().probes, 1);
    }

    #[test]
    fn csv_row_has_46_cells() {
        let mut f = FeatureVector::default();
        f.set(1, Some(2.0));
        f.set(46, Some(0.5));
        let row = f.to_csv_row();
        assert_eq!(row.split(',').count(), 46);
        assert!(row.starts_with("2,"));
        assert!(row.ends_with(",0.5"));
    }
}
