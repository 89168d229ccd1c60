//! Seeded corpus generators.
//!
//! The synthetic corpus has a small taxonomy per domain and general
//! predicates `g0..` with no facts of their own. Each domain contributes
//! relevant rules for every general predicate (a one-step rule and a
//! three-step chain) plus distractor rules of three shapes:
//!
//! * a single literal with facts only in the distractor's own concept,
//! * a two-literal join that dies on its second literal,
//! * a fan-out through tagged helper predicates, two levels deep.
//!
//! Distractor facts never mention query individuals, so distractors cost
//! search effort without contributing answers.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{QueryClass, QuerySpec};
use crate::bottom_up::BottomUp;
use crate::kb::{KbBuilder, KnowledgeBase, Rule};
use crate::term::{Clause, Literal, Term};

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticParams {
    pub domains: usize,
    pub concepts_per_domain: usize,
    pub taxonomy_depth: usize,
    /// At least 4; individuals cycle through three pools (one-step
    /// queries, chain queries, distractor facts).
    pub individuals_per_concept: usize,
    pub facts_per_predicate: usize,
    /// Number of general predicates; each domain has relevant rules for
    /// every one of them.
    pub relevant_rules_per_domain: usize,
    pub distractor_rules_per_domain: usize,
    /// Helper rules under each fan-out distractor.
    pub fan_out: usize,
    /// Helper rules under each helper predicate.
    pub nested_fan_out: usize,
    pub test_sets: usize,
    pub queries_per_test_set: usize,
    pub training_queries: usize,
    pub heavy_fraction: f64,
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            domains: 5,
            concepts_per_domain: 6,
            taxonomy_depth: 2,
            individuals_per_concept: 16,
            facts_per_predicate: 32,
            relevant_rules_per_domain: 3,
            distractor_rules_per_domain: 50,
            fan_out: 8,
            nested_fan_out: 16,
            test_sets: 3,
            queries_per_test_set: 100,
            training_queries: 40,
            heavy_fraction: 0.7,
            seed: 0,
        }
    }
}

/// A generated knowledge base with its labeled query suites.
#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    pub kb: KnowledgeBase,
    /// Test queries, `test_set` in `1..=test_sets`.
    pub queries: Vec<QuerySpec>,
    /// Queries for collecting training data, `test_set` 0.
    pub training: Vec<QuerySpec>,
}

fn lit(p: &str, args: &[&str]) -> Literal {
    Literal::new(p, args.iter().map(|a| if let Some(v) = a.strip_prefix('?') { Term::var(v) } else { Term::constant(a) }).collect())
}

struct Ids {
    used: BTreeSet<String>,
}

impl Ids {
    fn fresh(&mut self, rng: &mut ChaCha8Rng) -> String {
        loop {
            let id = format!("r{:08x}", rng.gen::<u32>());
            if self.used.insert(id.clone()) {
                return id;
            }
        }
    }
}

fn rule(b: &mut KbBuilder, ids: &mut Ids, rng: &mut ChaCha8Rng, ante: Vec<Literal>, conseq: Literal) {
    let r = Rule::new(&ids.fresh(rng), ante, conseq, true).expect("generated rules are range restricted");
    b.rule(r);
}

struct Domain {
    concepts: Vec<String>,
    /// Individuals per concept, split into pools.
    one_step: Vec<String>,
    chain: Vec<String>,
    distractor_pool: Vec<Vec<String>>,
    all: Vec<String>,
}

fn build_domain(b: &mut KbBuilder, p: &SyntheticParams, d: usize, rng: &mut ChaCha8Rng) -> Domain {
    let top = format!("Dom{d}");
    b.genls(&top, "Thing");
    let depth = p.taxonomy_depth.max(1);
    let per_level = p.concepts_per_domain.div_ceil(depth).max(1);
    let mut concepts = Vec::new();
    let mut previous: Vec<String> = vec![top.clone()];
    let mut level = Vec::new();
    for i in 0..p.concepts_per_domain {
        let c = format!("D{d}C{i}");
        let parent = previous.choose(rng).expect("parent level is never empty").clone();
        b.genls(&c, &parent);
        level.push(c.clone());
        concepts.push(c);
        if level.len() == per_level {
            previous = std::mem::take(&mut level);
        }
    }
    let mut dom = Domain { concepts: concepts.clone(), one_step: vec![], chain: vec![], distractor_pool: vec![], all: vec![] };
    for (ci, c) in concepts.iter().enumerate() {
        let mut pool = Vec::new();
        for i in 0..p.individuals_per_concept {
            let e = format!("e{d}_{ci}_{i}");
            b.isa(&e, c);
            match i % 4 {
                0 => dom.one_step.push(e.clone()),
                2 => dom.chain.push(e.clone()),
                _ => pool.push(e.clone()),
            }
            dom.all.push(e);
        }
        dom.distractor_pool.push(pool);
    }
    dom
}

/// Up to `n` distinct pairs drawn from `pool`.
fn pairs(pool: &[String], n: usize, rng: &mut ChaCha8Rng) -> Vec<(String, String)> {
    let mut out = BTreeSet::new();
    let limit = (pool.len() * pool.len()).min(n);
    while out.len() < limit {
        out.insert((pool.choose(rng).unwrap().clone(), pool.choose(rng).unwrap().clone()));
    }
    out.into_iter().collect()
}

/// Builds the synthetic corpus. Identical parameters give an identical KB
/// and identical suites.
pub fn gen_synthetic_kb(p: &SyntheticParams) -> SyntheticCorpus {
    assert!(p.individuals_per_concept >= 4, "need at least 4 individuals per concept");
    assert!(p.relevant_rules_per_domain >= 1, "need at least one general predicate");
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut b = KbBuilder::new();
    let mut ids = Ids { used: BTreeSet::new() };
    let k_count = p.relevant_rules_per_domain;
    let mut domains = Vec::new();
    let mut fact_counts: std::collections::BTreeMap<String, u64> = Default::default();
    let mut fact = |b: &mut KbBuilder, pred: &str, args: &[&str]| {
        b.fact(lit(pred, args));
        *fact_counts.entry(pred.to_string()).or_default() += 1;
    };

    for d in 0..p.domains {
        let dom = build_domain(&mut b, p, d, &mut rng);
        for k in 0..k_count {
            let g = format!("g{k}");
            // one-step: g(x, y) <- s(x, y)
            let s = format!("s{d}_{k}");
            for _ in 0..p.facts_per_predicate {
                let x = dom.all.choose(&mut rng).unwrap();
                let y = dom.one_step.choose(&mut rng).unwrap();
                fact(&mut b, &s, &[x, y]);
            }
            rule(&mut b, &mut ids, &mut rng, vec![lit(&s, &["?x", "?y"])], lit(&g, &["?x", "?y"]));
            // chain: g <- m, m <- b & t, t <- c
            let (m, bp, t, c) = (format!("m{d}_{k}"), format!("b{d}_{k}"), format!("t{d}_{k}"), format!("c{d}_{k}"));
            for _ in 0..p.facts_per_predicate {
                let z = dom.all.choose(&mut rng).unwrap();
                let y = dom.chain.choose(&mut rng).unwrap();
                let x = dom.all.choose(&mut rng).unwrap();
                fact(&mut b, &c, &[z, y]);
                fact(&mut b, &bp, &[x, z]);
                let (x2, z2) = (dom.all.choose(&mut rng).unwrap(), dom.all.choose(&mut rng).unwrap());
                fact(&mut b, &bp, &[x2, z2]);
            }
            rule(&mut b, &mut ids, &mut rng, vec![lit(&m, &["?x", "?y"])], lit(&g, &["?x", "?y"]));
            rule(&mut b, &mut ids, &mut rng, vec![lit(&bp, &["?x", "?z"]), lit(&t, &["?z", "?y"])], lit(&m, &["?x", "?y"]));
            rule(&mut b, &mut ids, &mut rng, vec![lit(&c, &["?z", "?y"])], lit(&t, &["?z", "?y"]));
        }

        let mut has_helpers = false;
        for j in 0..p.distractor_rules_per_domain {
            let g = format!("g{}", j % k_count);
            let ci = rng.gen_range(0..dom.concepts.len());
            let pool = &dom.distractor_pool[ci];
            let training = pairs(pool, 6, &mut rng);
            let shape: f64 = rng.gen();
            if shape < 0.3 {
                let a = format!("a{d}_{j}");
                for (u, v) in &training {
                    fact(&mut b, &a, &[u, v]);
                }
                rule(&mut b, &mut ids, &mut rng, vec![lit(&a, &["?x", "?y"])], lit(&g, &["?x", "?y"]));
            } else if shape < 0.5 {
                let (pp, q) = (format!("p{d}_{j}"), format!("q{d}_{j}"));
                for (u, v) in &training {
                    let w = pool.choose(&mut rng).unwrap();
                    fact(&mut b, &pp, &[u, w]);
                    fact(&mut b, &q, &[w, v]);
                }
                rule(&mut b, &mut ids, &mut rng, vec![lit(&pp, &["?x", "?z"]), lit(&q, &["?z", "?y"])], lit(&g, &["?x", "?y"]));
            } else {
                has_helpers = true;
                let n = format!("n{d}_{j}");
                let tag = format!("T{d}_{j}");
                for (u, v) in &training {
                    let w = pool.choose(&mut rng).unwrap();
                    let o = rng.gen_range(0..p.nested_fan_out.max(1));
                    let mm = rng.gen_range(0..p.fan_out.max(1));
                    fact(&mut b, &format!("h2{d}_{o}"), &[u, w, &tag]);
                    fact(&mut b, &format!("r{d}_{mm}"), &[w, v]);
                }
                rule(&mut b, &mut ids, &mut rng, vec![lit(&n, &["?x", "?y"])], lit(&g, &["?x", "?y"]));
                for mm in 0..p.fan_out.max(1) {
                    rule(&mut b, &mut ids, &mut rng, vec![lit(&format!("h{d}_{mm}"), &["?x", "?y", &tag])], lit(&n, &["?x", "?y"]));
                }
            }
        }
        if has_helpers {
            for mm in 0..p.fan_out.max(1) {
                for o in 0..p.nested_fan_out.max(1) {
                    rule(
                        &mut b,
                        &mut ids,
                        &mut rng,
                        vec![lit(&format!("h2{d}_{o}"), &["?x", "?z", "?t"]), lit(&format!("r{d}_{mm}"), &["?z", "?y"])],
                        lit(&format!("h{d}_{mm}"), &["?x", "?y", "?t"]),
                    );
                }
            }
        }
        domains.push(dom);
    }
    for (pred, n) in &fact_counts {
        b.generality(pred, *n);
    }
    b.instance_count_generality();
    let kb = b.build().expect("generated KB is well formed");
    let oracle = BottomUp::new(&kb);

    let mut used = BTreeSet::new();
    let mut make = |set: u32, domain_ids: &[usize], n: usize, prefix: &str, rng: &mut ChaCha8Rng| {
        let mut out = Vec::new();
        let mut attempts = 0;
        while out.len() < n && attempts < n * 50 {
            attempts += 1;
            let d = *domain_ids.choose(rng).unwrap();
            let k = rng.gen_range(0..k_count);
            let heavy = rng.gen_bool(p.heavy_fraction.clamp(0.0, 1.0));
            let (source, class) = if heavy { (format!("c{d}_{k}"), QueryClass::Heavy) } else { (format!("s{d}_{k}"), QueryClass::OneTransformation) };
            let sym = crate::symbol::Symbol::intern(&source);
            let ys: BTreeSet<Term> = kb.facts().iter().filter(|f| f.predicate == sym).map(|f| f.args[1]).collect();
            let Some(y) = ys.iter().collect::<Vec<_>>().choose(rng).map(|t| **t) else { continue };
            let clause = Clause(vec![Literal { predicate: crate::symbol::Symbol::intern(&format!("g{k}")), args: vec![Term::var("x"), y], positive: true }]);
            if !used.insert(clause.to_string()) {
                continue;
            }
            let answers = oracle.answers(&kb, &clause).len();
            out.push(QuerySpec { id: format!("{prefix}{:03}", out.len()), test_set: set, class, answers, clause });
        }
        out
    };
    let mut queries = Vec::new();
    for t in 1..=p.test_sets {
        let ds: Vec<usize> = (0..p.domains).filter(|d| d % p.test_sets == t - 1).collect();
        if ds.is_empty() {
            continue;
        }
        queries.extend(make(t as u32, &ds, p.queries_per_test_set, &format!("q{t}-"), &mut rng));
    }
    let all: Vec<usize> = (0..p.domains).collect();
    let training = if all.is_empty() { Vec::new() } else { make(0, &all, p.training_queries, "train-", &mut rng) };
    SyntheticCorpus { kb, queries, training }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomKbParams {
    pub predicates: usize,
    pub constants: usize,
    pub facts: usize,
    pub rules: usize,
    pub transitive: usize,
    pub queries: usize,
    pub seed: u64,
}

impl Default for RandomKbParams {
    fn default() -> Self {
        RandomKbParams { predicates: 8, constants: 8, facts: 120, rules: 20, transitive: 2, queries: 20, seed: 0 }
    }
}

/// A random KB whose rules only derive higher-numbered predicates from
/// lower-numbered ones, some binary predicates declared transitive, and
/// random queries (positive literals, sometimes with a trailing negation).
/// The first query literal always names a constant.
pub fn random_acyclic_kb(p: &RandomKbParams) -> (KnowledgeBase, Vec<QuerySpec>) {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let n_pred = p.predicates.max(2);
    let arity: Vec<usize> = (0..n_pred).map(|i| if i < 2 { 2 } else { rng.gen_range(1..=3) }).collect();
    let pred = |i: usize| format!("p{i}");
    let consts: Vec<String> = (0..p.constants.max(1)).map(|i| format!("k{i}")).collect();
    let mut b = KbBuilder::new();
    for (i, n) in arity.iter().enumerate() {
        b.arity(&pred(i), *n);
    }
    for _ in 0..p.facts {
        let i = rng.gen_range(0..n_pred);
        let args: Vec<&str> = (0..arity[i]).map(|_| consts.choose(&mut rng).unwrap().as_str()).collect();
        b.fact(lit(&pred(i), &args));
    }
    let vars = ["?a", "?b", "?c"];
    let mut ids = Ids { used: BTreeSet::new() };
    for _ in 0..p.rules {
        let head = rng.gen_range(1..n_pred);
        let body_len = rng.gen_range(1..=2);
        let mut ante = Vec::new();
        let mut bound: BTreeSet<&str> = BTreeSet::new();
        for _ in 0..body_len {
            let i = rng.gen_range(0..head);
            let args: Vec<&str> = (0..arity[i])
                .map(|_| if rng.gen_bool(0.15) { consts.choose(&mut rng).unwrap().as_str() } else { *vars.choose(&mut rng).unwrap() })
                .collect();
            bound.extend(args.iter().filter(|a| a.starts_with('?')));
            ante.push(lit(&pred(i), &args));
        }
        let bound: Vec<&str> = bound.into_iter().collect();
        let args: Vec<&str> = (0..arity[head])
            .map(|_| if bound.is_empty() || rng.gen_bool(0.1) { consts.choose(&mut rng).unwrap().as_str() } else { *bound.choose(&mut rng).unwrap() })
            .collect();
        rule(&mut b, &mut ids, &mut rng, ante, lit(&pred(head), &args));
    }
    let binary: Vec<usize> = (0..n_pred).filter(|i| arity[*i] == 2).collect();
    for i in binary.choose_multiple(&mut rng, p.transitive) {
        b.transitive(&pred(*i), rng.gen_range(1..=2));
    }
    let kb = b.build().expect("random KB is well formed");
    let oracle = BottomUp::new(&kb);
    let qvars = ["?x", "?y", "?z"];
    let mut queries = Vec::new();
    for qi in 0..p.queries {
        let mut lits = Vec::new();
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for li in 0..rng.gen_range(1..=2) {
            let i = rng.gen_range(0..n_pred);
            let mut args: Vec<&str> = (0..arity[i])
                .map(|_| if rng.gen_bool(0.3) { consts.choose(&mut rng).unwrap().as_str() } else { *qvars.choose(&mut rng).unwrap() })
                .collect();
            // the first literal always mentions a constant
            if li == 0 && args.iter().all(|a| a.starts_with('?')) {
                let at = rng.gen_range(0..args.len());
                args[at] = consts.choose(&mut rng).unwrap().as_str();
            }
            seen.extend(args.iter().filter(|a| a.starts_with('?')));
            lits.push(lit(&pred(i), &args));
        }
        let seen: Vec<&str> = seen.into_iter().collect();
        if !seen.is_empty() && rng.gen_bool(0.2) {
            let i = rng.gen_range(0..n_pred);
            let args: Vec<&str> = (0..arity[i]).map(|_| *seen.choose(&mut rng).unwrap()).collect();
            lits.push(lit(&pred(i), &args).negated());
        }
        let clause = Clause(lits);
        let answers = oracle.answers(&kb, &clause).len();
        queries.push(QuerySpec { id: format!("rq{qi:03}"), test_set: 0, class: QueryClass::Other, answers, clause });
    }
    (kb, queries)
}
