//! End-to-end answering against the bottom-up oracle.

use std::collections::BTreeSet;

use proptest::prelude::*;

use kbsearch::harness::{gen_synthetic_kb, random_acyclic_kb, RandomKbParams, SyntheticParams};
use kbsearch::search::{DepthScorer, StopReason};
use kbsearch::sexpr::parse_clause;
use kbsearch::{answer_query, load_kb, BottomUp, Clause, HeuristicModule, KnowledgeBase, SearchConfig, Substitution, Symbol};

fn tuples(q: &Clause, answers: &[Substitution]) -> BTreeSet<Vec<Symbol>> {
    answers.iter().map(|a| q.vars().iter().map(|v| a.get(*v).and_then(|t| t.as_const()).unwrap()).collect()).collect()
}

fn baseline() -> Vec<HeuristicModule> {
    vec![HeuristicModule::new(1.0, DepthScorer)]
}

fn chain_kb(n: usize) -> KnowledgeBase {
    let mut text = String::from("(transitive lt 2)\n");
    for i in 0..n {
        text += &format!("(fact (lt n{i} n{}))\n", i + 1);
    }
    load_kb(text.as_bytes()).unwrap()
}

#[test]
fn transitive_chain_yields_its_closure() {
    let n = 7;
    let kb = chain_kb(n);
    let q = parse_clause("(lt ?x ?y)").unwrap();
    let r = answer_query(&kb, &q, &SearchConfig::unbounded(), &baseline()).unwrap();
    let want: BTreeSet<Vec<Symbol>> = (0..=n)
        .flat_map(|i| (i + 1..=n).map(move |j| vec![Symbol::intern(&format!("n{i}")), Symbol::intern(&format!("n{j}"))]))
        .collect();
    assert_eq!(tuples(&q, &r.answers), want);
    assert_eq!(r.stats.stop, StopReason::Exhausted);
}

#[test]
fn answer_limit_stops_early() {
    let kb = chain_kb(6);
    let q = parse_clause("(lt n0 ?y)").unwrap();
    let config = SearchConfig { max_answers: Some(1), ..SearchConfig::unbounded() };
    let r = answer_query(&kb, &q, &config, &baseline()).unwrap();
    assert_eq!(r.answers.len(), 1);
}

#[test]
fn negation_fails_on_stored_facts() {
    let kb = load_kb("(fact (p a))\n(fact (p b))\n(fact (bad b))\n".as_bytes()).unwrap();
    let q = parse_clause("(and (p ?x) (not (bad ?x)))").unwrap();
    let r = answer_query(&kb, &q, &SearchConfig::unbounded(), &baseline()).unwrap();
    assert_eq!(tuples(&q, &r.answers), BTreeSet::from([vec![Symbol::intern("a")]]));
}

#[test]
fn single_domain_corpus_is_answered_by_plain_search() {
    let p = SyntheticParams { domains: 1, distractor_rules_per_domain: 0, test_sets: 1, queries_per_test_set: 15, training_queries: 0, ..SyntheticParams::default() };
    let c = gen_synthetic_kb(&p);
    assert_eq!(c.queries.len(), 15);
    for q in &c.queries {
        let r = answer_query(&c.kb, &q.clause, &SearchConfig::unbounded(), &baseline()).unwrap();
        assert_eq!(r.answers.len(), q.answers, "{}", q.clause);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn engine_agrees_with_bottom_up(seed in 0u64..10_000, facts in 10usize..80, rules in 1usize..12, transitive in 0usize..2) {
        let params = RandomKbParams { predicates: rules / 2 + 4, constants: 6, facts, rules, transitive, queries: 4, seed };
        let (kb, queries) = random_acyclic_kb(&params);
        let oracle = BottomUp::new(&kb);
        let config = SearchConfig { max_depth: None, ..SearchConfig::unbounded() };
        for q in &queries {
            let r = answer_query(&kb, &q.clause, &config, &baseline()).unwrap();
            prop_assert_eq!(tuples(&q.clause, &r.answers), oracle.answers(&kb, &q.clause));
        }
    }
}
