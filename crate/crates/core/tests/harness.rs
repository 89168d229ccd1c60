//! Harness pipelines: corpus generation, dataset collection, benchmarking.

use std::sync::Arc;

use kbsearch::dtree::{TrainingBudget, DEFAULT_STOP_FRACTION};
use kbsearch::features::{FeatureConfig, DEFAULT_MASK};
use kbsearch::harness::{
    collect_dataset, gen_synthetic_kb, parse_suite, run_benchmark, train_all_trees, write_suite, Mode, Models, SyntheticParams, Weights,
};
use kbsearch::regression::fit_ols;
use kbsearch::search::{DepthScorer, SearchConfig};
use kbsearch::HeuristicModule;

fn small() -> SyntheticParams {
    SyntheticParams { distractor_rules_per_domain: 6, queries_per_test_set: 4, training_queries: 6, seed: 11, ..SyntheticParams::default() }
}

#[test]
fn corpus_and_suite_round_trip() {
    let a = gen_synthetic_kb(&small());
    let b = gen_synthetic_kb(&small());
    assert_eq!(a.kb.to_text(), b.kb.to_text());
    let text = write_suite(&a.queries);
    assert_eq!(parse_suite(text.as_bytes()).unwrap(), a.queries);
    let sets: Vec<u32> = a.queries.iter().map(|q| q.test_set).collect();
    assert!((1..=3).all(|t| sets.contains(&t)));
}

#[test]
fn collection_keeps_the_requested_share_of_nodes() {
    let c = gen_synthetic_kb(&small());
    let m = [HeuristicModule::new(1.0, DepthScorer)];
    let cfg = SearchConfig { max_answers: None, ..SearchConfig::default() };
    let out = collect_dataset(&c.kb, &c.training, &cfg, &m, &FeatureConfig::default(), 0.4, 5, 2, true);
    let expected: usize =
        out.graphs.iter().map(|(_, g)| (0.4 * g.nodes().iter().filter(|n| !n.is_answer()).count() as f64).round() as usize).sum();
    assert_eq!(out.dataset.len(), expected);
    for (row, prov) in out.dataset.rows.iter().zip(&out.dataset.provenance) {
        let g = &out.graphs.iter().find(|(q, _)| *q == prov.query).unwrap().1;
        let node = &g.nodes()[prov.node as usize];
        assert_eq!(row.get(kbsearch::features::TARGET), Some(node.answers_below as f64));
    }
    let again = collect_dataset(&c.kb, &c.training, &cfg, &m, &FeatureConfig::default(), 0.4, 5, 3, false);
    assert_eq!(again.dataset, out.dataset);
}

#[test]
fn benchmark_table_is_reproducible() {
    let c = gen_synthetic_kb(&small());
    let (trees, _) = train_all_trees(&c.kb, &TrainingBudget::default(), DEFAULT_STOP_FRACTION, 2);
    let m = [HeuristicModule::new(1.0, DepthScorer)];
    let cfg = SearchConfig { max_answers: None, ..SearchConfig::default() };
    let data = collect_dataset(&c.kb, &c.training, &cfg, &m, &FeatureConfig::default(), 0.4, 1, 2, false).dataset;
    let models = Models { trees: Some(Arc::new(trees)), model: Some(Arc::new(fit_ols(&data, &DEFAULT_MASK).unwrap())) };
    let bench = SearchConfig { max_answers: Some(1), cutoff: None, ..SearchConfig::default() };
    let run = || run_benchmark(&c.kb, &c.queries, &Mode::ALL, &bench, &models, Weights::default(), FeatureConfig::default()).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.to_csv(), b.to_csv());
    // one row per (set, mode) plus the all-sets rows
    assert_eq!(a.rows.len(), 4 * 4);
    let all = a.row(None, Mode::Baseline).unwrap();
    assert_eq!(all.queries, c.queries.len());
    assert_eq!(all.speedup(), 1.0);
    assert!(a.to_text().lines().count() == 17);
}

#[test]
fn modes_need_their_models() {
    let none = Models::default();
    assert!(kbsearch::harness::modules_for(Mode::Dt, Weights::default(), &none, FeatureConfig::default()).is_err());
    assert!(kbsearch::harness::modules_for(Mode::Baseline, Weights::default(), &none, FeatureConfig::default()).is_ok());
}
