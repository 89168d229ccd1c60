//! Runs queries and samples search nodes into a regression dataset.

use std::thread;

use rand::seq::IteratorRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::QuerySpec;
use crate::features::{extract_features, FeatureConfig, TARGET};
use crate::kb::KnowledgeBase;
use crate::regression::{Dataset, Provenance};
use crate::search::{answer_query, HeuristicModule, SearchConfig, SearchGraph, SearchStats};

#[derive(Clone, Debug, Default)]
pub struct CollectOutput {
    pub dataset: Dataset,
    /// Final search graph per query, when requested.
    pub graphs: Vec<(String, SearchGraph)>,
    pub stats: Vec<(String, SearchStats)>,
}

/// Answers every query, then reservoir-samples `round(sample_rate * n)` of
/// the `n` non-answer nodes of the final graph. A kept node's row holds its
/// features and its answer count below as the target. Sampling is seeded
/// per query, so the output is independent of `threads`.
#[allow(clippy::too_many_arguments)]
pub fn collect_dataset(
    kb: &KnowledgeBase,
    queries: &[QuerySpec],
    config: &SearchConfig,
    modules: &[HeuristicModule],
    features: &FeatureConfig,
    sample_rate: f64,
    seed: u64,
    threads: usize,
    keep_graphs: bool,
) -> CollectOutput {
    let rate = sample_rate.clamp(0.0, 1.0);
    let threads = threads.max(1).min(queries.len().max(1));
    let chunk = queries.len().div_ceil(threads).max(1);
    type Part = (Dataset, Option<(String, SearchGraph)>, Option<(String, SearchStats)>);
    let parts: Vec<Part> = thread::scope(|s| {
        let handles: Vec<_> = queries
            .chunks(chunk)
            .enumerate()
            .map(|(ci, part)| {
                s.spawn(move || {
                    part.iter()
                        .enumerate()
                        .map(|(i, q)| {
                            let qi = (ci * chunk + i) as u64;
                            let Ok(result) = answer_query(kb, &q.clause, config, modules) else {
                                return (Dataset::default(), None, None);
                            };
                            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ qi.wrapping_mul(0x9E37_79B9_7F4A_7C15));
                            let graph = &result.graph;
                            let mut data = Dataset::default();
                            let eligible: Vec<_> = graph.nodes().iter().filter(|n| !n.is_answer()).collect();
                            let k = (rate * eligible.len() as f64).round() as usize;
                            let mut picked = eligible.into_iter().choose_multiple(&mut rng, k);
                            picked.sort_by_key(|n| n.id);
                            for node in picked {
                                let mut fv = extract_features(graph, node.id, kb, features);
                                fv.set(TARGET, Some(node.answers_below as f64));
                                data.push(fv, Provenance { query: q.id.clone(), node: node.id.0 });
                            }
                            let stats = Some((q.id.clone(), result.stats.clone()));
                            (data, keep_graphs.then(|| (q.id.clone(), result.graph)), stats)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("collect worker panicked")).collect()
    });
    let mut out = CollectOutput::default();
    for (data, graph, stats) in parts {
        out.dataset.rows.extend(data.rows);
        out.dataset.provenance.extend(data.provenance);
        out.graphs.extend(graph);
        out.stats.extend(stats);
    }
    out
}
