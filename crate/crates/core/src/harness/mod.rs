//! End-to-end pipelines: synthetic corpora, tree training, dataset
//! collection, the four-mode benchmark and success statistics.

mod bench;
mod collect;
pub mod fixtures;
mod generator;
mod stats;
mod training;

use std::fmt;
use std::io::Read;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::dtree::{DtScorer, TreeSet};
use crate::features::FeatureConfig;
use crate::regression::{RegressionModel, SlScorer};
use crate::search::{DepthScorer, HeuristicModule};
use crate::sexpr::{parse_all, to_clause};
use crate::term::Clause;

pub use bench::{run_benchmark, BenchmarkReport, BenchmarkRow, QueryRun};
pub use collect::{collect_dataset, CollectOutput};
pub use generator::{gen_synthetic_kb, random_acyclic_kb, RandomKbParams, SyntheticCorpus, SyntheticParams};
pub use stats::{success_stats, SuccessStats};
pub use training::{train_all_trees, TrainingReport};

/// Which learned modules contribute to the net score.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Mode {
    Baseline,
    Dt,
    Sl,
    DtSl,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Baseline, Mode::Dt, Mode::Sl, Mode::DtSl];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Dt => "dt",
            Mode::Sl => "sl",
            Mode::DtSl => "dt+sl",
        }
    }

    pub fn uses_trees(self) -> bool {
        matches!(self, Mode::Dt | Mode::DtSl)
    }

    pub fn uses_model(self) -> bool {
        matches!(self, Mode::Sl | Mode::DtSl)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Mode::Baseline),
            "dt" => Ok(Mode::Dt),
            "sl" => Ok(Mode::Sl),
            "dt+sl" => Ok(Mode::DtSl),
            other => Err(format!("unknown mode '{other}' (expected baseline, dt, sl or dt+sl)")),
        }
    }
}

/// w₀ scales the depth baseline, w₁ the tree score, w₂ the model score.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weights {
    pub w0: f64,
    pub w1: f64,
    pub w2: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { w0: 1.0, w1: 5.0, w2: 2.0 }
    }
}

/// Learned models available to a run.
#[derive(Clone, Debug, Default)]
pub struct Models {
    pub trees: Option<Arc<TreeSet>>,
    pub model: Option<Arc<RegressionModel>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HarnessError {
    #[error("mode {0} needs decision trees")]
    MissingTrees(Mode),
    #[error("mode {0} needs a regression model")]
    MissingModel(Mode),
    #[error("line {line}: {message}")]
    Suite { line: usize, message: String },
}

/// Heuristic modules for `mode`. Modules whose weight is zeroed by the
/// mode are left out entirely.
pub fn modules_for(mode: Mode, weights: Weights, models: &Models, features: FeatureConfig) -> Result<Vec<HeuristicModule>, HarnessError> {
    let mut out = vec![HeuristicModule::new(weights.w0, DepthScorer)];
    if mode.uses_trees() {
        let trees = models.trees.clone().ok_or(HarnessError::MissingTrees(mode))?;
        out.push(HeuristicModule::new(weights.w1, DtScorer { trees }));
    }
    if mode.uses_model() {
        let model = models.model.clone().ok_or(HarnessError::MissingModel(mode))?;
        out.push(HeuristicModule::new(weights.w2, SlScorer { model, config: features }));
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum QueryClass {
    OneTransformation,
    Heavy,
    Other,
}

impl QueryClass {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryClass::OneTransformation => "one",
            QueryClass::Heavy => "heavy",
            QueryClass::Other => "other",
        }
    }
}

impl FromStr for QueryClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "one" => Ok(QueryClass::OneTransformation),
            "heavy" => Ok(QueryClass::Heavy),
            "other" => Ok(QueryClass::Other),
            other => Err(format!("unknown query class '{other}'")),
        }
    }
}

/// One labeled query of a suite.
#[derive(Clone, Debug, PartialEq)]
pub struct QuerySpec {
    pub id: String,
    pub test_set: u32,
    pub class: QueryClass,
    /// Ground-truth answer count.
    pub answers: usize,
    pub clause: Clause,
}

impl QuerySpec {
    pub fn to_line(&self) -> String {
        format!("(query {} {} {} {} {})", self.id, self.test_set, self.class.as_str(), self.answers, self.clause)
    }
}

/// Serializes a suite, one `(query ID TESTSET CLASS ANSWERS CLAUSE)` per line.
pub fn write_suite(queries: &[QuerySpec]) -> String {
    queries.iter().map(|q| q.to_line() + "\n").collect()
}

pub fn parse_suite(mut input: impl Read) -> Result<Vec<QuerySpec>, HarnessError> {
    let mut text = String::new();
    input.read_to_string(&mut text).map_err(|e| HarnessError::Suite { line: 0, message: e.to_string() })?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| HarnessError::Suite { line, message };
        for s in parse_all(raw).map_err(|e| err(e.message))? {
            let items = s
                .list()
                .filter(|l| l.len() == 6 && s.head() == Some("query"))
                .ok_or_else(|| err(format!("expected (query ID TESTSET CLASS ANSWERS CLAUSE), found {s}")))?;
            let atom = |k: usize| items[k].atom().ok_or_else(|| err(format!("field {k} must be an atom")));
            out.push(QuerySpec {
                id: atom(1)?.to_string(),
                test_set: atom(2)?.parse().map_err(|_| err("bad test set".into()))?,
                class: atom(3)?.parse().map_err(err)?,
                answers: atom(4)?.parse().map_err(|_| err("bad answer count".into()))?,
                clause: to_clause(&items[5]).map_err(|e| err(e.message))?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::parse_clause;

    #[test]
    fn suite_round_trip() {
        let q = vec![
            QuerySpec { id: "q1".into(), test_set: 1, class: QueryClass::Heavy, answers: 3, clause: parse_clause("(g0 ?x e1)").unwrap() },
            QuerySpec {
                id: "q2".into(),
                test_set: 2,
                class: QueryClass::OneTransformation,
                answers: 0,
                clause: parse_clause("(and (p ?x) (not (q ?x)))").unwrap(),
            },
        ];
        let text = write_suite(&q);
        assert_eq!(parse_suite(text.as_bytes()).unwrap(), q);
        assert!(parse_suite("(query q1 1 heavy)".as_bytes()).is_err());
    }

    #[test]
    fn modes_parse_and_require_models() {
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
        }
        let none = Models::default();
        assert_eq!(modules_for(Mode::Baseline, Weights::default(), &none, FeatureConfig::default()).unwrap().len(), 1);
        assert_eq!(
            modules_for(Mode::Dt, Weights::default(), &none, FeatureConfig::default()).unwrap_err(),
            HarnessError::MissingTrees(Mode::Dt)
        );
    }
}
