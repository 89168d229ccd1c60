//! `kbsearch` command-line driver.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use kbsearch::dtree::{TrainingBudget, TreeSet, DEFAULT_STOP_FRACTION};
use kbsearch::features::{FeatureConfig, DEFAULT_MASK, FEATURE_NAMES, NUM_FEATURES};
use kbsearch::harness::{
    collect_dataset, gen_synthetic_kb, modules_for, parse_suite, run_benchmark, success_stats, train_all_trees, write_suite,
    Mode, Models, SyntheticParams, Weights,
};
use kbsearch::regression::{cross_validate, fit_ols, subset_select, CvScheme, Dataset, RegressionModel, SelectionMethod};
use kbsearch::search::{answer_query, SearchConfig};
use kbsearch::sexpr::parse_clause;
use kbsearch::{load_kb_file, KnowledgeBase};

#[derive(Parser)]
#[command(name = "kbsearch", version, about = "Backward-chaining search with learned node ordering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Search limits shared by every command that runs queries.
#[derive(Args, Clone)]
struct Limits {
    /// Per-query wall-clock cutoff; 0 disables it
    #[arg(long, default_value_t = 5.0)]
    cutoff_secs: f64,
    #[arg(long, default_value_t = 50_000)]
    max_nodes: usize,
    #[arg(long, default_value_t = 25)]
    max_depth: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Limits {
    fn config(&self, max_answers: Option<usize>) -> SearchConfig {
        SearchConfig {
            cutoff: (self.cutoff_secs > 0.0).then(|| Duration::from_secs_f64(self.cutoff_secs)),
            max_nodes: Some(self.max_nodes),
            max_depth: Some(self.max_depth),
            max_answers,
            probe_seed: self.seed,
        }
    }

    fn features(&self) -> FeatureConfig {
        FeatureConfig { probe_seed: self.seed, max_depth: Some(self.max_depth), ..FeatureConfig::default() }
    }
}

/// Learned models and weights for the net score.
#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long)]
    trees: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = Weights::default().w0)]
    w0: f64,
    #[arg(long, default_value_t = Weights::default().w1)]
    w1: f64,
    #[arg(long, default_value_t = Weights::default().w2)]
    w2: f64,
}

impl ModelArgs {
    fn load(&self) -> Result<Models> {
        let trees = match &self.trees {
            Some(p) => Some(Arc::new(TreeSet::parse(open(p)?).with_context(|| format!("reading {}", p.display()))?)),
            None => None,
        };
        let model = match &self.model {
            Some(p) => Some(Arc::new(RegressionModel::parse(open(p)?).with_context(|| format!("reading {}", p.display()))?)),
            None => None,
        };
        Ok(Models { trees, model })
    }

    fn weights(&self) -> Weights {
        Weights { w0: self.w0, w1: self.w1, w2: self.w2 }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Forward,
    Backward,
    Exhaustive,
}

#[derive(Clone, Copy, ValueEnum)]
enum Cv {
    Subsample,
    TenFold,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic multi-domain KB with test and training suites
    GenKb {
        /// Output directory for kb.txt, queries.txt and training.txt
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        domains: usize,
        #[arg(long, default_value_t = 6)]
        concepts: usize,
        #[arg(long, default_value_t = 2)]
        taxonomy_depth: usize,
        /// Individuals per concept; a quarter of them can be query constants
        #[arg(long, default_value_t = 16)]
        individuals: usize,
        #[arg(long, default_value_t = 32)]
        facts_per_predicate: usize,
        #[arg(long, default_value_t = 3)]
        relevant_rules: usize,
        #[arg(long, default_value_t = 50)]
        distractor_rules: usize,
        #[arg(long, default_value_t = 100)]
        queries_per_set: usize,
        #[arg(long, default_value_t = 40)]
        training_queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train one decision tree per rule
    TrainTrees {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_STOP_FRACTION)]
        stop_fraction: f64,
        #[arg(long, default_value_t = 1.0)]
        rule_cutoff_secs: f64,
        #[arg(long, default_value_t = 2000)]
        max_tuples: usize,
        #[arg(long, default_value_t = 4)]
        threads: usize,
    },
    /// Run queries and sample search nodes into a dataset CSV
    Collect {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.4)]
        sample_rate: f64,
        #[arg(long, default_value_t = 4)]
        threads: usize,
        #[command(flatten)]
        limits: Limits,
    },
    /// Fit the answerability model and report cross-validated RMSE
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated 1-based features; defaults to the deployed mask
        #[arg(long, value_delimiter = ',')]
        mask: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Cv::Subsample)]
        cv: Cv,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Choose a feature subset of size k
    Select {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Method::Forward)]
        method: Method,
        /// Comma-separated candidates; defaults to all 45 predictors
        #[arg(long, value_delimiter = ',')]
        candidates: Vec<usize>,
    },
    /// Answer one query and print answers and statistics
    Query {
        #[arg(long)]
        kb: PathBuf,
        /// The query clause, e.g. "(and (p ?x) (q ?x))"
        query: String,
        #[arg(long, default_value = "baseline")]
        mode: Mode,
        #[arg(long)]
        max_answers: Option<usize>,
        /// Also print the search graph
        #[arg(long)]
        dump: bool,
        #[command(flatten)]
        models: ModelArgs,
        #[command(flatten)]
        limits: Limits,
    },
    /// Run the four-mode benchmark
    Bench {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        /// Report stem: writes STEM.csv, STEM.txt and STEM.timing.csv
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "baseline,dt,sl,dt+sl")]
        modes: Vec<Mode>,
        /// Stop each query at this many answers; 0 runs to exhaustion
        #[arg(long, default_value_t = 1)]
        max_answers: usize,
        #[command(flatten)]
        models: ModelArgs,
        #[command(flatten)]
        limits: Limits,
    },
    /// Success rates by depth, literal count and link id
    Stats {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        bucket_width: u32,
        #[arg(long, default_value_t = 4)]
        threads: usize,
        #[command(flatten)]
        limits: Limits,
    },
}

fn open(p: &Path) -> Result<fs::File> {
    fs::File::open(p).with_context(|| format!("opening {}", p.display()))
}

fn write(p: &Path, text: &str) -> Result<()> {
    fs::write(p, text).with_context(|| format!("writing {}", p.display()))
}

fn kb(p: &Path) -> Result<KnowledgeBase> {
    load_kb_file(p).with_context(|| format!("loading {}", p.display()))
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

fn baseline_modules(limits: &Limits) -> Result<Vec<kbsearch::HeuristicModule>> {
    Ok(modules_for(Mode::Baseline, Weights::default(), &Models::default(), limits.features())?)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::GenKb {
            out,
            domains,
            concepts,
            taxonomy_depth,
            individuals,
            facts_per_predicate,
            relevant_rules,
            distractor_rules,
            queries_per_set,
            training_queries,
            seed,
        } => {
            if domains == 0 || concepts == 0 || relevant_rules == 0 {
                bail!("domains, concepts and relevant rules must be positive");
            }
            if individuals < 4 {
                bail!("need at least 4 individuals per concept");
            }
            let params = SyntheticParams {
                domains,
                concepts_per_domain: concepts,
                taxonomy_depth,
                individuals_per_concept: individuals,
                facts_per_predicate,
                relevant_rules_per_domain: relevant_rules,
                distractor_rules_per_domain: distractor_rules,
                queries_per_test_set: queries_per_set,
                training_queries,
                seed,
                ..SyntheticParams::default()
            };
            let corpus = gen_synthetic_kb(&params);
            fs::create_dir_all(&out)?;
            write(&out.join("kb.txt"), &corpus.kb.to_text())?;
            write(&out.join("queries.txt"), &write_suite(&corpus.queries))?;
            write(&out.join("training.txt"), &write_suite(&corpus.training))?;
            let wanted = queries_per_set * params.test_sets.min(domains);
            if corpus.queries.len() < wanted || corpus.training.len() < training_queries {
                eprintln!("warning: ran out of distinct queries; raise --individuals or --facts-per-predicate for more");
            }
            println!(
                "{} facts, {} rules, {} test queries, {} training queries",
                corpus.kb.facts().len(),
                corpus.kb.rules().len(),
                corpus.queries.len(),
                corpus.training.len()
            );
        }
        Command::TrainTrees { kb: kb_path, out, stop_fraction, rule_cutoff_secs, max_tuples, threads } => {
            if !(stop_fraction > 0.0 && stop_fraction < 1.0) {
                bail!("--stop-fraction must lie strictly between 0 and 1");
            }
            let kb = kb(&kb_path)?;
            let budget = TrainingBudget {
                cutoff: Some(Duration::from_secs_f64(rule_cutoff_secs)),
                max_tuples: Some(max_tuples),
                ..TrainingBudget::default()
            };
            let (trees, report) = train_all_trees(&kb, &budget, stop_fraction, threads);
            write(&out, &trees.to_text())?;
            println!("trained {} of {} rules ({:.1}%)", report.trained, report.rules, 100.0 * report.coverage());
            for (rule, n) in report.tuples.iter().filter(|(r, _)| trees.get(**r).is_none()) {
                println!("untrained {rule} ({n} tuples)");
            }
        }
        Command::Collect { kb: kb_path, queries, out, sample_rate, threads, limits } => {
            if !(sample_rate > 0.0 && sample_rate <= 1.0) {
                bail!("--sample-rate must lie in (0, 1]");
            }
            let kb = kb(&kb_path)?;
            let suite = parse_suite(open(&queries)?)?;
            let modules = baseline_modules(&limits)?;
            let res = collect_dataset(&kb, &suite, &limits.config(None), &modules, &limits.features(), sample_rate, limits.seed, threads, false);
            res.dataset.write_csv(fs::File::create(&out)?)?;
            println!("{} rows from {} queries", res.dataset.len(), suite.len());
        }
        Command::Fit { data, out, mask, cv, seed } => {
            let data = Dataset::read_csv(open(&data)?)?;
            let mask = if mask.is_empty() { DEFAULT_MASK.to_vec() } else { mask };
            let model = fit_ols(&data, &mask)?;
            write(&out, &model.to_text())?;
            let scheme = match cv {
                Cv::Subsample => CvScheme::subsample(),
                Cv::TenFold => CvScheme::ten_fold(),
            };
            let d = &model.diagnostics;
            println!("rows={} rmse={:.4} r2={:.4} adj_r2={:.4}", data.len(), d.rmse, d.r2, d.adj_r2);
            match cross_validate(&data, scheme, &mask, seed) {
                Ok(r) => println!("cv_rmse={:.4} folds={}", r.mean_rmse, r.fold_rmses.len()),
                Err(e) => println!("cross-validation skipped: {e}"),
            }
            if model.ridge {
                println!("note: normal equations were singular; a small ridge term was added");
            }
        }
        Command::Select { data, k, method, candidates } => {
            let data = Dataset::read_csv(open(&data)?)?;
            let candidates = if candidates.is_empty() { (1..NUM_FEATURES).collect() } else { candidates };
            let method = match method {
                Method::Forward => SelectionMethod::Forward,
                Method::Backward => SelectionMethod::Backward,
                Method::Exhaustive => SelectionMethod::Exhaustive,
            };
            let sel = subset_select(&data, &candidates, k, method)?;
            for f in &sel.mask {
                println!("{f} {}", FEATURE_NAMES[f - 1]);
            }
            for (size, r2) in &sel.r2_by_size {
                println!("size={size} r2={r2:.4}");
            }
        }
        Command::Query { kb: kb_path, query, mode, max_answers, dump, models, limits } => {
            let kb = kb(&kb_path)?;
            let clause = parse_clause(&query).map_err(|e| anyhow::anyhow!("bad query: {}", e.message))?;
            let modules = modules_for(mode, models.weights(), &models.load()?, limits.features())?;
            let result = answer_query(&kb, &clause, &limits.config(max_answers), &modules)?;
            for a in &result.answers {
                println!("{a}");
            }
            print!("{}", result.stats.to_records());
            if dump {
                print!("{}", result.graph.dump());
            }
        }
        Command::Bench { kb: kb_path, queries, out, modes, max_answers, models, limits } => {
            let kb = kb(&kb_path)?;
            let suite = parse_suite(open(&queries)?)?;
            let config = limits.config((max_answers > 0).then_some(max_answers));
            let report = run_benchmark(&kb, &suite, &modes, &config, &models.load()?, models.weights(), limits.features())?;
            write(&with_ext(&out, ".csv"), &report.to_csv())?;
            write(&with_ext(&out, ".txt"), &report.to_text())?;
            write(&with_ext(&out, ".timing.csv"), &report.timing_csv())?;
            print!("{}", report.to_text());
        }
        Command::Stats { kb: kb_path, queries, out, bucket_width, threads, limits } => {
            let kb = kb(&kb_path)?;
            let suite = parse_suite(open(&queries)?)?;
            let modules = baseline_modules(&limits)?;
            let res = collect_dataset(&kb, &suite, &limits.config(None), &modules, &limits.features(), 0.0, limits.seed, threads, true);
            let stats = success_stats(res.graphs.iter().map(|(_, g)| g), bucket_width);
            let text = stats.to_text();
            match out {
                Some(p) => write(&p, &text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}
