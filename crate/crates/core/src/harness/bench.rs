//! The four-mode ablation benchmark.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::time::Duration;

use super::{modules_for, HarnessError, Mode, Models, QuerySpec, Weights};
use crate::features::FeatureConfig;
use crate::kb::KnowledgeBase;
use crate::search::{answer_query, SearchConfig, StopReason};

/// One query under one mode.
#[derive(Clone, Debug)]
pub struct QueryRun {
    pub query: String,
    pub test_set: u32,
    pub mode: Mode,
    pub answers: usize,
    pub nodes_expanded: usize,
    pub nodes_created: usize,
    pub time: Duration,
    pub stop: StopReason,
}

impl QueryRun {
    pub fn answered(&self) -> bool {
        self.answers > 0
    }
}

/// One (test set, mode) row. `test_set` is `None` for the all-sets total.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkRow {
    pub test_set: Option<u32>,
    pub mode: Mode,
    pub queries: usize,
    pub answered: usize,
    pub total_time: Duration,
    pub nodes_expanded: usize,
    /// Per-query wall time percentiles (50th, 90th).
    pub p50: Duration,
    pub p90: Duration,
    pub baseline_answered: usize,
    pub baseline_time: Duration,
}

impl BenchmarkRow {
    pub fn pct_answered(&self) -> f64 {
        if self.queries == 0 {
            0.0
        } else {
            100.0 * self.answered as f64 / self.queries as f64
        }
    }

    /// Percentage gain in queries answered over the baseline.
    pub fn qa_improvement(&self) -> f64 {
        if self.baseline_answered == 0 {
            if self.answered == 0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.answered as f64 - self.baseline_answered as f64) / self.baseline_answered as f64 * 100.0
        }
    }

    /// Baseline time over this mode's time.
    pub fn speedup(&self) -> f64 {
        if self.mode == Mode::Baseline {
            return 1.0;
        }
        self.baseline_time.as_secs_f64() / self.total_time.as_secs_f64()
    }

    fn set_label(&self) -> String {
        self.test_set.map_or_else(|| "all".to_string(), |t| t.to_string())
    }
}

#[derive(Clone, Debug, Default)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
    pub runs: Vec<QueryRun>,
}

fn percentile(sorted: &[Duration], q: f64) -> Duration {
    if sorted.is_empty() {
        return Duration::ZERO;
    }
    let i = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[i]
}

impl BenchmarkReport {
    fn from_runs(runs: Vec<QueryRun>, modes: &[Mode]) -> BenchmarkReport {
        let mut groups: BTreeMap<(Option<u32>, Mode), Vec<&QueryRun>> = BTreeMap::new();
        for r in &runs {
            groups.entry((Some(r.test_set), r.mode)).or_default().push(r);
            groups.entry((None, r.mode)).or_default().push(r);
        }
        let mut rows = Vec::new();
        let mut sets: Vec<Option<u32>> = runs.iter().map(|r| Some(r.test_set)).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        sets.push(None);
        for set in sets {
            let base = groups.get(&(set, Mode::Baseline));
            let base_answered = base.map_or(0, |b| b.iter().filter(|r| r.answered()).count());
            let base_time = base.map_or(Duration::ZERO, |b| b.iter().map(|r| r.time).sum());
            for &mode in modes {
                let Some(g) = groups.get(&(set, mode)) else { continue };
                let mut times: Vec<Duration> = g.iter().map(|r| r.time).collect();
                times.sort();
                rows.push(BenchmarkRow {
                    test_set: set,
                    mode,
                    queries: g.len(),
                    answered: g.iter().filter(|r| r.answered()).count(),
                    total_time: times.iter().sum(),
                    nodes_expanded: g.iter().map(|r| r.nodes_expanded).sum(),
                    p50: percentile(&times, 0.5),
                    p90: percentile(&times, 0.9),
                    baseline_answered: base_answered,
                    baseline_time: base_time,
                });
            }
        }
        BenchmarkReport { rows, runs }
    }

    pub fn row(&self, test_set: Option<u32>, mode: Mode) -> Option<&BenchmarkRow> {
        self.rows.iter().find(|r| r.test_set == test_set && r.mode == mode)
    }

    /// Runs of `mode`, in query order.
    pub fn runs_of(&self, mode: Mode) -> impl Iterator<Item = &QueryRun> {
        self.runs.iter().filter(move |r| r.mode == mode)
    }

    /// Aligned table with every column, timing included.
    pub fn to_text(&self) -> String {
        let header = ["set", "mode", "queries", "answered%", "Q/A impr%", "time(s)", "speedup", "nodes", "p50(ms)", "p90(ms)"];
        let body: Vec<[String; 10]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.set_label(),
                    r.mode.to_string(),
                    r.queries.to_string(),
                    format!("{:.2}", r.pct_answered()),
                    format!("{:.2}", r.qa_improvement()),
                    format!("{:.3}", r.total_time.as_secs_f64()),
                    format!("{:.2}", r.speedup()),
                    r.nodes_expanded.to_string(),
                    format!("{:.2}", r.p50.as_secs_f64() * 1e3),
                    format!("{:.2}", r.p90.as_secs_f64() * 1e3),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &body {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut s = String::new();
        let line = |s: &mut String, cells: &[&str]| {
            let parts: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:>w$}")).collect();
            let _ = writeln!(s, "{}", parts.join("  ").trim_end());
        };
        line(&mut s, &header);
        for row in &body {
            let cells: Vec<&str> = row.iter().map(String::as_str).collect();
            line(&mut s, &cells);
        }
        s
    }

    /// Every column that does not depend on wall time.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("test_set,mode,queries,answered,pct_answered,qa_improvement_pct,nodes_expanded\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{:.2},{:.2},{}",
                r.set_label(),
                r.mode,
                r.queries,
                r.answered,
                r.pct_answered(),
                r.qa_improvement(),
                r.nodes_expanded
            );
        }
        s
    }

    /// Wall-time columns.
    pub fn timing_csv(&self) -> String {
        let mut s = String::from("test_set,mode,total_time_secs,speedup,p50_secs,p90_secs\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:.6},{:.2},{:.6},{:.6}",
                r.set_label(),
                r.mode,
                r.total_time.as_secs_f64(),
                r.speedup(),
                r.p50.as_secs_f64(),
                r.p90.as_secs_f64()
            );
        }
        s
    }
}

/// Runs every query under every mode with the same configuration, modes
/// interleaved per query.
pub fn run_benchmark(
    kb: &KnowledgeBase,
    queries: &[QuerySpec],
    modes: &[Mode],
    config: &SearchConfig,
    models: &Models,
    weights: Weights,
    features: FeatureConfig,
) -> Result<BenchmarkReport, HarnessError> {
    let modules: Vec<_> = modes.iter().map(|&m| modules_for(m, weights, models, features).map(|ms| (m, ms))).collect::<Result<_, _>>()?;
    let mut runs = Vec::with_capacity(queries.len() * modes.len());
    for q in queries {
        for (mode, ms) in &modules {
            let run = match answer_query(kb, &q.clause, config, ms) {
                Ok(r) => QueryRun {
                    query: q.id.clone(),
                    test_set: q.test_set,
                    mode: *mode,
                    answers: r.answers.len(),
                    nodes_expanded: r.stats.nodes_expanded,
                    nodes_created: r.stats.nodes_created,
                    time: r.stats.wall_time,
                    stop: r.stats.stop,
                },
                Err(_) => QueryRun {
                    query: q.id.clone(),
                    test_set: q.test_set,
                    mode: *mode,
                    answers: 0,
                    nodes_expanded: 0,
                    nodes_created: 0,
                    time: Duration::ZERO,
                    stop: StopReason::Exhausted,
                },
            };
            runs.push(run);
        }
    }
    Ok(BenchmarkReport::from_runs(runs, modes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(mode: Mode, answered: usize, secs: f64, base_answered: usize, base_secs: f64) -> BenchmarkRow {
        BenchmarkRow {
            test_set: Some(1),
            mode,
            queries: 10,
            answered,
            total_time: Duration::from_secs_f64(secs),
            nodes_expanded: 0,
            p50: Duration::ZERO,
            p90: Duration::ZERO,
            baseline_answered: base_answered,
            baseline_time: Duration::from_secs_f64(base_secs),
        }
    }

    #[test]
    fn column_arithmetic() {
        let r = row(Mode::DtSl, 8, 0.8, 5, 13.7);
        assert_eq!(format!("{:.1}", r.speedup()), "17.1");
        assert_eq!(format!("{:.2}", r.qa_improvement()), "60.00");
        let b = row(Mode::Baseline, 5, 13.7, 5, 13.7);
        assert_eq!((b.speedup(), b.qa_improvement()), (1.0, 0.0));
    }
}
