//! Least-squares answerability model.
//!
//! Predictors are z-scored with statistics from the training rows only.
//! Missing cells are ignored when computing a column's mean and standard
//! deviation and become 0 after normalization. The target is
//! `log10(1 + answers)`.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::features::{
    extract_selected, with_dependencies, FeatureConfig, FeatureVector, FEATURE_NAMES, NUM_FEATURES, TARGET,
};
use crate::kb::KnowledgeBase;
use crate::search::{NodeId, NodeScorer, ScoringContext, SearchGraph};

/// Number of predictor columns (every feature but the target).
pub const NUM_PREDICTORS: usize = NUM_FEATURES - 1;

#[derive(Debug, Error)]
pub enum RegressionError {
    #[error("not enough rows: {0}")]
    InsufficientRows(String),
    #[error("k = {k} exceeds the {available} candidate predictors")]
    TooManyFeatures { k: usize, available: usize },
    #[error("exhaustive selection supports at most 20 candidates, got {0}")]
    TooManyCandidates(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Io(String),
}

pub fn transform_target(answers: f64) -> f64 {
    (1.0 + answers).log10()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub query: String,
    pub node: u32,
}

/// Sampled feature vectors with their targets.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub rows: Vec<FeatureVector>,
    pub provenance: Vec<Provenance>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: FeatureVector, provenance: Provenance) {
        assert!(row.get(TARGET).is_some(), "dataset rows need a target");
        self.rows.push(row);
        self.provenance.push(provenance);
    }

    /// Transformed targets.
    pub fn targets(&self) -> Vec<f64> {
        self.rows.iter().map(|r| transform_target(r.get(TARGET).unwrap_or(0.0))).collect()
    }

    fn predictors(&self) -> Vec<Vec<Option<f64>>> {
        self.rows.iter().map(|r| r.values()[..NUM_PREDICTORS].to_vec()).collect()
    }

    fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            provenance: idx.iter().map(|&i| self.provenance[i].clone()).collect(),
        }
    }

    /// CSV with the 46 feature columns followed by `query` and `node`.
    pub fn write_csv(&self, out: impl Write) -> Result<(), RegressionError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = FEATURE_NAMES.to_vec();
        header.extend(["query", "node"]);
        w.write_record(&header)?;
        for (r, p) in self.rows.iter().zip(&self.provenance) {
            let mut rec: Vec<String> = r.values().iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()).collect();
            rec.push(p.query.clone());
            rec.push(p.node.to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| RegressionError::Io(e.to_string()))?;
        Ok(())
    }

    /// Reads CSV written by [`Dataset::write_csv`]; the provenance
    /// columns are optional. Rows without a target are skipped.
    pub fn read_csv(input: impl Read) -> Result<Dataset, RegressionError> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        for (i, name) in FEATURE_NAMES.iter().enumerate() {
            if header.get(i) != Some(*name) {
                return Err(RegressionError::Parse { line: 1, message: format!("column {} must be {name}", i + 1) });
            }
        }
        let mut d = Dataset::default();
        for (ri, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = ri + 2;
            let mut values = [None; NUM_FEATURES];
            for (i, v) in values.iter_mut().enumerate() {
                let cell = rec.get(i).unwrap_or("");
                if !cell.is_empty() {
                    *v = Some(cell.parse().map_err(|_| RegressionError::Parse { line, message: format!("bad number {cell:?}") })?);
                }
            }
            if values[TARGET - 1].is_none() {
                continue;
            }
            let query = rec.get(NUM_FEATURES).unwrap_or("").to_string();
            let node = rec.get(NUM_FEATURES + 1).and_then(|s| s.parse().ok()).unwrap_or(0);
            d.push(FeatureVector::from_values(values), Provenance { query, node });
        }
        Ok(d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormalizationStats {
    /// Population mean and standard deviation of each column over its
    /// present cells.
    pub fn compute(rows: &[Vec<Option<f64>>]) -> NormalizationStats {
        let cols = rows.first().map_or(0, Vec::len);
        let mut mean = vec![0.0; cols];
        let mut std = vec![0.0; cols];
        for j in 0..cols {
            let present: Vec<f64> = rows.iter().filter_map(|r| r[j]).collect();
            if present.is_empty() {
                continue;
            }
            let m = present.iter().sum::<f64>() / present.len() as f64;
            let var = present.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / present.len() as f64;
            mean[j] = m;
            std[j] = var.sqrt();
        }
        NormalizationStats { mean, std }
    }

    pub fn apply_value(&self, j: usize, v: Option<f64>) -> f64 {
        match v {
            Some(x) if self.std[j] > 0.0 => (x - self.mean[j]) / self.std[j],
            _ => 0.0,
        }
    }

    pub fn apply(&self, row: &[Option<f64>]) -> Vec<f64> {
        row.iter().enumerate().map(|(j, v)| self.apply_value(j, *v)).collect()
    }
}

/// Z-scores every column.
pub fn normalize(rows: &[Vec<Option<f64>>]) -> (Vec<Vec<f64>>, NormalizationStats) {
    let stats = NormalizationStats::compute(rows);
    (rows.iter().map(|r| stats.apply(r)).collect(), stats)
}

pub fn rmse_of(predictions: &[f64], targets: &[f64]) -> f64 {
    if predictions.is_empty() {
        return 0.0;
    }
    let ss: f64 = predictions.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum();
    (ss / predictions.len() as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub rmse: f64,
    pub r2: f64,
    pub adj_r2: f64,
}

/// Weights of a least-squares solve over chosen columns.
#[derive(Clone, Debug, PartialEq)]
pub struct OlsSolution {
    pub intercept: f64,
    /// One weight per requested column.
    pub weights: Vec<f64>,
    pub ridge: bool,
}

/// Solves min ‖y − b − Xw‖² over the columns `cols` of `x`, with an
/// intercept. Normal equations are factored by Cholesky; a singular or
/// badly conditioned system gets a small ridge term. All-zero columns get
/// weight 0 and stay out of the system.
pub fn solve_ols(x: &[Vec<f64>], y: &[f64], cols: &[usize]) -> OlsSolution {
    let n = x.len();
    let active: Vec<usize> = cols.iter().copied().filter(|&j| x.iter().any(|r| r[j] != 0.0)).collect();
    let p = active.len() + 1;
    let design = DMatrix::from_fn(n, p, |i, k| if k == 0 { 1.0 } else { x[i][active[k - 1]] });
    let yv = DVector::from_column_slice(y);
    let xtx = design.transpose() * &design;
    let xty = design.transpose() * yv;
    let eig = xtx.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().copied().fold(0.0_f64, f64::max);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let singular = !(min > 1e-10 * max.max(f64::MIN_POSITIVE));
    let mut system = xtx;
    if singular {
        let lambda = 1e-8 * system.trace() / p as f64;
        for k in 0..p {
            system[(k, k)] += lambda;
        }
    }
    let w = match system.clone().cholesky() {
        Some(ch) => ch.solve(&xty),
        None => system.lu().solve(&xty).unwrap_or_else(|| DVector::zeros(p)),
    };
    let mut weights = vec![0.0; cols.len()];
    for (k, j) in active.iter().enumerate() {
        let pos = cols.iter().position(|c| c == j).expect("active column is requested");
        weights[pos] = w[k + 1];
    }
    OlsSolution { intercept: w[0], weights, ridge: singular }
}

/// A fitted model over the 45 predictors.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionModel {
    pub stats: NormalizationStats,
    pub weights: Vec<f64>,
    pub selected: Vec<bool>,
    pub intercept: f64,
    pub diagnostics: Diagnostics,
    pub ridge: bool,
}

impl RegressionModel {
    /// The model that predicts `intercept` everywhere.
    pub fn constant(intercept: f64) -> RegressionModel {
        RegressionModel {
            stats: NormalizationStats { mean: vec![0.0; NUM_PREDICTORS], std: vec![0.0; NUM_PREDICTORS] },
            weights: vec![0.0; NUM_PREDICTORS],
            selected: vec![false; NUM_PREDICTORS],
            intercept,
            diagnostics: Diagnostics { rmse: 0.0, r2: 0.0, adj_r2: 0.0 },
            ridge: false,
        }
    }

    /// Selected features, 1-based.
    pub fn selected_features(&self) -> Vec<usize> {
        (0..NUM_PREDICTORS).filter(|&j| self.selected[j]).map(|j| j + 1).collect()
    }

    pub fn predict(&self, fv: &FeatureVector) -> f64 {
        let mut s = self.intercept;
        for j in 0..NUM_PREDICTORS {
            if self.selected[j] && self.weights[j] != 0.0 {
                s += self.weights[j] * self.stats.apply_value(j, fv.get(j + 1));
            }
        }
        s
    }

    pub fn rmse(&self, data: &Dataset) -> f64 {
        let preds: Vec<f64> = data.rows.iter().map(|r| self.predict(r)).collect();
        rmse_of(&preds, &data.targets())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for j in 0..NUM_PREDICTORS {
            let _ = writeln!(
                s,
                "{} {} {} {} {}",
                FEATURE_NAMES[j],
                self.stats.mean[j],
                self.stats.std[j],
                self.weights[j],
                u8::from(self.selected[j])
            );
        }
        let _ = writeln!(s, "intercept {}", self.intercept);
        let d = self.diagnostics;
        let _ = writeln!(s, "diag {} {} {}", d.rmse, d.r2, d.adj_r2);
        if self.ridge {
            s.push_str("ridge 1\n");
        }
        s
    }

    pub fn parse(mut input: impl Read) -> Result<RegressionModel, RegressionError> {
        let mut text = String::new();
        input.read_to_string(&mut text).map_err(|e| RegressionError::Io(e.to_string()))?;
        let mut m = RegressionModel::constant(0.0);
        let mut seen = [false; NUM_PREDICTORS];
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| RegressionError::Parse { line, message };
            let parts: Vec<&str> = raw.split_whitespace().collect();
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number {s:?}")));
            match parts.as_slice() {
                [] => {}
                ["intercept", w] => m.intercept = num(w)?,
                ["diag", a, b, c] => m.diagnostics = Diagnostics { rmse: num(a)?, r2: num(b)?, adj_r2: num(c)? },
                ["ridge", f] => m.ridge = *f == "1",
                [name, mean, std, w, sel] => {
                    let j = FEATURE_NAMES[..NUM_PREDICTORS]
                        .iter()
                        .position(|n| n == name)
                        .ok_or_else(|| err(format!("unknown feature {name}")))?;
                    m.stats.mean[j] = num(mean)?;
                    m.stats.std[j] = num(std)?;
                    m.weights[j] = num(w)?;
                    m.selected[j] = match *sel {
                        "1" => true,
                        "0" => false,
                        other => return Err(err(format!("selected flag must be 0 or 1, found {other}"))),
                    };
                    seen[j] = true;
                }
                _ => return Err(err(format!("unrecognized line {raw:?}"))),
            }
        }
        if let Some(j) = seen.iter().position(|s| !s) {
            return Err(RegressionError::Parse { line: 0, message: format!("missing feature line {}", FEATURE_NAMES[j]) });
        }
        Ok(m)
    }
}

fn diagnostics(preds: &[f64], y: &[f64], predictors: usize) -> Diagnostics {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let ss_res: f64 = preds.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else if ss_res == 0.0 { 1.0 } else { 0.0 };
    let dof = n - predictors as f64 - 1.0;
    let adj_r2 = if dof > 0.0 { 1.0 - (1.0 - r2) * (n - 1.0) / dof } else { f64::NAN };
    Diagnostics { rmse: rmse_of(preds, y), r2, adj_r2 }
}

/// Fits on `data` using the features in `mask` (1-based predictor indices).
pub fn fit_ols(data: &Dataset, mask: &[usize]) -> Result<RegressionModel, RegressionError> {
    if data.len() < 2 {
        return Err(RegressionError::InsufficientRows(format!("{} row(s)", data.len())));
    }
    let (x, stats) = normalize(&data.predictors());
    let y = data.targets();
    let cols: Vec<usize> = mask.iter().map(|f| f - 1).collect();
    let sol = solve_ols(&x, &y, &cols);
    let mut weights = vec![0.0; NUM_PREDICTORS];
    let mut selected = vec![false; NUM_PREDICTORS];
    for (k, &j) in cols.iter().enumerate() {
        weights[j] = sol.weights[k];
        selected[j] = true;
    }
    let preds: Vec<f64> = x.iter().map(|r| sol.intercept + cols.iter().zip(&sol.weights).map(|(j, w)| w * r[*j]).sum::<f64>()).collect();
    let diagnostics = diagnostics(&preds, &y, cols.len());
    Ok(RegressionModel { stats, weights, selected, intercept: sol.intercept, diagnostics, ridge: sol.ridge })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CvScheme {
    RandomSubsample { fraction: f64, repeats: usize },
    KFold { k: usize },
}

impl CvScheme {
    pub fn subsample() -> Self {
        CvScheme::RandomSubsample { fraction: 0.9, repeats: 50 }
    }

    pub fn ten_fold() -> Self {
        CvScheme::KFold { k: 10 }
    }
}

/// Where held-out normalization statistics come from. Only
/// `TrainingSplit` is leakage-free; `FullDataset` exists to demonstrate the
/// difference.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatsSource {
    TrainingSplit,
    FullDataset,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvResult {
    pub mean_rmse: f64,
    pub fold_rmses: Vec<f64>,
    /// Held-out row indices of each fold.
    pub folds: Vec<Vec<usize>>,
}

/// Held-out index sets for a scheme.
pub fn cv_splits(n: usize, scheme: CvScheme, seed: u64) -> Result<Vec<Vec<usize>>, RegressionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match scheme {
        CvScheme::KFold { k } => {
            if k < 2 || n < 2 * k {
                return Err(RegressionError::InsufficientRows(format!("{n} rows for {k}-fold")));
            }
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let base = n / k;
            let extra = n % k;
            let mut folds = Vec::with_capacity(k);
            let mut start = 0;
            for f in 0..k {
                let size = base + usize::from(f < extra);
                let mut fold = idx[start..start + size].to_vec();
                fold.sort_unstable();
                folds.push(fold);
                start += size;
            }
            Ok(folds)
        }
        CvScheme::RandomSubsample { fraction, repeats } => {
            let train = ((n as f64) * fraction).round() as usize;
            if train < 2 || train >= n {
                return Err(RegressionError::InsufficientRows(format!("{n} rows for a {fraction} split")));
            }
            Ok((0..repeats)
                .map(|_| {
                    let mut idx: Vec<usize> = (0..n).collect();
                    idx.shuffle(&mut rng);
                    let mut test = idx[train..].to_vec();
                    test.sort_unstable();
                    test
                })
                .collect())
        }
    }
}

pub fn cross_validate(data: &Dataset, scheme: CvScheme, mask: &[usize], seed: u64) -> Result<CvResult, RegressionError> {
    cross_validate_with(data, scheme, mask, seed, StatsSource::TrainingSplit)
}

pub fn cross_validate_with(
    data: &Dataset,
    scheme: CvScheme,
    mask: &[usize],
    seed: u64,
    source: StatsSource,
) -> Result<CvResult, RegressionError> {
    let folds = cv_splits(data.len(), scheme, seed)?;
    let global = NormalizationStats::compute(&data.predictors());
    let mut fold_rmses = Vec::with_capacity(folds.len());
    for test in &folds {
        let mut held = vec![false; data.len()];
        for &i in test {
            held[i] = true;
        }
        let train_idx: Vec<usize> = (0..data.len()).filter(|i| !held[*i]).collect();
        let train = data.subset(&train_idx);
        let mut model = fit_ols(&train, mask)?;
        if source == StatsSource::FullDataset {
            // refit with global statistics
            let x: Vec<Vec<f64>> = train.predictors().iter().map(|r| global.apply(r)).collect();
            let cols: Vec<usize> = mask.iter().map(|f| f - 1).collect();
            let sol = solve_ols(&x, &train.targets(), &cols);
            model.stats = global.clone();
            model.intercept = sol.intercept;
            for (k, j) in cols.iter().enumerate() {
                model.weights[*j] = sol.weights[k];
            }
        }
        fold_rmses.push(model.rmse(&data.subset(test)));
    }
    let mean_rmse = fold_rmses.iter().sum::<f64>() / fold_rmses.len() as f64;
    Ok(CvResult { mean_rmse, fold_rmses, folds })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionMethod {
    Forward,
    Backward,
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    /// Chosen features, 1-based, ascending.
    pub mask: Vec<usize>,
    /// Best training R² found for each subset size visited.
    pub r2_by_size: Vec<(usize, f64)>,
}

struct Gram {
    g: DMatrix<f64>,
    gy: DVector<f64>,
    syy: f64,
}

impl Gram {
    fn new(x: &[Vec<f64>], y: &[f64], cand: &[usize]) -> Gram {
        let n = x.len();
        let ym = y.iter().sum::<f64>() / n as f64;
        let z = DMatrix::from_fn(n, cand.len(), |i, k| x[i][cand[k]]);
        // columns are mean-zero after normalization, so no intercept column
        let yc = DVector::from_iterator(n, y.iter().map(|v| v - ym));
        Gram { g: z.transpose() * &z, gy: z.transpose() * &yc, syy: yc.dot(&yc) }
    }

    /// Training R² using candidate positions `s`.
    fn r2(&self, s: &[usize]) -> f64 {
        if self.syy == 0.0 {
            return 1.0;
        }
        if s.is_empty() {
            return 0.0;
        }
        let k = s.len();
        let mut a = DMatrix::from_fn(k, k, |i, j| self.g[(s[i], s[j])]);
        let b = DVector::from_fn(k, |i, _| self.gy[s[i]]);
        let w = match a.clone().cholesky() {
            Some(ch) => ch.solve(&b),
            None => {
                let lambda = 1e-8 * a.trace().max(f64::MIN_POSITIVE) / k as f64;
                for i in 0..k {
                    a[(i, i)] += lambda;
                }
                match a.cholesky() {
                    Some(ch) => ch.solve(&b),
                    None => return 0.0,
                }
            }
        };
        (w.dot(&b) / self.syy).clamp(0.0, 1.0)
    }
}

fn combinations(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..=n - (k - cur.len()) {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Chooses at most `k` of `candidates` (1-based) maximizing training R².
pub fn subset_select(data: &Dataset, candidates: &[usize], k: usize, method: SelectionMethod) -> Result<Selection, RegressionError> {
    if k > candidates.len() {
        return Err(RegressionError::TooManyFeatures { k, available: candidates.len() });
    }
    if method == SelectionMethod::Exhaustive && candidates.len() > 20 {
        return Err(RegressionError::TooManyCandidates(candidates.len()));
    }
    if data.len() < 2 {
        return Err(RegressionError::InsufficientRows(format!("{} row(s)", data.len())));
    }
    let (x, _) = normalize(&data.predictors());
    let cand: Vec<usize> = candidates.iter().map(|f| f - 1).collect();
    let gram = Gram::new(&x, &data.targets(), &cand);
    let mut curve = Vec::new();
    let best: Vec<usize> = match method {
        SelectionMethod::Exhaustive => {
            let mut overall: Vec<usize> = Vec::new();
            for size in 1..=k {
                let mut best_s: Option<(f64, Vec<usize>)> = None;
                combinations(cand.len(), size, &mut |s| {
                    let r = gram.r2(s);
                    if best_s.as_ref().is_none_or(|(b, _)| r > *b + 1e-15) {
                        best_s = Some((r, s.to_vec()));
                    }
                });
                let (r, s) = best_s.expect("size is within range");
                curve.push((size, r));
                overall = s;
            }
            overall
        }
        SelectionMethod::Forward => {
            let mut chosen: Vec<usize> = Vec::new();
            for size in 1..=k {
                let (r, add) = (0..cand.len())
                    .filter(|i| !chosen.contains(i))
                    .map(|i| {
                        let mut s = chosen.clone();
                        s.push(i);
                        (gram.r2(&s), i)
                    })
                    .fold((f64::NEG_INFINITY, usize::MAX), |a, b| if b.0 > a.0 + 1e-15 { b } else { a });
                chosen.push(add);
                curve.push((size, r));
            }
            chosen
        }
        SelectionMethod::Backward => {
            let mut chosen: Vec<usize> = (0..cand.len()).collect();
            curve.push((chosen.len(), gram.r2(&chosen)));
            while chosen.len() > k {
                let (r, drop) = (0..chosen.len())
                    .map(|pos| {
                        let mut s = chosen.clone();
                        s.remove(pos);
                        (gram.r2(&s), pos)
                    })
                    .fold((f64::NEG_INFINITY, usize::MAX), |a, b| if b.0 > a.0 + 1e-15 { b } else { a });
                chosen.remove(drop);
                curve.push((chosen.len(), r));
            }
            curve.reverse();
            chosen
        }
    };
    let mut mask: Vec<usize> = best.iter().map(|&i| candidates[i]).collect();
    mask.sort_unstable();
    Ok(Selection { mask, r2_by_size: curve })
}

/// Model prediction for a search node, computing only the features the
/// model uses.
pub fn f_sl(graph: &SearchGraph, node: NodeId, kb: &KnowledgeBase, model: &RegressionModel, config: &FeatureConfig) -> f64 {
    let need = with_dependencies(&model.selected_features());
    let fv = extract_selected(graph, node, kb, config, &need);
    model.predict(&fv)
}

/// Heuristic module scorer for [`f_sl`].
#[derive(Clone, Debug)]
pub struct SlScorer {
    pub model: Arc<RegressionModel>,
    pub config: FeatureConfig,
}

impl NodeScorer for SlScorer {
    fn name(&self) -> &str {
        "sl"
    }

    fn score(&self, ctx: &ScoringContext<'_>, node: NodeId) -> f64 {
        let config = FeatureConfig { probe_seed: ctx.probe_seed, ..self.config };
        f_sl(ctx.graph, node, ctx.kb, &self.model, &config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(values: &[(usize, f64)], answers: f64) -> FeatureVector {
        let mut fv = FeatureVector::default();
        for (i, v) in values {
            fv.set(*i, Some(*v));
        }
        fv.set(TARGET, Some(answers));
        fv
    }

    fn dataset(rows: Vec<FeatureVector>) -> Dataset {
        let mut d = Dataset::default();
        for (i, r) in rows.into_iter().enumerate() {
            d.push(r, Provenance { query: "q".into(), node: i as u32 });
        }
        d
    }

    #[test]
    fn target_transform() {
        assert_eq!(transform_target(0.0), 0.0);
        assert!((transform_target(9.0) - 1.0).abs() < 1e-15);
        assert!((transform_target(6700.0) - 3.826).abs() < 1e-3);
    }

    #[test]
    fn normalize_column() {
        let (z, s) = normalize(&[vec![Some(1.0)], vec![Some(2.0)], vec![Some(3.0)]]);
        assert!((z[0][0] + 1.224_744_871_391_589).abs() < 1e-12);
        assert_eq!(z[1][0], 0.0);
        assert!((s.std[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let (z, _) = normalize(&[vec![Some(5.0)], vec![Some(5.0)]]);
        assert_eq!(z, vec![vec![0.0], vec![0.0]]);
        let (z, s) = normalize(&[vec![Some(1.0)], vec![None], vec![Some(3.0)]]);
        assert_eq!(s.mean[0], 2.0);
        assert_eq!(z[1][0], 0.0);
    }

    #[test]
    fn residual_rmse() {
        assert_eq!(rmse_of(&[1.0, -1.0], &[0.0, 0.0]), 1.0);
        assert!((rmse_of(&[3.0, 4.0], &[0.0, 0.0]) - 12.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exact_linear_fit() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| 2.0 * i as f64).collect();
        let s = solve_ols(&x, &y, &[0]);
        assert!((s.weights[0] - 2.0).abs() < 1e-9);
        assert!(s.intercept.abs() < 1e-9);
        assert!(!s.ridge);
    }

    #[test]
    fn duplicated_column_engages_ridge() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| i as f64 + if i % 2 == 0 { 0.1 } else { -0.1 }).collect();
        let s = solve_ols(&x, &y, &[0, 1]);
        assert!(s.ridge);
        assert!(s.weights.iter().all(|w| w.is_finite()));
    }

    #[test]
    fn model_file_round_trip() {
        let rows: Vec<FeatureVector> = (0..12).map(|i| row(&[(1, i as f64), (9, (i % 3) as f64)], (i * i) as f64)).collect();
        let d = dataset(rows);
        let m = fit_ols(&d, &[1, 9]).unwrap();
        let again = RegressionModel::parse(m.to_text().as_bytes()).unwrap();
        assert_eq!(again, m);
        for r in &d.rows {
            assert_eq!(again.predict(r), m.predict(r));
        }
    }

    #[test]
    fn kfold_partition() {
        let folds = cv_splits(100, CvScheme::ten_fold(), 3).unwrap();
        assert_eq!(folds.len(), 10);
        assert!(folds.iter().all(|f| f.len() == 10));
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert!(cv_splits(15, CvScheme::ten_fold(), 0).is_err());
    }

    #[test]
    fn dataset_csv_round_trip() {
        let d = dataset(vec![row(&[(1, 1.5), (9, 2.0)], 3.0), row(&[(2, 4.0)], 0.0)]);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(&buf[..]).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn selection_rejects_bad_k() {
        let d = dataset((0..5).map(|i| row(&[(1, i as f64)], i as f64)).collect());
        assert!(subset_select(&d, &[1], 2, SelectionMethod::Forward).is_err());
    }
}
