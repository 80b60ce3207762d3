//! Repeated stratified cross-validation and model comparison.
//!
//! Every (repeat, fold) run builds its vocabulary from the training documents
//! only, trains an SVM, and scores the held-out fold. Runs execute on the
//! current rayon pool but are collected in (repeat, fold) order, so reports
//! are identical regardless of thread count.

mod folds;
mod metrics;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError};
use crate::features::{Extraction, FeatureError, FeatureModelSpec, Vocabulary};
use crate::svm::{self, SvmError, TrainParams, TrainingSet};

pub use folds::{make_fold_plan, FoldPlan};
pub use metrics::ConfusionCounts;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("fold count must be at least 2, got {0}")]
    InvalidFoldCount(usize),
    #[error("repeat count must be at least 1, got {0}")]
    InvalidRepeats(usize),
    #[error("{documents} documents cannot fill {folds} folds")]
    TooFewDocuments { documents: usize, folds: usize },
    #[error("fold plan covers {plan} documents but the corpus has {corpus}")]
    PlanMismatch { plan: usize, corpus: usize },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Svm(#[from] SvmError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvParams {
    pub repeats: usize,
    pub folds: usize,
    pub base_seed: u64,
    pub train: TrainParams,
}

impl Default for CvParams {
    fn default() -> Self {
        CvParams {
            repeats: 10,
            folds: 10,
            base_seed: 42,
            train: TrainParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub repeat: usize,
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub vocabulary_size: usize,
    pub converged: bool,
    pub confusion: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (n − 1); 0 for a single run.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let values: Vec<f64> = values.into_iter().collect();
        let n = values.len();
        if n == 0 {
            return MeanStd { mean: 0.0, std: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub fscore: MeanStd,
    pub non_converged_runs: usize,
}

impl Aggregate {
    pub fn from_runs(runs: &[RunRecord]) -> Self {
        Aggregate {
            precision: MeanStd::of(runs.iter().map(|r| r.precision)),
            recall: MeanStd::of(runs.iter().map(|r| r.recall)),
            fscore: MeanStd::of(runs.iter().map(|r| r.fscore)),
            non_converged_runs: runs.iter().filter(|r| !r.converged).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_id: u8,
    pub description: String,
    pub seed: u64,
    pub repeats: usize,
    pub folds: usize,
    #[serde(rename = "C")]
    pub c: f64,
    pub tolerance: f64,
    pub n_documents: usize,
    pub corpus_vocabulary_size: usize,
    pub runs: Vec<RunRecord>,
    pub aggregate: Aggregate,
}

/// Per-document extractions for one model, computed once per corpus.
pub fn extract_corpus(corpus: &Corpus, spec: &FeatureModelSpec) -> Vec<Extraction> {
    corpus
        .documents
        .par_iter()
        .map(|d| Extraction::of(d, spec))
        .collect()
}

/// Token count of the vocabulary built over the whole corpus.
pub fn corpus_vocabulary_size(corpus: &Corpus, spec: &FeatureModelSpec) -> usize {
    Vocabulary::from_extractions(&extract_corpus(corpus, spec), spec).n_tokens()
}

/// Vocabulary of one run, built from that run's training documents.
pub fn fold_vocabulary(
    extractions: &[Extraction],
    spec: &FeatureModelSpec,
    plan: &FoldPlan,
    repeat: usize,
    fold: usize,
) -> Vocabulary {
    let train = plan.train_indices(repeat, fold);
    Vocabulary::from_extractions(train.iter().map(|&d| &extractions[d]), spec)
}

fn run_one(
    corpus: &Corpus,
    extractions: &[Extraction],
    spec: &FeatureModelSpec,
    plan: &FoldPlan,
    params: &TrainParams,
    repeat: usize,
    fold: usize,
) -> Result<RunRecord, EvalError> {
    let vocab = fold_vocabulary(extractions, spec, plan, repeat, fold);
    let train_idx = plan.train_indices(repeat, fold);
    let test_idx = plan.test_indices(repeat, fold);

    let mut data = TrainingSet::new(vocab.dimension());
    for &d in &train_idx {
        data.push(&vocab.vectorize_extraction(&extractions[d]), corpus.documents[d].label)?;
    }
    let trained = svm::train(&data, params)?;

    let mut confusion = ConfusionCounts::default();
    for &d in &test_idx {
        let predicted = trained.svm.predict(&vocab.vectorize_extraction(&extractions[d]))?;
        confusion.record(corpus.documents[d].label, predicted);
    }
    Ok(RunRecord {
        repeat,
        fold,
        n_train: train_idx.len(),
        n_test: test_idx.len(),
        vocabulary_size: vocab.n_tokens(),
        converged: trained.converged,
        confusion,
        precision: confusion.precision(),
        recall: confusion.recall(),
        fscore: confusion.fscore(),
    })
}

/// Runs every (repeat, fold) of an existing plan for one feature model.
pub fn run_with_plan(
    corpus: &Corpus,
    spec: &FeatureModelSpec,
    plan: &FoldPlan,
    params: &TrainParams,
) -> Result<EvalReport, EvalError> {
    corpus.require_labels()?;
    if plan.n_documents() != corpus.len() {
        return Err(EvalError::PlanMismatch {
            plan: plan.n_documents(),
            corpus: corpus.len(),
        });
    }
    let extractions = extract_corpus(corpus, spec);
    let keys: Vec<(usize, usize)> = (0..plan.repeats)
        .flat_map(|r| (0..plan.folds).map(move |f| (r, f)))
        .collect();
    let runs = keys
        .par_iter()
        .map(|&(r, f)| run_one(corpus, &extractions, spec, plan, params, r, f))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(EvalReport {
        model_id: spec.model_id(),
        description: spec.description(),
        seed: plan.base_seed,
        repeats: plan.repeats,
        folds: plan.folds,
        c: params.c,
        tolerance: params.tolerance,
        n_documents: corpus.len(),
        corpus_vocabulary_size: Vocabulary::from_extractions(&extractions, spec).n_tokens(),
        aggregate: Aggregate::from_runs(&runs),
        runs,
    })
}

pub fn run_repeated_cv(
    corpus: &Corpus,
    spec: &FeatureModelSpec,
    params: &CvParams,
) -> Result<EvalReport, EvalError> {
    corpus.require_labels()?;
    let plan = make_fold_plan(&corpus.labels(), params.repeats, params.folds, params.base_seed)?;
    run_with_plan(corpus, spec, &plan, &params.train)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model_id: u8,
    pub description: String,
    pub vocabulary_size: usize,
    pub fscore_percent: f64,
    pub fscore_std_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub seed: u64,
    pub repeats: usize,
    pub folds: usize,
    pub rows: Vec<ComparisonRow>,
    pub reports: Vec<EvalReport>,
}

/// Evaluates several models on one shared fold plan; rows follow model id.
pub fn compare_models(
    corpus: &Corpus,
    model_ids: &[u8],
    params: &CvParams,
) -> Result<Comparison, EvalError> {
    corpus.require_labels()?;
    let mut specs = model_ids
        .iter()
        .map(|&id| FeatureModelSpec::from_id(id))
        .collect::<Result<Vec<_>, _>>()?;
    specs.sort_by_key(|s| s.model_id());
    specs.dedup();
    let plan = make_fold_plan(&corpus.labels(), params.repeats, params.folds, params.base_seed)?;

    let mut rows = Vec::with_capacity(specs.len());
    let mut reports = Vec::with_capacity(specs.len());
    for spec in &specs {
        let report = run_with_plan(corpus, spec, &plan, &params.train)?;
        rows.push(ComparisonRow {
            model_id: spec.model_id(),
            description: spec.description(),
            vocabulary_size: report.corpus_vocabulary_size,
            fscore_percent: 100.0 * report.aggregate.fscore.mean,
            fscore_std_percent: 100.0 * report.aggregate.fscore.std,
        });
        reports.push(report);
    }
    Ok(Comparison {
        seed: params.base_seed,
        repeats: params.repeats,
        folds: params.folds,
        rows,
        reports,
    })
}

impl Comparison {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Results on {}-times {}-fold cross-validation (seed {})",
            self.repeats, self.folds, self.seed
        );
        let _ = writeln!(
            out,
            "{:>2}  {:<42} {:>11} {:>12} {:>8}",
            "#", "Models", "#Vocabulary", "F-score (%)", "Std (%)"
        );
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:>2}  {:<42} {:>11} {:>12.2} {:>8.2}",
                row.model_id,
                row.description,
                row.vocabulary_size,
                row.fscore_percent,
                row.fscore_std_percent
            );
        }
        out
    }
}

impl EvalReport {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Model {}: {} ({} runs, {}-times {}-fold, seed {}, C={})",
            self.model_id,
            self.description,
            self.runs.len(),
            self.repeats,
            self.folds,
            self.seed,
            self.c
        );
        let _ = writeln!(out, "{:<10} {:>9} {:>8}", "metric", "mean (%)", "std (%)");
        for (name, m) in [
            ("precision", self.aggregate.precision),
            ("recall", self.aggregate.recall),
            ("f-score", self.aggregate.fscore),
        ] {
            let _ = writeln!(out, "{:<10} {:>9.2} {:>8.2}", name, 100.0 * m.mean, 100.0 * m.std);
        }
        let _ = writeln!(out, "corpus vocabulary: {}", self.corpus_vocabulary_size);
        if self.aggregate.non_converged_runs > 0 {
            let _ = writeln!(
                out,
                "warning: {} runs stopped before reaching the tolerance",
                self.aggregate.non_converged_runs
            );
        }
        out
    }
}
