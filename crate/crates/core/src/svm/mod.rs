//! Linear soft-margin SVM with an unregularized bias.
//!
//! Training minimizes `½‖w‖² + C·Σ max(0, 1 − yᵢ(w·xᵢ + b))` and stops once
//! the duality gap certifies the primal objective is within
//! `tolerance · max(1, F*)` of the optimum.

mod persist;
mod solver;

use thiserror::Error;

use crate::corpus::Label;
use crate::features::{FeatureModelSpec, FeatureVector, Vocabulary};

pub use persist::{load_model, save_model, FORMAT_VERSION};
pub use solver::{objective, optimal_bias, train, EpochRecord, Training};

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("C must be positive and finite, got {0}")]
    NonPositiveC(f64),
    #[error("invalid training parameter: {0}")]
    InvalidParameter(String),
    #[error("feature index {index} out of range for dimension {dimension}")]
    DimensionMismatch { index: usize, dimension: usize },
    #[error("document label is missing")]
    Unlabeled,
    #[error("corrupt model file: {0}")]
    CorruptModelFile(String),
    #[error("unsupported model format version {0}")]
    UnsupportedFormatVersion(i64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Sparse real-valued row; binary feature vectors have all values 1.
pub type SparseRow = Vec<(usize, f64)>;

/// Labeled examples with `y = +1` for relevant and `-1` for non-relevant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSet {
    rows: Vec<SparseRow>,
    labels: Vec<f64>,
    dimension: usize,
}

impl TrainingSet {
    pub fn new(dimension: usize) -> Self {
        TrainingSet {
            rows: Vec::new(),
            labels: Vec::new(),
            dimension,
        }
    }

    fn check(&self, row: &SparseRow) -> Result<(), SvmError> {
        match row.iter().find(|(i, _)| *i >= self.dimension) {
            Some(&(index, _)) => Err(SvmError::DimensionMismatch {
                index,
                dimension: self.dimension,
            }),
            None => Ok(()),
        }
    }

    pub fn push(&mut self, x: &FeatureVector, label: Label) -> Result<(), SvmError> {
        let y = match label {
            Label::Relevant => 1.0,
            Label::NonRelevant => -1.0,
            Label::Unlabeled => return Err(SvmError::Unlabeled),
        };
        self.push_sparse(x.indices().iter().map(|&i| (i, 1.0)).collect(), y > 0.0)
    }

    /// Adds a real-valued example; `positive` selects `y = +1`.
    pub fn push_sparse(&mut self, mut row: SparseRow, positive: bool) -> Result<(), SvmError> {
        self.check(&row)?;
        row.sort_by_key(|&(i, _)| i);
        row.retain(|&(_, v)| v != 0.0);
        self.rows.push(row);
        self.labels.push(if positive { 1.0 } else { -1.0 });
        Ok(())
    }

    pub fn push_dense(&mut self, x: &[f64], positive: bool) -> Result<(), SvmError> {
        self.push_sparse(x.iter().copied().enumerate().collect(), positive)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Copy with every label flipped.
    pub fn negated(&self) -> Self {
        TrainingSet {
            rows: self.rows.clone(),
            labels: self.labels.iter().map(|y| -y).collect(),
            dimension: self.dimension,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    pub c: f64,
    pub tolerance: f64,
    pub max_epochs: usize,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            c: 1.0,
            tolerance: 1e-3,
            max_epochs: 1000,
        }
    }
}

/// A trained separator `w·x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
}

impl LinearSvm {
    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    pub fn decision(&self, x: &FeatureVector) -> Result<f64, SvmError> {
        let mut score = self.bias;
        for &i in x.indices() {
            let w = self.weights.get(i).ok_or(SvmError::DimensionMismatch {
                index: i,
                dimension: self.weights.len(),
            })?;
            score += w;
        }
        Ok(score)
    }

    pub fn decision_sparse(&self, row: &[(usize, f64)]) -> Result<f64, SvmError> {
        let mut score = self.bias;
        for &(i, v) in row {
            let w = self.weights.get(i).ok_or(SvmError::DimensionMismatch {
                index: i,
                dimension: self.weights.len(),
            })?;
            score += w * v;
        }
        Ok(score)
    }

    pub fn predict(&self, x: &FeatureVector) -> Result<Label, SvmError> {
        self.decision(x).map(label_for_score)
    }
}

/// Scores at or above zero are relevant.
pub fn label_for_score(score: f64) -> Label {
    if score >= 0.0 {
        Label::Relevant
    } else {
        Label::NonRelevant
    }
}

/// A separator bound to the feature model and vocabulary it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub svm: LinearSvm,
    pub spec: FeatureModelSpec,
    pub vocab: Vocabulary,
}

impl SvmModel {
    pub fn new(svm: LinearSvm, spec: FeatureModelSpec, vocab: Vocabulary) -> Result<Self, SvmError> {
        if svm.weights.len() != vocab.dimension() {
            return Err(SvmError::DimensionMismatch {
                index: svm.weights.len(),
                dimension: vocab.dimension(),
            });
        }
        if !vocab.matches(&spec) {
            return Err(SvmError::CorruptModelFile(format!(
                "vocabulary layout does not match model {}",
                spec.model_id()
            )));
        }
        Ok(SvmModel { svm, spec, vocab })
    }

    pub fn decision(&self, x: &FeatureVector) -> Result<f64, SvmError> {
        self.svm.decision(x)
    }

    pub fn predict(&self, x: &FeatureVector) -> Result<Label, SvmError> {
        self.svm.predict(x)
    }
}
