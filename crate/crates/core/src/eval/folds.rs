//! Stratified repeated k-fold plans.
//!
//! Repeat `r` shuffles document indices with `ChaCha8Rng::seed_from_u64(base_seed + r)`
//! (Fisher–Yates via `rand::seq::SliceRandom::shuffle`), then deals relevant
//! documents and then non-relevant documents round-robin into folds. The
//! dealing counter carries over between the classes, so both the overall and
//! the per-class fold sizes differ by at most one.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::EvalError;
use crate::corpus::Label;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldPlan {
    pub repeats: usize,
    pub folds: usize,
    pub base_seed: u64,
    /// `assignment[r][doc]` is the test fold of document `doc` in repeat `r`.
    pub assignment: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn n_documents(&self) -> usize {
        self.assignment.first().map_or(0, Vec::len)
    }

    pub fn test_indices(&self, repeat: usize, fold: usize) -> Vec<usize> {
        (0..self.n_documents())
            .filter(|&d| self.assignment[repeat][d] == fold)
            .collect()
    }

    pub fn train_indices(&self, repeat: usize, fold: usize) -> Vec<usize> {
        (0..self.n_documents())
            .filter(|&d| self.assignment[repeat][d] != fold)
            .collect()
    }
}

pub fn make_fold_plan(
    labels: &[Label],
    repeats: usize,
    folds: usize,
    base_seed: u64,
) -> Result<FoldPlan, EvalError> {
    if folds < 2 {
        return Err(EvalError::InvalidFoldCount(folds));
    }
    if repeats < 1 {
        return Err(EvalError::InvalidRepeats(repeats));
    }
    if labels.len() < folds {
        return Err(EvalError::TooFewDocuments {
            documents: labels.len(),
            folds,
        });
    }

    let assignment = (0..repeats)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(r as u64));
            let mut order: Vec<usize> = (0..labels.len()).collect();
            order.shuffle(&mut rng);
            let mut fold_of = vec![0; labels.len()];
            let relevant = order.iter().filter(|&&d| labels[d].is_relevant());
            let others = order.iter().filter(|&&d| !labels[d].is_relevant());
            for (k, &d) in relevant.chain(others).enumerate() {
                fold_of[d] = k % folds;
            }
            fold_of
        })
        .collect();

    Ok(FoldPlan {
        repeats,
        folds,
        base_seed,
        assignment,
    })
}
