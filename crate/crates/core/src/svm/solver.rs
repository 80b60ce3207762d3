//! Dual solver: pairwise (SMO-style) coordinate ascent on
//!
//! ```text
//! max  Σα − ½‖Σ αᵢyᵢxᵢ‖²   s.t.  0 ≤ αᵢ ≤ C,  Σ αᵢyᵢ = 0
//! ```
//!
//! with second-order working-set selection. The equality constraint is what
//! keeps the bias out of the regularizer. Every few iterations the primal
//! objective is evaluated at `w = Σ αᵢyᵢxᵢ` with the exactly optimal bias,
//! and training stops when `primal − dual ≤ tolerance · max(1, dual)`.

use std::collections::VecDeque;
use std::rc::Rc;

use super::{LinearSvm, SparseRow, SvmError, TrainParams, TrainingSet};

const TAU: f64 = 1e-12;
const KKT_EPS: f64 = 1e-12;
const CACHE_BYTES: usize = 256 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Best primal objective seen so far.
    pub primal: f64,
    pub dual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Training {
    pub svm: LinearSvm,
    pub converged: bool,
    pub iterations: usize,
    pub epochs: usize,
    pub primal: f64,
    pub dual: f64,
    pub trace: Vec<EpochRecord>,
}

fn dot(w: &[f64], row: &[(usize, f64)]) -> f64 {
    row.iter().map(|&(i, v)| w[i] * v).sum()
}

fn hinge_sum(scores: &[f64], labels: &[f64], bias: f64) -> f64 {
    scores
        .iter()
        .zip(labels)
        .map(|(s, y)| (1.0 - y * (s + bias)).max(0.0))
        .sum()
}

/// Bias minimizing the summed hinge loss for fixed scores `w·xᵢ`.
///
/// The loss is convex and piecewise linear in `b` with one kink per example
/// at `yᵢ − sᵢ`, and its slope rises by one at every kink. With `p` positives
/// the minimizers are the interval between the `p`-th and `(p+1)`-th smallest
/// kinks; its midpoint is returned (or the finite end when one class is
/// absent).
pub fn optimal_bias(scores: &[f64], labels: &[f64]) -> f64 {
    if scores.is_empty() {
        return 0.0;
    }
    let mut kinks: Vec<f64> = scores.iter().zip(labels).map(|(s, y)| y - s).collect();
    kinks.sort_by(f64::total_cmp);
    let positives = labels.iter().filter(|&&y| y > 0.0).count();
    match positives {
        0 => kinks[0],
        p if p == kinks.len() => kinks[p - 1],
        p => 0.5 * (kinks[p - 1] + kinks[p]),
    }
}

/// `½‖w‖² + C·Σ max(0, 1 − yᵢ(w·xᵢ + b))`.
pub fn objective(data: &TrainingSet, weights: &[f64], bias: f64, c: f64) -> f64 {
    let scores: Vec<f64> = data.rows().iter().map(|r| dot(weights, r)).collect();
    0.5 * weights.iter().map(|w| w * w).sum::<f64>() + c * hinge_sum(&scores, data.labels(), bias)
}

/// Kernel columns `K[i][·] = xᵢ·x·`, computed on demand and kept FIFO.
struct KernelCache<'a> {
    rows: &'a [SparseRow],
    scratch: Vec<f64>,
    columns: Vec<Option<Rc<[f64]>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelCache<'a> {
    fn new(rows: &'a [SparseRow], dimension: usize) -> Self {
        let n = rows.len().max(1);
        KernelCache {
            rows,
            scratch: vec![0.0; dimension],
            columns: vec![None; rows.len()],
            order: VecDeque::new(),
            capacity: (CACHE_BYTES / (8 * n)).max(2),
        }
    }

    fn column(&mut self, i: usize) -> Rc<[f64]> {
        if let Some(col) = &self.columns[i] {
            return Rc::clone(col);
        }
        for &(k, v) in &self.rows[i] {
            self.scratch[k] = v;
        }
        let col: Rc<[f64]> = self.rows.iter().map(|r| dot(&self.scratch, r)).collect();
        for &(k, _) in &self.rows[i] {
            self.scratch[k] = 0.0;
        }
        if self.order.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.columns[old] = None;
            }
        }
        self.order.push_back(i);
        self.columns[i] = Some(Rc::clone(&col));
        col
    }
}

struct Snapshot {
    primal: f64,
    dual: f64,
    bias: f64,
}

struct Solver<'a> {
    rows: &'a [SparseRow],
    y: &'a [f64],
    c: f64,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    diag: Vec<f64>,
    w: Vec<f64>,
    cache: KernelCache<'a>,
}

impl<'a> Solver<'a> {
    fn new(data: &'a TrainingSet, c: f64) -> Self {
        let rows = data.rows();
        Solver {
            rows,
            y: data.labels(),
            c,
            alpha: vec![0.0; rows.len()],
            grad: vec![-1.0; rows.len()],
            diag: rows.iter().map(|r| r.iter().map(|(_, v)| v * v).sum()).collect(),
            w: vec![0.0; data.dimension()],
            cache: KernelCache::new(rows, data.dimension()),
        }
    }

    /// Exact primal/dual at the current iterate; also resyncs the gradient.
    fn evaluate(&mut self) -> Snapshot {
        let scores: Vec<f64> = self.rows.iter().map(|r| dot(&self.w, r)).collect();
        for (t, s) in scores.iter().enumerate() {
            self.grad[t] = self.y[t] * s - 1.0;
        }
        let bias = optimal_bias(&scores, self.y);
        let norm2: f64 = self.w.iter().map(|w| w * w).sum();
        let primal = 0.5 * norm2 + self.c * hinge_sum(&scores, self.y, bias);
        let dual = self.alpha.iter().sum::<f64>() - 0.5 * norm2;
        Snapshot { primal, dual, bias }
    }

    fn select_pair(&mut self) -> Option<(usize, usize)> {
        let (y, alpha, grad, c) = (self.y, &self.alpha, &self.grad, self.c);
        let mut gmax = f64::NEG_INFINITY;
        let mut first = None;
        for t in 0..y.len() {
            let candidate = if y[t] > 0.0 {
                (alpha[t] < c).then(|| -grad[t])
            } else {
                (alpha[t] > 0.0).then(|| grad[t])
            };
            if let Some(v) = candidate {
                if v >= gmax {
                    gmax = v;
                    first = Some(t);
                }
            }
        }
        let i = first?;
        let ki = self.cache.column(i);
        let (alpha, grad) = (&self.alpha, &self.grad);

        let mut gmax2 = f64::NEG_INFINITY;
        let mut second = None;
        let mut best = f64::INFINITY;
        for t in 0..y.len() {
            let grad_diff = if y[t] > 0.0 {
                if alpha[t] <= 0.0 {
                    continue;
                }
                gmax2 = gmax2.max(grad[t]);
                gmax + grad[t]
            } else {
                if alpha[t] >= c {
                    continue;
                }
                gmax2 = gmax2.max(-grad[t]);
                gmax - grad[t]
            };
            if grad_diff > 0.0 {
                let quad = self.diag[i] + self.diag[t] - 2.0 * ki[t];
                let quad = if quad > 0.0 { quad } else { TAU };
                let gain = -(grad_diff * grad_diff) / quad;
                if gain <= best {
                    best = gain;
                    second = Some(t);
                }
            }
        }
        if gmax + gmax2 < KKT_EPS {
            return None;
        }
        second.map(|j| (i, j))
    }

    fn update_pair(&mut self, i: usize, j: usize) {
        let c = self.c;
        let ki = self.cache.column(i);
        let kj = self.cache.column(j);
        let (yi, yj) = (self.y[i], self.y[j]);
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let quad = self.diag[i] + self.diag[j] - 2.0 * ki[j];
        let quad = if quad > 0.0 { quad } else { TAU };
        let (mut ai, mut aj) = (old_i, old_j);

        if yi != yj {
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }

        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for t in 0..self.grad.len() {
            self.grad[t] += self.y[t] * (yi * ki[t] * di + yj * kj[t] * dj);
        }
        for &(k, v) in &self.rows[i] {
            self.w[k] += di * yi * v;
        }
        for &(k, v) in &self.rows[j] {
            self.w[k] += dj * yj * v;
        }
    }
}

fn validate(data: &TrainingSet, params: &TrainParams) -> Result<(), SvmError> {
    if data.is_empty() {
        return Err(SvmError::EmptyTrainingSet);
    }
    if !(params.c.is_finite() && params.c > 0.0) {
        return Err(SvmError::NonPositiveC(params.c));
    }
    if !(params.tolerance.is_finite() && params.tolerance > 0.0) {
        return Err(SvmError::InvalidParameter(format!(
            "tolerance must be positive, got {}",
            params.tolerance
        )));
    }
    if params.max_epochs == 0 {
        return Err(SvmError::InvalidParameter("max_epochs must be at least 1".into()));
    }
    Ok(())
}

/// Trains a linear SVM. If the tolerance is not met within `max_epochs`
/// passes (one pass = one pair update per example), the best iterate found is
/// returned with `converged = false`.
pub fn train(data: &TrainingSet, params: &TrainParams) -> Result<Training, SvmError> {
    validate(data, params)?;
    let n = data.len();
    let max_iterations = params.max_epochs.saturating_mul(n);
    let check_every = (n / 8).clamp(8, 256);

    let mut solver = Solver::new(data, params.c);
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    let mut trace = Vec::new();
    let mut iterations = 0usize;
    let mut dual = 0.0;
    let mut gap_closed = |solver: &mut Solver, best: &mut Option<(f64, Vec<f64>, f64)>| {
        let snap = solver.evaluate();
        dual = snap.dual;
        if best.as_ref().is_none_or(|(f, _, _)| snap.primal < *f) {
            *best = Some((snap.primal, solver.w.clone(), snap.bias));
        }
        let best_primal = best.as_ref().map_or(snap.primal, |b| b.0);
        (best_primal, dual, best_primal - dual <= params.tolerance * dual.max(1.0))
    };

    let converged = loop {
        let at_epoch = iterations.is_multiple_of(n);
        if at_epoch || iterations.is_multiple_of(check_every) {
            let (primal, dual, closed) = gap_closed(&mut solver, &mut best);
            if at_epoch {
                trace.push(EpochRecord {
                    epoch: iterations / n,
                    primal,
                    dual,
                });
            }
            if closed {
                break true;
            }
        }
        if iterations >= max_iterations {
            break false;
        }
        match solver.select_pair() {
            Some((i, j)) => solver.update_pair(i, j),
            None => break gap_closed(&mut solver, &mut best).2,
        }
        iterations += 1;
    };

    let (primal, weights, bias) = best.expect("evaluated at least once");
    let epochs = iterations.div_ceil(n);
    if trace.last().is_none_or(|r| r.epoch != epochs || r.primal != primal) {
        trace.push(EpochRecord { epoch: epochs, primal, dual });
    }
    Ok(Training {
        svm: LinearSvm {
            weights,
            bias,
            c: params.c,
        },
        converged,
        iterations,
        epochs,
        primal,
        dual,
        trace,
    })
}
