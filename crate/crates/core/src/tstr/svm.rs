//! One-vs-rest linear SVM trained by stochastic subgradient descent on the
//! L2-regularized hinge loss.
//!
//! One epoch sweeps every sample once in a seeded random order; the step
//! size decays as `eta0 / (1 + eta0 * penalty * t)`. Weights start at zero,
//! so the fit is deterministic given (data, seed).

#![allow(clippy::needless_range_loop)] // index loops touch several arrays at once

use crate::numerics::{Matrix, SeededRng};

const ETA0: f64 = 0.5;

#[derive(Debug, Clone)]
pub(super) struct SvmState {
    /// Per-class weight vectors, one row per class.
    weights: Matrix,
    bias: Vec<f64>,
}

pub(super) fn fit(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    penalty: f64,
    epochs: usize,
    seed: u64,
) -> SvmState {
    let d = x.cols();
    let mut weights = Matrix::zeros(n_classes, d);
    let mut bias = vec![0.0; n_classes];
    let mut rng = SeededRng::new(seed);
    let mut order: Vec<usize> = (0..x.rows()).collect();

    let mut t = 0u64;
    for _ in 0..epochs {
        rng.shuffle(&mut order);
        for &r in &order {
            t += 1;
            let eta = ETA0 / (1.0 + ETA0 * penalty * t as f64);
            let row = x.row(r);
            for class in 0..n_classes {
                let target = if y[r] == class { 1.0 } else { -1.0 };
                let score: f64 = weights
                    .row(class)
                    .iter()
                    .zip(row)
                    .map(|(&w, &v)| w * v)
                    .sum::<f64>()
                    + bias[class];
                let decay = 1.0 - eta * 2.0 * penalty;
                let w_row = weights.row_mut(class);
                if target * score < 1.0 {
                    for (w, &v) in w_row.iter_mut().zip(row) {
                        *w = *w * decay + eta * target * v;
                    }
                    bias[class] += eta * target;
                } else {
                    for w in w_row.iter_mut() {
                        *w *= decay;
                    }
                }
            }
        }
    }
    SvmState { weights, bias }
}

pub(super) fn predict(state: &SvmState, x: &Matrix) -> Vec<usize> {
    (0..x.rows())
        .map(|r| {
            let row = x.row(r);
            let mut best = 0usize;
            let mut best_score = f64::NEG_INFINITY;
            for c in 0..state.weights.rows() {
                let score: f64 = state
                    .weights
                    .row(c)
                    .iter()
                    .zip(row)
                    .map(|(&w, &v)| w * v)
                    .sum::<f64>()
                    + state.bias[c];
                if score > best_score {
                    best = c;
                    best_score = score;
                }
            }
            best
        })
        .collect()
}
