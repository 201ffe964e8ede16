//! Softmax MLP classifier trained with cross-entropy and the adaptive
//! optimizer from the numerics substrate.
//!
//! The network keeps a linear output layer and fuses the softmax into the
//! loss (log-sum-exp form), which is the numerically stable way to train a
//! softmax classifier; predictions take the argmax of the logits.

#![allow(clippy::needless_range_loop)] // index loops touch several arrays at once

use crate::numerics::{
    adam_step, mlp_backward, mlp_forward, Matrix, MlpParams, MlpSpec, OptimizerState,
    OutputActivation, SeededRng,
};

use super::Result;

const LEARNING_RATE: f64 = 1e-3;
const BATCH_SIZE: usize = 128;

#[derive(Debug, Clone)]
pub(super) struct NnState {
    spec: MlpSpec,
    params: MlpParams,
}

pub(super) fn fit(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    hidden: &[usize],
    epochs: usize,
    seed: u64,
) -> Result<NnState> {
    let mut sizes = Vec::with_capacity(hidden.len() + 2);
    sizes.push(x.cols());
    sizes.extend_from_slice(hidden);
    sizes.push(n_classes);
    let spec = MlpSpec::new(sizes, 0.2, OutputActivation::Linear)?;
    let mut rng = SeededRng::new(seed);
    let mut params = MlpParams::init(&spec, &mut rng);
    let mut opt = OptimizerState::new(&spec, LEARNING_RATE, 0.9, 0.999, 1e-8);

    let n = x.rows();
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..epochs {
        rng.shuffle(&mut order);
        for chunk in order.chunks(BATCH_SIZE) {
            let mut bx = Matrix::zeros(chunk.len(), x.cols());
            let mut by = Vec::with_capacity(chunk.len());
            for (i, &r) in chunk.iter().enumerate() {
                bx.row_mut(i).copy_from_slice(x.row(r));
                by.push(y[r]);
            }
            let (logits, cache) = mlp_forward(&params, &spec, &bx)?;
            // d(cross-entropy)/d(logits) = (softmax - one_hot) / batch.
            let mut grad = Matrix::zeros(chunk.len(), n_classes);
            let inv = 1.0 / chunk.len() as f64;
            for r in 0..chunk.len() {
                let row = logits.row(r);
                let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = row.iter().map(|&v| (v - max).exp()).sum();
                for (c, g) in grad.row_mut(r).iter_mut().enumerate() {
                    let p = (row[c] - max).exp() / sum;
                    *g = (p - if by[r] == c { 1.0 } else { 0.0 }) * inv;
                }
            }
            let (grads, _) = mlp_backward(&params, &spec, &cache, &grad)?;
            adam_step(&mut params, &grads, &mut opt)?;
        }
    }
    Ok(NnState { spec, params })
}

pub(super) fn predict(state: &NnState, x: &Matrix) -> Result<Vec<usize>> {
    let (logits, _) = mlp_forward(&state.params, &state.spec, x)?;
    Ok((0..logits.rows())
        .map(|r| {
            let row = logits.row(r);
            let mut best = 0usize;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect())
}
