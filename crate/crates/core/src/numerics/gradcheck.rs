//! Central-difference gradient oracle.
//!
//! Deliberately independent of the reverse-mode path: it only evaluates the
//! provided loss closure at perturbed parameter values, so every analytic
//! gradient in the repository can be checked against it.

use super::{MlpGrads, MlpParams};

/// Central finite differences `(f(p + h) - f(p - h)) / 2h` for every weight
/// and bias entry. `loss_fn` must be deterministic for fixed parameters.
pub fn finite_diff_gradient(
    loss_fn: &dyn Fn(&MlpParams) -> f64,
    params: &MlpParams,
    h: f64,
) -> MlpGrads {
    let mut scratch = params.clone();
    let mut grads = params.clone();
    for g in &mut grads.layers {
        for v in g.weights.data_mut() {
            *v = 0.0;
        }
        for v in &mut g.bias {
            *v = 0.0;
        }
    }

    for l in 0..params.layers.len() {
        for idx in 0..params.layers[l].weights.data().len() {
            let orig = scratch.layers[l].weights.data()[idx];
            scratch.layers[l].weights.data_mut()[idx] = orig + h;
            let plus = loss_fn(&scratch);
            scratch.layers[l].weights.data_mut()[idx] = orig - h;
            let minus = loss_fn(&scratch);
            scratch.layers[l].weights.data_mut()[idx] = orig;
            grads.layers[l].weights.data_mut()[idx] = (plus - minus) / (2.0 * h);
        }
        for idx in 0..params.layers[l].bias.len() {
            let orig = scratch.layers[l].bias[idx];
            scratch.layers[l].bias[idx] = orig + h;
            let plus = loss_fn(&scratch);
            scratch.layers[l].bias[idx] = orig - h;
            let minus = loss_fn(&scratch);
            scratch.layers[l].bias[idx] = orig;
            grads.layers[l].bias[idx] = (plus - minus) / (2.0 * h);
        }
    }
    grads
}
