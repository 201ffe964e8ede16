//! Adaptive-moment optimizer and global-norm gradient clipping.

use super::{MlpGrads, MlpParams, MlpSpec, NumericsError, Result};

/// State of the adaptive-moment (Adam) optimizer for one network.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    /// First-moment accumulators, parameter-shaped.
    pub first_moment: MlpParams,
    /// Second-moment accumulators, parameter-shaped.
    pub second_moment: MlpParams,
    /// Completed update steps.
    pub step: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl OptimizerState {
    pub fn new(spec: &MlpSpec, learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            first_moment: MlpParams::zeros_like(spec),
            second_moment: MlpParams::zeros_like(spec),
            step: 0,
            learning_rate,
            beta1,
            beta2,
            epsilon,
        }
    }
}

/// One bias-corrected adaptive-moment update, applied elementwise.
///
/// Increments the step counter exactly once. Fails without touching the
/// parameters if any gradient entry is non-finite.
pub fn adam_step(
    params: &mut MlpParams,
    grads: &MlpGrads,
    state: &mut OptimizerState,
) -> Result<()> {
    if params.layers.len() != grads.layers.len()
        || params.layers.len() != state.first_moment.layers.len()
    {
        return Err(NumericsError::Contract(
            "optimizer state, parameters, and gradients must share one shape".into(),
        ));
    }
    if !grads.is_finite() {
        return Err(NumericsError::NonFinite {
            context: "gradient passed to adam_step".into(),
        });
    }

    state.step += 1;
    let bc1 = 1.0 - state.beta1.powi(state.step as i32);
    let bc2 = 1.0 - state.beta2.powi(state.step as i32);

    for l in 0..params.layers.len() {
        let p = &mut params.layers[l];
        let g = &grads.layers[l];
        let m = &mut state.first_moment.layers[l];
        let v = &mut state.second_moment.layers[l];
        if p.weights.rows() != g.weights.rows() || p.weights.cols() != g.weights.cols() {
            return Err(NumericsError::DimensionMismatch {
                context: format!("adam_step layer {l} weights"),
                expected: format!("{}x{}", p.weights.rows(), p.weights.cols()),
                found: format!("{}x{}", g.weights.rows(), g.weights.cols()),
            });
        }

        let update = |param: &mut f64, grad: f64, m: &mut f64, v: &mut f64| {
            *m = state.beta1 * *m + (1.0 - state.beta1) * grad;
            *v = state.beta2 * *v + (1.0 - state.beta2) * grad * grad;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *param -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
        };

        for ((pw, &gw), (mw, vw)) in p
            .weights
            .data_mut()
            .iter_mut()
            .zip(g.weights.data())
            .zip(m.weights.data_mut().iter_mut().zip(v.weights.data_mut()))
        {
            update(pw, gw, mw, vw);
        }
        for ((pb, &gb), (mb, vb)) in p
            .bias
            .iter_mut()
            .zip(&g.bias)
            .zip(m.bias.iter_mut().zip(v.bias.iter_mut()))
        {
            update(pb, gb, mb, vb);
        }
    }
    Ok(())
}

/// Clip gradients to a global L2 norm of at most `threshold`, preserving
/// direction. Returns the pre-clip norm.
///
/// Norms within one part in 1e12 of the threshold are left untouched, which
/// makes clipping exactly idempotent despite rounding in the rescale.
pub fn clip_gradients(grads: &mut MlpGrads, threshold: f64) -> f64 {
    assert!(threshold > 0.0, "clip threshold must be positive");
    let norm = grads.global_norm();
    if norm > threshold * (1.0 + 1e-12) {
        grads.scale(threshold / norm);
    }
    norm
}
