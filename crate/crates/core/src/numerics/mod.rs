//! Numerical substrate: dense matrices, MLP forward/backward passes, the
//! Adam optimizer, global-norm gradient clipping, and a seeded deterministic
//! random source.
//!
//! Everything here is plain-value and pure given explicit state, so
//! independent computations are safe to run on separate threads. A single
//! training run is sequential by contract (optimizer state mutation is
//! ordered).

mod gradcheck;
mod matrix;
mod mlp;
mod optim;
mod rng;
pub mod stats;

pub use gradcheck::finite_diff_gradient;
pub use matrix::Matrix;
pub use mlp::{
    mlp_backward, mlp_backward_with_taps, mlp_forward, mlp_grad_of_input_gradient, ForwardCache,
    LayerParams, MlpGrads, MlpParams, MlpSpec, OutputActivation,
};
pub use optim::{adam_step, clip_gradients, OptimizerState};
pub use rng::{derive_subseed, SeededRng};

use thiserror::Error;

/// Errors raised by the numerical substrate.
#[derive(Debug, Error)]
pub enum NumericsError {
    /// Matrix or vector dimensions do not line up for the requested op.
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: String,
        expected: String,
        found: String,
    },

    /// A layer received input of the wrong width.
    #[error("layer {layer}: input has {found} columns, expected {expected}")]
    LayerShape {
        layer: usize,
        expected: usize,
        found: usize,
    },

    /// A forward cache does not match the parameters it is replayed against.
    #[error("forward cache does not match network: {0}")]
    StaleCache(String),

    /// A non-finite value surfaced where the contract forbids one.
    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    /// A structural precondition was violated.
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, NumericsError>;
