//! Conditional generative models over tabular data: the feature-feedback
//! GAN, its CGAN ablation, and a WGAN-GP baseline, plus balanced synthesis
//! and model serialization.
//!
//! Training is single-threaded and fully determined by the config seed. A
//! [`TrainedGan`] is immutable afterwards and safe to share across threads
//! for synthesis and evaluation; independent trainings may run concurrently.

mod config;
mod io;
mod losses;
mod model;
mod synth;
mod train;

pub use config::{GanConfig, GanVariant};
pub use io::{load_model, save_model, MODEL_FORMAT_VERSION};
pub use losses::{
    adversarial_loss_g, adversarial_loss_g_grad, corr_feedback, corr_feedback_grad,
    discriminator_loss, discriminator_loss_grads, generator_loss, mv_feedback, mv_feedback_grad,
    wgan_gp_critic_loss,
};
pub use model::{DiscriminatorModel, GeneratorModel};
pub use synth::synthesize_balanced;
pub use train::{
    train, train_instrumented, EpochLosses, NetworkKind, StepDiagnostics, TrainedGan, TrainingLog,
};

use thiserror::Error;

/// Errors raised by model construction, training, and serialization.
#[derive(Debug, Error)]
pub enum GanError {
    #[error("invalid config: {0}")]
    Config(String),

    #[error("non-finite {quantity} at epoch {epoch}, batch {batch}")]
    NonFiniteLoss {
        quantity: String,
        epoch: usize,
        batch: usize,
    },

    #[error("numeric failure at epoch {epoch}, batch {batch}: {source}")]
    Numerics {
        epoch: usize,
        batch: usize,
        #[source]
        source: crate::numerics::NumericsError,
    },

    #[error(transparent)]
    Substrate(#[from] crate::numerics::NumericsError),

    #[error(transparent)]
    Data(#[from] crate::data::DataError),

    #[error("model io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("model file {path} is not valid: {detail}")]
    ModelFormat { path: String, detail: String },

    #[error("model file {path} has format version {found}, this build reads {expected}")]
    ModelVersion {
        path: String,
        expected: u32,
        found: u32,
    },
}

pub type Result<T> = std::result::Result<T, GanError>;
