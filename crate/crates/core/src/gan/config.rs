//! Training configuration for the generative models.

use serde::{Deserialize, Serialize};

use super::{GanError, Result};

/// Which objective the training loop optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GanVariant {
    /// Conditional GAN with mean-variance and correlation feedback on the
    /// discriminator's feature embeddings.
    F2gan,
    /// Plain conditional GAN (identical to `F2gan` with both feedback
    /// weights at zero).
    Cgan,
    /// Wasserstein critic with gradient penalty; no feedback terms.
    WganGp,
}

impl GanVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            GanVariant::F2gan => "f2gan",
            GanVariant::Cgan => "cgan",
            GanVariant::WganGp => "wgan_gp",
        }
    }
}

/// Every hyperparameter of the training loop. All fields have defaults, so
/// partial JSON configs deserialize cleanly; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GanConfig {
    pub variant: GanVariant,
    /// Width of the latent noise vector fed to the generator.
    pub latent_dim: usize,
    /// Hidden widths of the generator (input is latent + one-hot label).
    pub gen_hidden: Vec<usize>,
    /// Hidden widths of the discriminator trunk; the feature embedding is
    /// the last hidden layer's activation.
    pub disc_hidden: Vec<usize>,
    /// Weight of the mean-variance feedback term.
    pub mv_weight: f64,
    /// Weight of the correlation feedback term.
    pub corr_weight: f64,
    /// Smoothed target for real samples in the discriminator loss, in (0, 1].
    pub label_smoothing: f64,
    /// Global-norm gradient clip applied to both networks each step.
    pub grad_clip: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Gradient-penalty weight (wgan_gp only).
    pub gp_weight: f64,
    /// Critic updates per generator step (wgan_gp only).
    pub critic_steps: usize,
    /// Use the non-saturating generator objective (-log D) instead of the
    /// saturating log(1 - D) form.
    pub non_saturating: bool,
    pub seed: u64,
}

impl Default for GanConfig {
    fn default() -> Self {
        Self {
            variant: GanVariant::F2gan,
            latent_dim: 64,
            gen_hidden: vec![128, 256],
            disc_hidden: vec![256, 128],
            mv_weight: 1.0,
            corr_weight: 1.0,
            label_smoothing: 0.9,
            grad_clip: 0.5,
            batch_size: 64,
            epochs: 500,
            learning_rate: 2e-4,
            beta1: 0.5,
            beta2: 0.999,
            epsilon: 1e-8,
            gp_weight: 10.0,
            critic_steps: 5,
            non_saturating: false,
            seed: 0,
        }
    }
}

impl GanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 {
            return Err(GanError::Config("latent_dim must be >= 1".into()));
        }
        if self
            .gen_hidden
            .iter()
            .chain(&self.disc_hidden)
            .any(|&w| w == 0)
        {
            return Err(GanError::Config("hidden widths must be >= 1".into()));
        }
        if self.disc_hidden.is_empty() {
            return Err(GanError::Config(
                "the discriminator needs at least one hidden layer to expose a feature embedding"
                    .into(),
            ));
        }
        if self.mv_weight < 0.0 || self.corr_weight < 0.0 {
            return Err(GanError::Config("feedback weights must be >= 0".into()));
        }
        if self.variant == GanVariant::Cgan && (self.mv_weight != 0.0 || self.corr_weight != 0.0) {
            return Err(GanError::Config(
                "variant cgan requires mv_weight = corr_weight = 0".into(),
            ));
        }
        if self.label_smoothing.is_nan()
            || self.label_smoothing <= 0.0
            || self.label_smoothing > 1.0
        {
            return Err(GanError::Config(format!(
                "label_smoothing must lie in (0, 1], got {}",
                self.label_smoothing
            )));
        }
        if self.grad_clip <= 0.0 || self.grad_clip.is_nan() {
            return Err(GanError::Config("grad_clip must be > 0".into()));
        }
        if self.batch_size == 0 {
            return Err(GanError::Config("batch_size must be >= 1".into()));
        }
        if self.learning_rate <= 0.0 || self.learning_rate.is_nan() {
            return Err(GanError::Config("learning_rate must be > 0".into()));
        }
        for (name, beta) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&beta) {
                return Err(GanError::Config(format!("{name} must lie in [0, 1)")));
            }
        }
        if self.epsilon <= 0.0 || self.epsilon.is_nan() {
            return Err(GanError::Config("epsilon must be > 0".into()));
        }
        if self.gp_weight < 0.0 {
            return Err(GanError::Config("gp_weight must be >= 0".into()));
        }
        if self.critic_steps == 0 {
            return Err(GanError::Config("critic_steps must be >= 1".into()));
        }
        Ok(())
    }

    /// Canonical form: an f2gan run with both feedback weights at zero *is*
    /// a plain CGAN, and is labeled as such so equivalent configs serialize
    /// identically.
    pub fn canonicalize(mut self) -> Self {
        if self.variant == GanVariant::F2gan && self.mv_weight == 0.0 && self.corr_weight == 0.0 {
            self.variant = GanVariant::Cgan;
        }
        self
    }
}
