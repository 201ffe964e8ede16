//! Conditional generator and discriminator construction.
//!
//! Both networks condition on the class by one-hot concatenation at the
//! input. The generator maps `[noise | one-hot y]` to a feature vector in
//! `(-1, 1)^d` through a tanh output. The discriminator maps
//! `[x | one-hot y]` through a leaky-ReLU trunk to a single linear logit;
//! its feature embedding `f(.)` is the activation of the last hidden layer.

use crate::numerics::{
    mlp_forward, ForwardCache, Matrix, MlpParams, MlpSpec, OutputActivation, SeededRng,
};

use super::Result;

/// Negative-side slope of every hidden leaky-ReLU unit.
pub(crate) const HIDDEN_SLOPE: f64 = 0.2;

/// Conditional generator: `[z | one-hot y] -> x_hat`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorModel {
    pub spec: MlpSpec,
    pub params: MlpParams,
}

impl GeneratorModel {
    pub(crate) fn build(
        latent_dim: usize,
        hidden: &[usize],
        n_features: usize,
        n_classes: usize,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(latent_dim + n_classes);
        sizes.extend_from_slice(hidden);
        sizes.push(n_features);
        let spec = MlpSpec::new(sizes, HIDDEN_SLOPE, OutputActivation::Tanh)?;
        let params = MlpParams::init(&spec, rng);
        Ok(Self { spec, params })
    }

    pub fn forward(&self, input: &Matrix) -> Result<(Matrix, ForwardCache)> {
        Ok(mlp_forward(&self.params, &self.spec, input)?)
    }
}

/// Conditional discriminator: `[x | one-hot y] -> logit`, with the feature
/// embedding read from the last hidden layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorModel {
    pub spec: MlpSpec,
    pub params: MlpParams,
}

impl DiscriminatorModel {
    pub(crate) fn build(
        n_features: usize,
        hidden: &[usize],
        n_classes: usize,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(n_features + n_classes);
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let spec = MlpSpec::new(sizes, HIDDEN_SLOPE, OutputActivation::Linear)?;
        let params = MlpParams::init(&spec, rng);
        Ok(Self { spec, params })
    }

    pub fn forward(&self, input: &Matrix) -> Result<(Matrix, ForwardCache)> {
        Ok(mlp_forward(&self.params, &self.spec, input)?)
    }

    /// Index of the layer whose post-activation is the feature embedding.
    pub fn feature_layer(&self) -> usize {
        self.spec.n_layers() - 2
    }

    /// Width of the feature embedding (the last hidden layer).
    pub fn feature_dim(&self) -> usize {
        self.spec.layer_sizes[self.spec.layer_sizes.len() - 2]
    }
}

/// One-hot encode labels into an `(n x n_classes)` matrix.
pub(crate) fn one_hot(labels: &[usize], n_classes: usize) -> Matrix {
    let mut m = Matrix::zeros(labels.len(), n_classes);
    for (r, &c) in labels.iter().enumerate() {
        m.set(r, c, 1.0);
    }
    m
}
