//! The adversarial training loop with statistical feedback.
//!
//! Per mini-batch:
//!
//! 1. **Discriminator step**: fresh noise `Z`, fake batch `G(Z, Y)`,
//!    smoothed cross-entropy on real and fake logits, gradients clipped to
//!    the global-norm threshold, one optimizer update.
//! 2. **Generator step**: fresh noise `Z'`, fake batch through the
//!    discriminator for its logits and feature embedding `F_g`, the real
//!    batch through the discriminator for `F_r` (held constant), then the
//!    composite loss: adversarial term plus weighted mean-variance and
//!    correlation feedback on the embeddings. Clipped, one update.
//!
//! The `cgan` variant runs the identical code path with both feedback
//! weights at zero, so its trajectory matches a zero-weight `f2gan` run
//! bit for bit. The `wgan_gp` variant swaps in the Wasserstein critic
//! objective with gradient penalty and `critic_steps` critic updates per
//! generator step; feedback terms do not apply and are logged as zero.
//!
//! Every random draw comes from one stream seeded by the config, so a run
//! is fully determined by (data, config).

#![allow(clippy::needless_range_loop)] // index loops touch several arrays at once

use serde::{Deserialize, Serialize};

use crate::data::{
    apply_scale, class_stats, fit_scaler, make_batches, Batch, Dataset, FeatureSchema, ScalerParams,
};
use crate::numerics::{
    adam_step, clip_gradients, mlp_backward, mlp_backward_with_taps, mlp_grad_of_input_gradient,
    Matrix, NumericsError, OptimizerState, SeededRng,
};

use super::config::{GanConfig, GanVariant};
use super::losses::{
    adversarial_loss_g_grad, adversarial_loss_g_nonsat_grad, corr_feedback_grad,
    discriminator_loss_grads, generator_loss, mv_feedback_grad, wgan_gp_critic_loss,
};
use super::model::{one_hot, DiscriminatorModel, GeneratorModel};
use super::{GanError, Result};

/// Mean losses over one epoch (and the per-batch shape reused internally).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLosses {
    pub l_d: f64,
    pub l_adv: f64,
    pub l_mv: f64,
    pub l_corr: f64,
    pub l_g: f64,
}

pub type TrainingLog = Vec<EpochLosses>;

/// A trained conditional generative model plus everything needed to sample
/// from it in original units.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedGan {
    pub config: GanConfig,
    pub schema: FeatureSchema,
    pub class_names: Vec<String>,
    pub scaler: ScalerParams,
    pub generator: GeneratorModel,
    pub discriminator: DiscriminatorModel,
    pub log: TrainingLog,
}

impl TrainedGan {
    pub fn n_features(&self) -> usize {
        self.schema.n_features()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }
}

/// Which network an optimizer step updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkKind {
    Generator,
    Discriminator,
}

/// Emitted once per optimizer step by [`train_instrumented`].
#[derive(Debug, Clone, Copy)]
pub struct StepDiagnostics {
    pub epoch: usize,
    pub batch: usize,
    pub network: NetworkKind,
    /// Global gradient norm at the moment of the update (after clipping).
    pub post_clip_grad_norm: f64,
    /// Loss of the step that produced the gradient.
    pub loss: f64,
}

/// Train a model on a dataset in original units.
///
/// Labels are encoded and features normalized to `[-1, 1]` internally; the
/// fitted scaler travels with the model so synthesis can invert it.
pub fn train(ds: &Dataset, config: &GanConfig) -> Result<TrainedGan> {
    train_instrumented(ds, config, |_| {})
}

/// [`train`] with a per-optimizer-step observer for instrumentation.
pub fn train_instrumented(
    ds: &Dataset,
    config: &GanConfig,
    observer: impl FnMut(&StepDiagnostics),
) -> Result<TrainedGan> {
    config.validate()?;
    let config = config.clone().canonicalize();

    if ds.n_classes() == 0 {
        return Err(GanError::Config("dataset has no classes".into()));
    }
    let stats = class_stats(ds);
    if let Some(c) = stats.counts.iter().position(|&n| n < 2) {
        return Err(GanError::Config(format!(
            "class {:?} has {} samples; training needs at least 2 per class",
            ds.class_names[c], stats.counts[c]
        )));
    }

    let scaler = fit_scaler(ds);
    let scaled = apply_scale(ds, &scaler)?;

    let mut rng = SeededRng::new(config.seed);
    let generator = GeneratorModel::build(
        config.latent_dim,
        &config.gen_hidden,
        ds.n_features(),
        ds.n_classes(),
        &mut rng,
    )?;
    let discriminator = DiscriminatorModel::build(
        ds.n_features(),
        &config.disc_hidden,
        ds.n_classes(),
        &mut rng,
    )?;

    let mut trainer = Trainer {
        config: config.clone(),
        n_features: ds.n_features(),
        n_classes: ds.n_classes(),
        gen_opt: OptimizerState::new(
            &generator.spec,
            config.learning_rate,
            config.beta1,
            config.beta2,
            config.epsilon,
        ),
        disc_opt: OptimizerState::new(
            &discriminator.spec,
            config.learning_rate,
            config.beta1,
            config.beta2,
            config.epsilon,
        ),
        gen: generator,
        disc: discriminator,
        rng,
        observer,
    };

    let mut log = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let mut batches = make_batches(&scaled, config.batch_size, &mut trainer.rng)?;
        merge_trailing_singleton(&mut batches);

        let mut sums = EpochLosses {
            l_d: 0.0,
            l_adv: 0.0,
            l_mv: 0.0,
            l_corr: 0.0,
            l_g: 0.0,
        };
        let n_batches = batches.len() as f64;
        for (batch_idx, (bx, by)) in batches.iter().enumerate() {
            let step = match config.variant {
                GanVariant::F2gan | GanVariant::Cgan => trainer.bce_step(epoch, batch_idx, bx, by),
                GanVariant::WganGp => trainer.wgan_step(epoch, batch_idx, bx, by),
            };
            let losses = step.map_err(|e| add_context(e, epoch, batch_idx))?;
            sums.l_d += losses.l_d;
            sums.l_adv += losses.l_adv;
            sums.l_mv += losses.l_mv;
            sums.l_corr += losses.l_corr;
            sums.l_g += losses.l_g;
        }
        log.push(EpochLosses {
            l_d: sums.l_d / n_batches,
            l_adv: sums.l_adv / n_batches,
            l_mv: sums.l_mv / n_batches,
            l_corr: sums.l_corr / n_batches,
            l_g: sums.l_g / n_batches,
        });
    }

    Ok(TrainedGan {
        config,
        schema: ds.schema.clone(),
        class_names: ds.class_names.clone(),
        scaler,
        generator: trainer.gen,
        discriminator: trainer.disc,
        log,
    })
}

/// Feedback statistics need batches of >= 2 samples, so a trailing
/// single-row batch is folded into its predecessor.
fn merge_trailing_singleton(batches: &mut Vec<Batch>) {
    if batches.len() >= 2 && batches.last().is_some_and(|(x, _)| x.rows() == 1) {
        let (x1, mut y1) = batches.pop().unwrap();
        let (x0, y0) = batches.last_mut().unwrap();
        let mut data = x0.data().to_vec();
        data.extend_from_slice(x1.data());
        *x0 = Matrix::from_vec(x0.rows() + 1, x0.cols(), data).expect("widths match");
        y0.append(&mut y1);
    }
}

fn add_context(e: GanError, epoch: usize, batch: usize) -> GanError {
    match e {
        GanError::Substrate(source) => GanError::Numerics {
            epoch,
            batch,
            source,
        },
        other => other,
    }
}

fn ensure_finite(value: f64, quantity: &str, epoch: usize, batch: usize) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(GanError::NonFiniteLoss {
            quantity: quantity.to_string(),
            epoch,
            batch,
        })
    }
}

struct Trainer<F: FnMut(&StepDiagnostics)> {
    config: GanConfig,
    n_features: usize,
    n_classes: usize,
    gen: GeneratorModel,
    disc: DiscriminatorModel,
    gen_opt: OptimizerState,
    disc_opt: OptimizerState,
    rng: SeededRng,
    observer: F,
}

impl<F: FnMut(&StepDiagnostics)> Trainer<F> {
    fn gaussian(&mut self, rows: usize, cols: usize) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        self.rng.fill_gaussian(&mut m);
        m
    }

    fn filled(rows: usize, value: f64) -> Matrix {
        let mut m = Matrix::zeros(rows, 1);
        for v in m.data_mut() {
            *v = value;
        }
        m
    }

    fn update_disc(
        &mut self,
        mut grads: crate::numerics::MlpGrads,
        loss: f64,
        epoch: usize,
        batch: usize,
    ) -> std::result::Result<(), NumericsError> {
        clip_gradients(&mut grads, self.config.grad_clip);
        let norm = grads.global_norm();
        adam_step(&mut self.disc.params, &grads, &mut self.disc_opt)?;
        (self.observer)(&StepDiagnostics {
            epoch,
            batch,
            network: NetworkKind::Discriminator,
            post_clip_grad_norm: norm,
            loss,
        });
        Ok(())
    }

    fn update_gen(
        &mut self,
        mut grads: crate::numerics::MlpGrads,
        loss: f64,
        epoch: usize,
        batch: usize,
    ) -> std::result::Result<(), NumericsError> {
        clip_gradients(&mut grads, self.config.grad_clip);
        let norm = grads.global_norm();
        adam_step(&mut self.gen.params, &grads, &mut self.gen_opt)?;
        (self.observer)(&StepDiagnostics {
            epoch,
            batch,
            network: NetworkKind::Generator,
            post_clip_grad_norm: norm,
            loss,
        });
        Ok(())
    }

    /// One discriminator update plus one feedback generator update
    /// (the f2gan path; cgan is the same with zero feedback weights).
    fn bce_step(
        &mut self,
        epoch: usize,
        batch: usize,
        bx: &Matrix,
        by: &[usize],
    ) -> Result<EpochLosses> {
        let s = bx.rows();
        let labels = one_hot(by, self.n_classes);
        let real_in = bx.hstack(&labels)?;

        // Discriminator step.
        let noise = self.gaussian(s, self.config.latent_dim);
        let (fake_x, _) = self.gen.forward(&noise.hstack(&labels)?)?;
        let fake_in = fake_x.hstack(&labels)?;
        let (real_logits, cache_real) = self.disc.forward(&real_in)?;
        let (fake_logits, cache_fake) = self.disc.forward(&fake_in)?;
        let (l_d, real_grad, fake_grad) =
            discriminator_loss_grads(&real_logits, &fake_logits, self.config.label_smoothing)?;
        ensure_finite(l_d, "discriminator loss", epoch, batch)?;
        let (mut d_grads, _) =
            mlp_backward(&self.disc.params, &self.disc.spec, &cache_real, &real_grad)?;
        let (d_grads_fake, _) =
            mlp_backward(&self.disc.params, &self.disc.spec, &cache_fake, &fake_grad)?;
        d_grads.add_scaled(&d_grads_fake, 1.0)?;
        self.update_disc(d_grads, l_d, epoch, batch)?;

        // Generator step against the just-updated discriminator.
        let noise = self.gaussian(s, self.config.latent_dim);
        let (fake_x, cache_gen) = self.gen.forward(&noise.hstack(&labels)?)?;
        let fake_in = fake_x.hstack(&labels)?;
        let (fake_logits, cache_fake_d) = self.disc.forward(&fake_in)?;
        let (_, cache_real_d) = self.disc.forward(&real_in)?;
        let feature_layer = self.disc.feature_layer();
        let features_real = cache_real_d.hidden(feature_layer); // held constant
        let features_gen = cache_fake_d.hidden(feature_layer);

        let (l_adv, adv_grad) = if self.config.non_saturating {
            (
                super::losses::adversarial_loss_g_nonsat(&fake_logits)?,
                adversarial_loss_g_nonsat_grad(&fake_logits),
            )
        } else {
            (
                super::losses::adversarial_loss_g(&fake_logits)?,
                adversarial_loss_g_grad(&fake_logits),
            )
        };
        let (l_mv, mv_grad) = mv_feedback_grad(features_real, features_gen)?;
        let (l_corr, corr_grad) = corr_feedback_grad(features_real, features_gen)?;
        let l_g = generator_loss(
            l_adv,
            l_mv,
            l_corr,
            self.config.mv_weight,
            self.config.corr_weight,
        )?;
        ensure_finite(l_g, "generator loss", epoch, batch)?;

        let mut feedback_grad = Matrix::zeros(s, self.disc.feature_dim());
        feedback_grad.add_scaled(&mv_grad, self.config.mv_weight)?;
        feedback_grad.add_scaled(&corr_grad, self.config.corr_weight)?;
        let (_, disc_input_grad) = mlp_backward_with_taps(
            &self.disc.params,
            &self.disc.spec,
            &cache_fake_d,
            Some(&adv_grad),
            &[(feature_layer, &feedback_grad)],
        )?;
        let x_grad = disc_input_grad.slice_cols(0, self.n_features)?;
        let (g_grads, _) = mlp_backward(&self.gen.params, &self.gen.spec, &cache_gen, &x_grad)?;
        self.update_gen(g_grads, l_g, epoch, batch)?;

        Ok(EpochLosses {
            l_d,
            l_adv,
            l_mv,
            l_corr,
            l_g,
        })
    }

    /// `critic_steps` Wasserstein critic updates with gradient penalty,
    /// then one generator update.
    fn wgan_step(
        &mut self,
        epoch: usize,
        batch: usize,
        bx: &Matrix,
        by: &[usize],
    ) -> Result<EpochLosses> {
        let s = bx.rows();
        let labels = one_hot(by, self.n_classes);
        let real_in = bx.hstack(&labels)?;
        let d = self.n_features;

        let mut critic_loss_sum = 0.0;
        for _ in 0..self.config.critic_steps {
            let noise = self.gaussian(s, self.config.latent_dim);
            let (fake_x, _) = self.gen.forward(&noise.hstack(&labels)?)?;
            let fake_in = fake_x.hstack(&labels)?;
            let (real_scores, cache_real) = self.disc.forward(&real_in)?;
            let (fake_scores, cache_fake) = self.disc.forward(&fake_in)?;

            // Per-sample interpolates between real and fake features; labels
            // are shared, so only the feature block is interpolated.
            let mut blend = vec![0.0; s];
            for b in &mut blend {
                *b = self.rng.next_f64();
            }
            let mut interp = Matrix::zeros(s, d);
            for r in 0..s {
                let u = blend[r];
                for (o, (&xr, &xf)) in interp
                    .row_mut(r)
                    .iter_mut()
                    .zip(bx.row(r).iter().zip(fake_x.row(r)))
                {
                    *o = u * xr + (1.0 - u) * xf;
                }
            }
            let interp_in = interp.hstack(&labels)?;
            let (_, cache_interp) = self.disc.forward(&interp_in)?;
            let ones = Self::filled(s, 1.0);
            let (_, interp_input_grad) =
                mlp_backward(&self.disc.params, &self.disc.spec, &cache_interp, &ones)?;
            let grad_norms: Vec<f64> = (0..s)
                .map(|r| {
                    interp_input_grad.row(r)[..d]
                        .iter()
                        .map(|&g| g * g)
                        .sum::<f64>()
                        .sqrt()
                })
                .collect();

            let l_critic = wgan_gp_critic_loss(
                &real_scores,
                &fake_scores,
                &grad_norms,
                self.config.gp_weight,
            )?;
            ensure_finite(l_critic, "critic loss", epoch, batch)?;

            let inv = 1.0 / s as f64;
            let (mut d_grads, _) = mlp_backward(
                &self.disc.params,
                &self.disc.spec,
                &cache_fake,
                &Self::filled(s, inv),
            )?;
            let (real_part, _) = mlp_backward(
                &self.disc.params,
                &self.disc.spec,
                &cache_real,
                &Self::filled(s, -inv),
            )?;
            d_grads.add_scaled(&real_part, 1.0)?;

            if self.config.gp_weight > 0.0 {
                // Penalty cotangent per sample: 2w/s * (|g| - 1)/|g| * g on
                // the feature block, zero on the label block.
                let mut tangent = Matrix::zeros(s, d + self.n_classes);
                for r in 0..s {
                    let norm = grad_norms[r];
                    let coef = 2.0 * self.config.gp_weight * inv * (norm - 1.0) / norm.max(1e-12);
                    for (t, &g) in tangent.row_mut(r)[..d]
                        .iter_mut()
                        .zip(&interp_input_grad.row(r)[..d])
                    {
                        *t = coef * g;
                    }
                }
                let penalty_grads = mlp_grad_of_input_gradient(
                    &self.disc.params,
                    &self.disc.spec,
                    &interp_in,
                    &tangent,
                )?;
                d_grads.add_scaled(&penalty_grads, 1.0)?;
            }
            self.update_disc(d_grads, l_critic, epoch, batch)?;
            critic_loss_sum += l_critic;
        }

        // Generator step: maximize the critic score of fakes.
        let noise = self.gaussian(s, self.config.latent_dim);
        let (fake_x, cache_gen) = self.gen.forward(&noise.hstack(&labels)?)?;
        let fake_in = fake_x.hstack(&labels)?;
        let (scores, cache_fake_d) = self.disc.forward(&fake_in)?;
        let l_g = -scores.data().iter().sum::<f64>() / s as f64;
        ensure_finite(l_g, "generator loss", epoch, batch)?;
        let (_, disc_input_grad) = mlp_backward(
            &self.disc.params,
            &self.disc.spec,
            &cache_fake_d,
            &Self::filled(s, -1.0 / s as f64),
        )?;
        let x_grad = disc_input_grad.slice_cols(0, d)?;
        let (g_grads, _) = mlp_backward(&self.gen.params, &self.gen.spec, &cache_gen, &x_grad)?;
        self.update_gen(g_grads, l_g, epoch, batch)?;

        Ok(EpochLosses {
            l_d: critic_loss_sum / self.config.critic_steps as f64,
            l_adv: l_g,
            l_mv: 0.0,
            l_corr: 0.0,
            l_g,
        })
    }
}
