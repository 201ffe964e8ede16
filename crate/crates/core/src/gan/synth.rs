//! Post-training balanced synthesis: exactly `k` samples per class,
//! inverse-scaled to original units.

use crate::data::{inverse_scale, Dataset};
use crate::numerics::{Matrix, SeededRng};

use super::model::one_hot;
use super::train::TrainedGan;
use super::{GanError, Result};

/// Generate `per_class` samples for every class of the model.
///
/// Rows come out grouped by class in model order; labels carry the original
/// class names. Features are inverse-scaled into original units, so every
/// value lies inside the scaler's `[min, max]` (tanh output implies a
/// bounded pre-image). Deterministic given the seed.
pub fn synthesize_balanced(model: &TrainedGan, per_class: usize, seed: u64) -> Result<Dataset> {
    if per_class == 0 {
        return Err(GanError::Config("per_class must be >= 1".into()));
    }
    let n_classes = model.n_classes();
    let d = model.n_features();
    let latent = model.config.latent_dim;
    let mut rng = SeededRng::new(seed);

    let mut x = Matrix::zeros(n_classes * per_class, d);
    let mut y = Vec::with_capacity(n_classes * per_class);
    for class in 0..n_classes {
        let mut noise = Matrix::zeros(per_class, latent);
        rng.fill_gaussian(&mut noise);
        let labels = one_hot(&vec![class; per_class], n_classes);
        let (scaled, _) = model.generator.forward(&noise.hstack(&labels)?)?;
        for r in 0..per_class {
            x.row_mut(class * per_class + r)
                .copy_from_slice(scaled.row(r));
            y.push(class);
        }
    }

    let scaled_ds = Dataset::new(x, y, model.schema.clone(), model.class_names.clone())?;
    Ok(inverse_scale(&scaled_ds, &model.scaler)?)
}
