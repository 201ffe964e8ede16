//! Versioned model serialization.
//!
//! A model file is a single JSON document:
//!
//! ```text
//! {
//!   "format_version": 1,
//!   "config": { ... },
//!   "schema": {"feature_names": [...], "label_column": "..."},
//!   "class_names": [...],
//!   "scaler": {"min": [...], "max": [...]},
//!   "generator": {"layers": [{"w": [[...]], "b": [...]}, ...]},
//!   "discriminator": {"layers": [...]},
//!   "log": [{"l_d": ..., "l_adv": ..., "l_mv": ..., "l_corr": ..., "l_g": ...}, ...]
//! }
//! ```
//!
//! Every float is written with 17 significant digits (`{:.16e}`), which
//! round-trips `f64` exactly; combined with fixed field order this makes
//! serialization canonical, so save -> load -> save reproduces the file
//! byte for byte. Layer shapes are implicit in the weight matrices; the
//! network architecture is reconstructed from them and cross-checked
//! against the stored config on load.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{FeatureSchema, ScalerParams};
use crate::numerics::{LayerParams, Matrix, MlpParams, MlpSpec, OutputActivation};

use super::config::GanConfig;
use super::model::{DiscriminatorModel, GeneratorModel, HIDDEN_SLOPE};
use super::train::{EpochLosses, TrainedGan};
use super::{GanError, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct LayerFile {
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    layers: Vec<LayerFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    config: GanConfig,
    schema: FeatureSchema,
    class_names: Vec<String>,
    scaler: ScalerParams,
    generator: NetworkFile,
    discriminator: NetworkFile,
    log: Vec<EpochLosses>,
}

/// serde_json formatter that pins floats to 17 significant digits.
struct CanonicalFloats;

impl serde_json::ser::Formatter for CanonicalFloats {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

fn network_to_file(params: &MlpParams) -> NetworkFile {
    NetworkFile {
        layers: params
            .layers
            .iter()
            .map(|l| LayerFile {
                w: (0..l.weights.rows())
                    .map(|r| l.weights.row(r).to_vec())
                    .collect(),
                b: l.bias.clone(),
            })
            .collect(),
    }
}

fn network_from_file(
    file: &NetworkFile,
    output: OutputActivation,
    path: &str,
    name: &str,
) -> Result<(MlpSpec, MlpParams)> {
    let bad = |detail: String| GanError::ModelFormat {
        path: path.to_string(),
        detail,
    };
    if file.layers.is_empty() {
        return Err(bad(format!("{name} has no layers")));
    }

    let mut layer_sizes = Vec::with_capacity(file.layers.len() + 1);
    let mut layers = Vec::with_capacity(file.layers.len());
    for (i, layer) in file.layers.iter().enumerate() {
        let rows = layer.w.len();
        if rows == 0 {
            return Err(bad(format!("{name} layer {i} has an empty weight matrix")));
        }
        let cols = layer.w[0].len();
        if cols == 0 || layer.w.iter().any(|r| r.len() != cols) {
            return Err(bad(format!("{name} layer {i} has ragged weight rows")));
        }
        if layer.b.len() != rows {
            return Err(bad(format!(
                "{name} layer {i}: {} bias entries for {rows} output units",
                layer.b.len()
            )));
        }
        if i == 0 {
            layer_sizes.push(cols);
        } else if cols != layer_sizes[i] {
            return Err(bad(format!(
                "{name} layer {i} expects {cols} inputs but the previous layer emits {}",
                layer_sizes[i]
            )));
        }
        layer_sizes.push(rows);

        let data: Vec<f64> = layer.w.iter().flatten().copied().collect();
        if data.iter().chain(&layer.b).any(|v| !v.is_finite()) {
            return Err(bad(format!("{name} layer {i} contains non-finite values")));
        }
        layers.push(LayerParams {
            weights: Matrix::from_vec(rows, cols, data)
                .map_err(|e| bad(format!("{name} layer {i}: {e}")))?,
            bias: layer.b.clone(),
        });
    }

    let spec =
        MlpSpec::new(layer_sizes, HIDDEN_SLOPE, output).map_err(|e| bad(format!("{name}: {e}")))?;
    Ok((spec, MlpParams { layers }))
}

/// Write a trained model to `path`.
pub fn save_model(model: &TrainedGan, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        config: model.config.clone(),
        schema: model.schema.clone(),
        class_names: model.class_names.clone(),
        scaler: model.scaler.clone(),
        generator: network_to_file(&model.generator.params),
        discriminator: network_to_file(&model.discriminator.params),
        log: model.log.clone(),
    };

    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, CanonicalFloats);
    file.serialize(&mut ser)
        .map_err(|e| GanError::ModelFormat {
            path: path_str.clone(),
            detail: e.to_string(),
        })?;
    buf.push(b'\n');

    let mut out = fs::File::create(path).map_err(|source| GanError::Io {
        path: path_str.clone(),
        source,
    })?;
    out.write_all(&buf).map_err(|source| GanError::Io {
        path: path_str,
        source,
    })
}

/// Load a model from `path`, validating version, shapes, and invariants.
/// Never yields a partially constructed model.
pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedGan> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| GanError::Io {
        path: path_str.clone(),
        source,
    })?;

    // Version is checked before the strict parse so future formats produce
    // a version error rather than an opaque field mismatch.
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| GanError::ModelFormat {
            path: path_str.clone(),
            detail: e.to_string(),
        })?;
    let version = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| GanError::ModelFormat {
            path: path_str.clone(),
            detail: "missing format_version".into(),
        })?;
    if version != u64::from(MODEL_FORMAT_VERSION) {
        return Err(GanError::ModelVersion {
            path: path_str,
            expected: MODEL_FORMAT_VERSION,
            found: version as u32,
        });
    }

    let file: ModelFile = serde_json::from_value(value).map_err(|e| GanError::ModelFormat {
        path: path_str.clone(),
        detail: e.to_string(),
    })?;
    let bad = |detail: String| GanError::ModelFormat {
        path: path_str.clone(),
        detail,
    };

    file.config.validate()?;
    file.schema
        .validate()
        .map_err(|e| bad(format!("schema: {e}")))?;
    let d = file.schema.n_features();
    let c = file.class_names.len();
    if c == 0 {
        return Err(bad("no classes".into()));
    }
    if file.scaler.min.len() != d || file.scaler.max.len() != d {
        return Err(bad(format!(
            "scaler covers {} features, schema names {d}",
            file.scaler.min.len()
        )));
    }
    if file.log.len() != file.config.epochs {
        return Err(bad(format!(
            "log has {} entries for {} epochs",
            file.log.len(),
            file.config.epochs
        )));
    }

    let (gen_spec, gen_params) = network_from_file(
        &file.generator,
        OutputActivation::Tanh,
        &path_str,
        "generator",
    )?;
    let (disc_spec, disc_params) = network_from_file(
        &file.discriminator,
        OutputActivation::Linear,
        &path_str,
        "discriminator",
    )?;

    let mut expected_gen = vec![file.config.latent_dim + c];
    expected_gen.extend_from_slice(&file.config.gen_hidden);
    expected_gen.push(d);
    if gen_spec.layer_sizes != expected_gen {
        return Err(bad(format!(
            "generator layers {:?} do not match config {:?}",
            gen_spec.layer_sizes, expected_gen
        )));
    }
    let mut expected_disc = vec![d + c];
    expected_disc.extend_from_slice(&file.config.disc_hidden);
    expected_disc.push(1);
    if disc_spec.layer_sizes != expected_disc {
        return Err(bad(format!(
            "discriminator layers {:?} do not match config {:?}",
            disc_spec.layer_sizes, expected_disc
        )));
    }

    Ok(TrainedGan {
        config: file.config,
        schema: file.schema,
        class_names: file.class_names,
        scaler: file.scaler,
        generator: GeneratorModel {
            spec: gen_spec,
            params: gen_params,
        },
        discriminator: DiscriminatorModel {
            spec: disc_spec,
            params: disc_params,
        },
        log: file.log,
    })
}
