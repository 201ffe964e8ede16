//! Dataset schema, CSV ingestion, label encoding, `[-1, 1]` feature scaling
//! with an exact inverse, mini-batching, and class-imbalance statistics.
//!
//! Datasets are immutable after load and every operation here is pure, so
//! concurrent readers are safe.
//!
//! The CSV contract: UTF-8, comma-separated, `\n` newlines, one header row
//! with the feature names in schema order followed by the label column, one
//! sample per row. Feature cells are decimal reals with an optional
//! scientific exponent; label cells are arbitrary strings. Labels are mapped
//! to dense indices in first-appearance order.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{Matrix, SeededRng};

/// Errors raised by dataset handling.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: missing column {column:?}")]
    MissingColumn { path: String, column: String },

    #[error("{path}: row {row}, column {column:?}: cannot parse {value:?} as a number")]
    BadCell {
        path: String,
        /// 1-based file row (the header is row 1).
        row: usize,
        column: String,
        value: String,
    },

    #[error("{path}: row {row}: non-finite feature value in column {column:?}")]
    NonFiniteCell {
        path: String,
        row: usize,
        column: String,
    },

    #[error("{path}: file has a header but no data rows")]
    Empty { path: String },

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, DataError>;

/// Named feature layout of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub feature_names: Vec<String>,
    pub label_column: String,
}

impl FeatureSchema {
    pub fn new(feature_names: Vec<String>, label_column: impl Into<String>) -> Result<Self> {
        let label_column = label_column.into();
        let schema = Self {
            feature_names,
            label_column,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_names.is_empty() {
            return Err(DataError::InvalidSchema("no feature names".into()));
        }
        let mut seen = HashMap::new();
        for name in &self.feature_names {
            if name.is_empty() {
                return Err(DataError::InvalidSchema("empty feature name".into()));
            }
            if seen.insert(name, ()).is_some() {
                return Err(DataError::InvalidSchema(format!(
                    "duplicate feature name {name:?}"
                )));
            }
        }
        if self.label_column.is_empty() {
            return Err(DataError::InvalidSchema("empty label column name".into()));
        }
        if self.feature_names.contains(&self.label_column) {
            return Err(DataError::InvalidSchema(format!(
                "label column {:?} collides with a feature name",
                self.label_column
            )));
        }
        Ok(())
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }
}

/// Feature matrix plus encoded integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    /// Dense class indices, one per row of `x`.
    pub y: Vec<usize>,
    pub schema: FeatureSchema,
    /// Index -> original label string, in first-appearance order.
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        x: Matrix,
        y: Vec<usize>,
        schema: FeatureSchema,
        class_names: Vec<String>,
    ) -> Result<Self> {
        schema.validate()?;
        if x.rows() == 0 {
            return Err(DataError::Contract("dataset needs at least one row".into()));
        }
        if x.rows() != y.len() {
            return Err(DataError::Contract(format!(
                "{} feature rows but {} labels",
                x.rows(),
                y.len()
            )));
        }
        if x.cols() != schema.n_features() {
            return Err(DataError::Contract(format!(
                "{} feature columns but schema names {}",
                x.cols(),
                schema.n_features()
            )));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= class_names.len()) {
            return Err(DataError::Contract(format!(
                "label index {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        Ok(Self {
            x,
            y,
            schema,
            class_names,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.x.rows()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }
}

/// Per-feature min/max fitted on training data, in original units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalerParams {
    pub fn n_features(&self) -> usize {
        self.min.len()
    }
}

/// Per-class sample counts and imbalance ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassStats {
    /// Count per class index.
    pub counts: Vec<usize>,
    /// Cardinality of the majority class.
    pub majority: usize,
    /// `counts[c] / majority` per class.
    pub ratios: Vec<f64>,
}

/// A mini-batch: feature rows plus their labels.
pub type Batch = (Matrix, Vec<usize>);

/// Load a dataset from CSV.
///
/// The header must contain every schema feature name and the label column
/// (extra columns are ignored). Row order is preserved; labels are encoded
/// in first-appearance order.
pub fn load_csv(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    schema.validate()?;

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|source| DataError::Csv {
            path: path_str.clone(),
            source,
        })?;

    let headers = reader
        .headers()
        .map_err(|source| DataError::Csv {
            path: path_str.clone(),
            source,
        })?
        .clone();
    let column_index = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn {
                path: path_str.clone(),
                column: name.to_string(),
            })
    };
    let feature_cols: Vec<usize> = schema
        .feature_names
        .iter()
        .map(|n| column_index(n))
        .collect::<Result<_>>()?;
    let label_col = column_index(&schema.label_column)?;

    let mut values: Vec<f64> = Vec::new();
    let mut y: Vec<usize> = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut class_index: HashMap<String, usize> = HashMap::new();
    let mut n_rows = 0usize;

    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|source| DataError::Csv {
            path: path_str.clone(),
            source,
        })?;
        let file_row = i + 2; // header is file row 1
        for (&col, name) in feature_cols.iter().zip(&schema.feature_names) {
            let cell = record.get(col).unwrap_or("");
            let v: f64 = cell.trim().parse().map_err(|_| DataError::BadCell {
                path: path_str.clone(),
                row: file_row,
                column: name.clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DataError::NonFiniteCell {
                    path: path_str.clone(),
                    row: file_row,
                    column: name.clone(),
                });
            }
            values.push(v);
        }
        let label = record.get(label_col).unwrap_or("").to_string();
        let next = class_names.len();
        let idx = *class_index.entry(label.clone()).or_insert_with(|| {
            class_names.push(label);
            next
        });
        y.push(idx);
        n_rows += 1;
    }

    if n_rows == 0 {
        return Err(DataError::Empty { path: path_str });
    }

    let x = Matrix::from_vec(n_rows, schema.n_features(), values)
        .map_err(|e| DataError::Contract(e.to_string()))?;
    Dataset::new(x, y, schema.clone(), class_names)
}

/// Write a dataset as CSV: feature columns in schema order, then the label
/// column. Floats are written in shortest round-trip form, so numeric
/// content survives a reload exactly.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|source| DataError::Csv {
            path: path_str.clone(),
            source,
        })?;

    let mut header: Vec<&str> = ds.schema.feature_names.iter().map(String::as_str).collect();
    header.push(&ds.schema.label_column);
    writer
        .write_record(&header)
        .map_err(|source| DataError::Csv {
            path: path_str.clone(),
            source,
        })?;

    let mut record: Vec<String> = Vec::with_capacity(ds.n_features() + 1);
    for r in 0..ds.n_samples() {
        record.clear();
        for &v in ds.x.row(r) {
            record.push(format!("{v}"));
        }
        record.push(ds.class_names[ds.y[r]].clone());
        writer
            .write_record(&record)
            .map_err(|source| DataError::Csv {
                path: path_str.clone(),
                source,
            })?;
    }
    writer.flush().map_err(|source| DataError::Io {
        path: path_str,
        source,
    })
}

/// Fit per-feature min/max on a dataset (the real training split, by
/// convention; the same scaler is reused for synthetic and test data).
pub fn fit_scaler(ds: &Dataset) -> ScalerParams {
    let d = ds.n_features();
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for r in 0..ds.n_samples() {
        for ((lo, hi), &v) in min.iter_mut().zip(&mut max).zip(ds.x.row(r)) {
            *lo = lo.min(v);
            *hi = hi.max(v);
        }
    }
    ScalerParams { min, max }
}

fn check_scaler(ds: &Dataset, sp: &ScalerParams) -> Result<()> {
    if sp.n_features() != ds.n_features() || sp.max.len() != ds.n_features() {
        return Err(DataError::Contract(format!(
            "scaler covers {} features, dataset has {}",
            sp.n_features(),
            ds.n_features()
        )));
    }
    Ok(())
}

/// Affine map per feature: training min -> -1, max -> +1. Constant features
/// (max == min) map to 0.
pub fn apply_scale(ds: &Dataset, sp: &ScalerParams) -> Result<Dataset> {
    check_scaler(ds, sp)?;
    let mut scaled = ds.clone();
    for r in 0..scaled.n_samples() {
        for ((v, &lo), &hi) in scaled.x.row_mut(r).iter_mut().zip(&sp.min).zip(&sp.max) {
            let span = hi - lo;
            *v = if span == 0.0 {
                0.0
            } else {
                2.0 * (*v - lo) / span - 1.0
            };
        }
    }
    Ok(scaled)
}

/// Exact affine inverse of [`apply_scale`]. Constant features restore the
/// training minimum regardless of the scaled value.
pub fn inverse_scale(ds: &Dataset, sp: &ScalerParams) -> Result<Dataset> {
    check_scaler(ds, sp)?;
    let mut original = ds.clone();
    for r in 0..original.n_samples() {
        for ((v, &lo), &hi) in original.x.row_mut(r).iter_mut().zip(&sp.min).zip(&sp.max) {
            let span = hi - lo;
            *v = if span == 0.0 {
                lo
            } else {
                (*v + 1.0) / 2.0 * span + lo
            };
        }
    }
    Ok(original)
}

/// Split a dataset into shuffled mini-batches.
///
/// One fresh random permutation per call; all batches have `batch_size` rows
/// except possibly the last. The union of the batches is exactly the
/// dataset.
pub fn make_batches(ds: &Dataset, batch_size: usize, rng: &mut SeededRng) -> Result<Vec<Batch>> {
    if batch_size == 0 {
        return Err(DataError::Contract("batch size must be >= 1".into()));
    }
    let n = ds.n_samples();
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);

    let mut batches = Vec::with_capacity(n.div_ceil(batch_size));
    for chunk in order.chunks(batch_size) {
        let mut x = Matrix::zeros(chunk.len(), ds.n_features());
        let mut y = Vec::with_capacity(chunk.len());
        for (out_row, &src) in chunk.iter().enumerate() {
            x.row_mut(out_row).copy_from_slice(ds.x.row(src));
            y.push(ds.y[src]);
        }
        batches.push((x, y));
    }
    Ok(batches)
}

/// Deterministic per-class prefix split: for every class, the first
/// `ceil(train_fraction * count)` rows (in dataset order) go to the train
/// side, the rest to the test side. Both sides keep the full class-name
/// table, so label indices stay aligned.
pub fn stratified_split(ds: &Dataset, train_fraction: f64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DataError::Contract(format!(
            "train_fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let stats = class_stats(ds);
    let mut take = vec![0usize; ds.n_classes()];
    let mut targets: Vec<usize> = stats
        .counts
        .iter()
        .map(|&n| (train_fraction * n as f64).ceil() as usize)
        .collect();
    // A class must not vanish from the test side when it has spare rows.
    for (t, &n) in targets.iter_mut().zip(&stats.counts) {
        if *t == n && n > 1 {
            *t = n - 1;
        }
    }

    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    for r in 0..ds.n_samples() {
        let c = ds.y[r];
        if take[c] < targets[c] {
            take[c] += 1;
            train_rows.push(r);
        } else {
            test_rows.push(r);
        }
    }
    if train_rows.is_empty() || test_rows.is_empty() {
        return Err(DataError::Contract(
            "split produced an empty side; dataset too small".into(),
        ));
    }

    let subset = |rows: &[usize]| -> Result<Dataset> {
        let mut x = Matrix::zeros(rows.len(), ds.n_features());
        let mut y = Vec::with_capacity(rows.len());
        for (i, &r) in rows.iter().enumerate() {
            x.row_mut(i).copy_from_slice(ds.x.row(r));
            y.push(ds.y[r]);
        }
        Dataset::new(x, y, ds.schema.clone(), ds.class_names.clone())
    };
    Ok((subset(&train_rows)?, subset(&test_rows)?))
}

/// Per-class counts, majority count, and imbalance ratios.
pub fn class_stats(ds: &Dataset) -> ClassStats {
    let mut counts = vec![0usize; ds.n_classes()];
    for &c in &ds.y {
        counts[c] += 1;
    }
    let majority = counts.iter().copied().max().unwrap_or(0);
    let ratios = counts.iter().map(|&c| c as f64 / majority as f64).collect();
    ClassStats {
        counts,
        majority,
        ratios,
    }
}
