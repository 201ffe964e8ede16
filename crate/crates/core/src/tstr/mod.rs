//! Train-on-Synthetic, Test-on-Real evaluation.
//!
//! Four small classifiers (a Gini decision tree, k-nearest-neighbors, a
//! softmax MLP, and a one-vs-rest linear SVM) are fitted on synthetic data
//! and scored on held-out real data with macro-averaged accuracy /
//! precision / recall / F1. High TSTR scores mean the synthetic data
//! preserved the class structure of the real distribution.
//!
//! Fits for different classifier kinds are independent; each individual fit
//! is sequential and deterministic given its seed.

mod knn;
mod metrics;
mod nn;
mod svm;
mod tree;

pub use metrics::{classification_metrics, ClassificationMetrics};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{apply_scale, fit_scaler, Dataset};
use crate::numerics::{derive_subseed, Matrix};

#[derive(Debug, Error)]
pub enum TstrError {
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error(transparent)]
    Substrate(#[from] crate::numerics::NumericsError),

    #[error(transparent)]
    Data(#[from] crate::data::DataError),
}

pub type Result<T> = std::result::Result<T, TstrError>;

/// Classifier family plus its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierKind {
    DecisionTree { max_depth: usize },
    Knn { k: usize },
    NeuralNet { hidden: Vec<usize>, epochs: usize },
    LinearSvm { penalty: f64, epochs: usize },
}

impl ClassifierKind {
    /// The four defaults used by the benchmark harness, in report order.
    pub fn default_suite() -> Vec<ClassifierKind> {
        vec![
            ClassifierKind::DecisionTree { max_depth: 12 },
            ClassifierKind::Knn { k: 5 },
            ClassifierKind::NeuralNet {
                hidden: vec![64, 32],
                epochs: 200,
            },
            ClassifierKind::LinearSvm {
                penalty: 1e-3,
                epochs: 200,
            },
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierKind::DecisionTree { .. } => "decision_tree",
            ClassifierKind::Knn { .. } => "knn",
            ClassifierKind::NeuralNet { .. } => "neural_net",
            ClassifierKind::LinearSvm { .. } => "linear_svm",
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(TstrError::InvalidHyperparameter(msg));
        match self {
            ClassifierKind::DecisionTree { .. } => Ok(()), // depth 0 is a valid degenerate tree
            ClassifierKind::Knn { k } => {
                if *k == 0 {
                    return bad("knn needs k >= 1".into());
                }
                Ok(())
            }
            ClassifierKind::NeuralNet { hidden, epochs } => {
                if hidden.contains(&0) {
                    return bad("hidden widths must be >= 1".into());
                }
                if *epochs == 0 {
                    return bad("neural_net needs epochs >= 1".into());
                }
                Ok(())
            }
            ClassifierKind::LinearSvm { penalty, epochs } => {
                if *penalty < 0.0 {
                    return bad("svm penalty must be >= 0".into());
                }
                if *epochs == 0 {
                    return bad("linear_svm needs epochs >= 1".into());
                }
                Ok(())
            }
        }
    }
}

/// A fitted classifier. Prediction is deterministic; documented tie-breaks
/// always favor the smallest class index.
#[derive(Debug, Clone)]
pub struct TrainedClassifier {
    pub kind: ClassifierKind,
    pub n_classes: usize,
    n_features: usize,
    state: ClassifierState,
}

#[derive(Debug, Clone)]
enum ClassifierState {
    Tree(tree::TreeNode),
    Knn(knn::KnnState),
    NeuralNet(nn::NnState),
    LinearSvm(svm::SvmState),
}

/// Fit a classifier on (already scaled) training data.
///
/// Every class must have at least one sample (two for the neural net, which
/// needs a gradient signal per class).
pub fn fit_classifier(
    kind: &ClassifierKind,
    train: &Dataset,
    seed: u64,
) -> Result<TrainedClassifier> {
    kind.validate()?;
    let mut counts = vec![0usize; train.n_classes()];
    for &c in &train.y {
        counts[c] += 1;
    }
    let min_needed = match kind {
        ClassifierKind::NeuralNet { .. } => 2,
        _ => 1,
    };
    if let Some(c) = counts.iter().position(|&n| n < min_needed) {
        return Err(TstrError::Contract(format!(
            "class {:?} has {} samples; {} needs at least {min_needed}",
            train.class_names[c],
            counts[c],
            kind.name()
        )));
    }

    let state = match kind {
        ClassifierKind::DecisionTree { max_depth } => {
            ClassifierState::Tree(tree::fit(&train.x, &train.y, train.n_classes(), *max_depth))
        }
        ClassifierKind::Knn { k } => ClassifierState::Knn(knn::fit(&train.x, &train.y, *k)),
        ClassifierKind::NeuralNet { hidden, epochs } => ClassifierState::NeuralNet(nn::fit(
            &train.x,
            &train.y,
            train.n_classes(),
            hidden,
            *epochs,
            seed,
        )?),
        ClassifierKind::LinearSvm { penalty, epochs } => ClassifierState::LinearSvm(svm::fit(
            &train.x,
            &train.y,
            train.n_classes(),
            *penalty,
            *epochs,
            seed,
        )),
    };
    Ok(TrainedClassifier {
        kind: kind.clone(),
        n_classes: train.n_classes(),
        n_features: train.n_features(),
        state,
    })
}

/// Predict one label per row. Empty input yields empty labels.
pub fn predict(model: &TrainedClassifier, x: &Matrix) -> Result<Vec<usize>> {
    if x.rows() == 0 {
        return Ok(Vec::new());
    }
    if x.cols() != model.n_features {
        return Err(TstrError::Contract(format!(
            "input has {} features, model was trained on {}",
            x.cols(),
            model.n_features
        )));
    }
    Ok(match &model.state {
        ClassifierState::Tree(root) => tree::predict(root, x),
        ClassifierState::Knn(state) => knn::predict(state, x, model.n_classes),
        ClassifierState::NeuralNet(state) => nn::predict(state, x)?,
        ClassifierState::LinearSvm(state) => svm::predict(state, x),
    })
}

/// Per-classifier scores of one TSTR run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub classifier: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `confusion[true_class][predicted_class]`.
    pub confusion: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Full TSTR result: one row per classifier plus the cross-classifier
/// averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TstrReport {
    pub per_classifier: Vec<ClassifierReport>,
    pub average: MetricSummary,
}

/// Train every classifier kind on the synthetic set and score it on the
/// real test set.
///
/// Features are scaled with a min/max scaler fitted on the real test data
/// (the real data in scope here), mirroring the generative pipeline's
/// convention of scaling with real-data statistics. Real test labels are
/// re-indexed into the synthetic training set's class order; a real class
/// absent from the synthetic data is a contract error.
pub fn run_tstr(
    synth_train: &Dataset,
    real_test: &Dataset,
    kinds: &[ClassifierKind],
    seed: u64,
) -> Result<TstrReport> {
    if synth_train.schema != real_test.schema {
        return Err(TstrError::SchemaMismatch(format!(
            "synthetic and real schemas differ: {:?} vs {:?}",
            synth_train.schema.feature_names, real_test.schema.feature_names
        )));
    }
    if kinds.is_empty() {
        return Err(TstrError::Contract("no classifier kinds requested".into()));
    }

    // Align real labels with the synthetic class order by name.
    let y_true: Vec<usize> = real_test
        .y
        .iter()
        .map(|&c| {
            let name = &real_test.class_names[c];
            synth_train
                .class_names
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| {
                    TstrError::Contract(format!(
                        "real class {name:?} is absent from the synthetic training data"
                    ))
                })
        })
        .collect::<Result<_>>()?;

    let scaler = fit_scaler(real_test);
    let train_scaled = apply_scale(synth_train, &scaler)?;
    let test_scaled = apply_scale(real_test, &scaler)?;

    let n_classes = synth_train.n_classes();
    let mut per_classifier = Vec::with_capacity(kinds.len());
    for kind in kinds {
        let sub_seed = derive_subseed(seed, kind.name());
        let model = fit_classifier(kind, &train_scaled, sub_seed)?;
        let y_pred = predict(&model, &test_scaled.x)?;
        let m = classification_metrics(&y_true, &y_pred, n_classes)?;
        per_classifier.push(ClassifierReport {
            classifier: kind.name().to_string(),
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            confusion: m.confusion,
        });
    }

    let k = per_classifier.len() as f64;
    let average = MetricSummary {
        accuracy: per_classifier.iter().map(|r| r.accuracy).sum::<f64>() / k,
        precision: per_classifier.iter().map(|r| r.precision).sum::<f64>() / k,
        recall: per_classifier.iter().map(|r| r.recall).sum::<f64>() / k,
        f1: per_classifier.iter().map(|r| r.f1).sum::<f64>() / k,
    };
    Ok(TstrReport {
        per_classifier,
        average,
    })
}
