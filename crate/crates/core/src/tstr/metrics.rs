//! Multiclass classification metrics with macro averaging.

#![allow(clippy::needless_range_loop)] // index loops touch several arrays at once

use super::{Result, TstrError};

/// Accuracy plus macro-averaged precision/recall/F1 and the confusion
/// matrix. The 0/0 case (a class never seen and never predicted) counts as
/// zero in the macro averages.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `confusion[true_class][predicted_class]`.
    pub confusion: Vec<Vec<usize>>,
}

/// Compute metrics over `n_classes` classes.
pub fn classification_metrics(
    y_true: &[usize],
    y_pred: &[usize],
    n_classes: usize,
) -> Result<ClassificationMetrics> {
    if y_true.is_empty() || y_true.len() != y_pred.len() {
        return Err(TstrError::Contract(format!(
            "label vectors must be equal nonempty lengths, got {} and {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    if let Some(&bad) = y_true.iter().chain(y_pred).find(|&&c| c >= n_classes) {
        return Err(TstrError::Contract(format!(
            "label {bad} out of range for {n_classes} classes"
        )));
    }

    let mut confusion = vec![vec![0usize; n_classes]; n_classes];
    let mut correct = 0usize;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        confusion[t][p] += 1;
        if t == p {
            correct += 1;
        }
    }
    let accuracy = correct as f64 / y_true.len() as f64;

    let mut precision_sum = 0.0;
    let mut recall_sum = 0.0;
    let mut f1_sum = 0.0;
    for c in 0..n_classes {
        let tp = confusion[c][c] as f64;
        let predicted: f64 = (0..n_classes).map(|t| confusion[t][c] as f64).sum();
        let actual: f64 = confusion[c].iter().map(|&v| v as f64).sum();
        let precision = if predicted > 0.0 { tp / predicted } else { 0.0 };
        let recall = if actual > 0.0 { tp / actual } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        precision_sum += precision;
        recall_sum += recall;
        f1_sum += f1;
    }

    let k = n_classes as f64;
    Ok(ClassificationMetrics {
        accuracy,
        precision: precision_sum / k,
        recall: recall_sum / k,
        f1: f1_sum / k,
        confusion,
    })
}
