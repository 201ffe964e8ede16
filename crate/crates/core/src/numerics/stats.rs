//! Column statistics shared by the feedback losses and the fidelity metrics:
//! means, population standard deviations, and Pearson correlation matrices
//! with a fixed convention for degenerate (near-constant) features.

use super::Matrix;

/// Features with population std below this are treated as degenerate when
/// building correlation matrices.
pub const DEGENERATE_STD: f64 = 1e-8;

/// Per-column means.
pub fn column_means(m: &Matrix) -> Vec<f64> {
    let n = m.rows() as f64;
    let mut means = vec![0.0; m.cols()];
    for r in 0..m.rows() {
        for (mean, &v) in means.iter_mut().zip(m.row(r)) {
            *mean += v;
        }
    }
    for mean in &mut means {
        *mean /= n;
    }
    means
}

/// Per-column population variances (divide by N, not N-1).
pub fn column_variances(m: &Matrix) -> Vec<f64> {
    let means = column_means(m);
    let n = m.rows() as f64;
    let mut vars = vec![0.0; m.cols()];
    for r in 0..m.rows() {
        for ((var, &mean), &v) in vars.iter_mut().zip(&means).zip(m.row(r)) {
            let d = v - mean;
            *var += d * d;
        }
    }
    for var in &mut vars {
        *var /= n;
    }
    vars
}

/// Per-column population standard deviations.
pub fn column_stds(m: &Matrix) -> Vec<f64> {
    column_variances(m).into_iter().map(f64::sqrt).collect()
}

/// Pearson correlation matrix computed across feature dimensions.
///
/// Any column whose population std is below [`DEGENERATE_STD`] contributes
/// zero off-diagonal entries and one on the diagonal, so constant features
/// never produce NaNs.
pub fn correlation_matrix(m: &Matrix) -> Matrix {
    let k = m.cols();
    let n = m.rows() as f64;
    let means = column_means(m);
    let stds = column_stds(m);

    // Population covariance, centered once.
    let mut cov = Matrix::zeros(k, k);
    for r in 0..m.rows() {
        let row = m.row(r);
        for i in 0..k {
            let di = row[i] - means[i];
            if di == 0.0 {
                continue;
            }
            let cov_row = cov.row_mut(i);
            for (j, c) in cov_row.iter_mut().enumerate() {
                *c += di * (row[j] - means[j]);
            }
        }
    }

    let mut corr = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let v = if i == j {
                1.0
            } else if stds[i] < DEGENERATE_STD || stds[j] < DEGENERATE_STD {
                0.0
            } else {
                cov.get(i, j) / n / (stds[i] * stds[j])
            };
            corr.set(i, j, v);
        }
    }
    corr
}
