//! Loss functions for the adversarial models and the statistical feedback
//! terms computed on discriminator feature embeddings.
//!
//! All logits are raw (pre-sigmoid); the logistic transform happens inside
//! the losses in log-space, so nothing saturates to NaN/Inf. Log terms are
//! floored at `ln(1e-12)` so a perfectly confident discriminator yields a
//! large finite loss with zero gradient rather than an infinity.
//!
//! Gradient functions live alongside the values; the training loop composes
//! them with the MLP backward passes. Every gradient here is checked against
//! central finite differences in the test suites.

use crate::numerics::stats::{column_means, column_stds, correlation_matrix, DEGENERATE_STD};
use crate::numerics::Matrix;

use super::{GanError, Result};

/// Smallest probability fed to a logarithm.
const LOG_EPS: f64 = 1e-12;

fn log_floor() -> f64 {
    LOG_EPS.ln()
}

/// Numerically stable `ln(1 + e^x)`.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `log(sigmoid(x))`, floored.
fn log_sigmoid(x: f64) -> f64 {
    (-softplus(-x)).max(log_floor())
}

/// `log(1 - sigmoid(x))`, floored.
fn log_one_minus_sigmoid(x: f64) -> f64 {
    (-softplus(x)).max(log_floor())
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn check_logits(name: &str, logits: &Matrix) -> Result<()> {
    if logits.cols() != 1 {
        return Err(GanError::Config(format!(
            "{name} must be a single-column logit batch, got {} columns",
            logits.cols()
        )));
    }
    if logits.rows() == 0 {
        return Err(GanError::Config(format!("{name} batch is empty")));
    }
    Ok(())
}

/// Saturating generator objective: mean of `log(1 - sigmoid(logit))` over
/// the generated batch. The generator minimizes this (driving it toward
/// -inf as it fools the discriminator); the floor keeps it finite.
pub fn adversarial_loss_g(fake_logits: &Matrix) -> Result<f64> {
    check_logits("fake_logits", fake_logits)?;
    let n = fake_logits.rows() as f64;
    Ok(fake_logits
        .data()
        .iter()
        .map(|&l| log_one_minus_sigmoid(l))
        .sum::<f64>()
        / n)
}

/// d(adversarial_loss_g)/d(logit), per sample. Zero where the floor binds.
pub fn adversarial_loss_g_grad(fake_logits: &Matrix) -> Matrix {
    let n = fake_logits.rows() as f64;
    fake_logits.map(|l| {
        if -softplus(l) < log_floor() {
            0.0
        } else {
            -sigmoid(l) / n
        }
    })
}

/// Non-saturating alternative: mean of `-log(sigmoid(logit))`, minimized by
/// the generator. Selected by the `non_saturating` config flag.
pub(crate) fn adversarial_loss_g_nonsat(fake_logits: &Matrix) -> Result<f64> {
    check_logits("fake_logits", fake_logits)?;
    let n = fake_logits.rows() as f64;
    Ok(fake_logits
        .data()
        .iter()
        .map(|&l| -log_sigmoid(l))
        .sum::<f64>()
        / n)
}

pub(crate) fn adversarial_loss_g_nonsat_grad(fake_logits: &Matrix) -> Matrix {
    let n = fake_logits.rows() as f64;
    fake_logits.map(|l| {
        if -softplus(-l) < log_floor() {
            0.0
        } else {
            -(1.0 - sigmoid(l)) / n
        }
    })
}

fn check_feature_pair(f_real: &Matrix, f_gen: &Matrix) -> Result<()> {
    if f_real.cols() != f_gen.cols() {
        return Err(GanError::Config(format!(
            "feature batches disagree on dimension: {} vs {}",
            f_real.cols(),
            f_gen.cols()
        )));
    }
    if f_real.rows() < 2 || f_gen.rows() < 2 {
        return Err(GanError::Config(
            "feature statistics need batches of at least 2 samples".into(),
        ));
    }
    Ok(())
}

/// Mean-variance feedback: squared distance between per-dimension means plus
/// squared distance between per-dimension population standard deviations of
/// the two embedding batches. Gradients flow only through `f_gen`; the real
/// batch is held constant.
pub fn mv_feedback(f_real: &Matrix, f_gen: &Matrix) -> Result<f64> {
    check_feature_pair(f_real, f_gen)?;
    let mu_r = column_means(f_real);
    let mu_g = column_means(f_gen);
    let sd_r = column_stds(f_real);
    let sd_g = column_stds(f_gen);
    let mean_term: f64 = mu_r
        .iter()
        .zip(&mu_g)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    let std_term: f64 = sd_r
        .iter()
        .zip(&sd_g)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    Ok(mean_term + std_term)
}

/// Value and gradient of [`mv_feedback`] with respect to `f_gen`.
pub fn mv_feedback_grad(f_real: &Matrix, f_gen: &Matrix) -> Result<(f64, Matrix)> {
    let value = mv_feedback(f_real, f_gen)?;
    let n = f_gen.rows() as f64;
    let mu_r = column_means(f_real);
    let mu_g = column_means(f_gen);
    let sd_r = column_stds(f_real);
    let sd_g = column_stds(f_gen);

    let mut grad = Matrix::zeros(f_gen.rows(), f_gen.cols());
    for r in 0..f_gen.rows() {
        let row = f_gen.row(r);
        let out = grad.row_mut(r);
        for k in 0..row.len() {
            let mean_part = 2.0 * (mu_g[k] - mu_r[k]) / n;
            // d(sigma)/dF = (F - mu) / (n * sigma); guard the degenerate case.
            let std_part =
                2.0 * (sd_g[k] - sd_r[k]) * (row[k] - mu_g[k]) / (n * sd_g[k].max(1e-12));
            out[k] = mean_part + std_part;
        }
    }
    Ok((value, grad))
}

/// Correlation feedback: squared Frobenius norm of the difference between
/// the Pearson correlation matrices of the two embedding batches. Features
/// with population std below 1e-8 contribute identity rows/columns.
pub fn corr_feedback(f_real: &Matrix, f_gen: &Matrix) -> Result<f64> {
    check_feature_pair(f_real, f_gen)?;
    let rho_r = correlation_matrix(f_real);
    let rho_g = correlation_matrix(f_gen);
    let mut sum = 0.0;
    for (&a, &b) in rho_r.data().iter().zip(rho_g.data()) {
        let d = a - b;
        sum += d * d;
    }
    Ok(sum)
}

/// Value and gradient of [`corr_feedback`] with respect to `f_gen`.
///
/// Entries touching a degenerate feature are constants under the documented
/// convention and therefore carry no gradient.
pub fn corr_feedback_grad(f_real: &Matrix, f_gen: &Matrix) -> Result<(f64, Matrix)> {
    check_feature_pair(f_real, f_gen)?;
    let k = f_gen.cols();
    let n = f_gen.rows();
    let nf = n as f64;

    let rho_r = correlation_matrix(f_real);
    let rho_g = correlation_matrix(f_gen);
    let mu_g = column_means(f_gen);
    let sd_g = column_stds(f_gen);
    let degenerate: Vec<bool> = sd_g.iter().map(|&s| s < DEGENERATE_STD).collect();

    let mut value = 0.0;
    for (&a, &b) in rho_r.data().iter().zip(rho_g.data()) {
        let d = a - b;
        value += d * d;
    }

    // Upstream gradient into rho_g: E = 2 (rho_g - rho_r), symmetric.
    // rho[i][j] = C[i][j] / (sd_i sd_j) for i != j, so
    //   C_bar[i][j]  = E[i][j] / (sd_i sd_j)
    //   sd_bar[i]    = -(2 / sd_i) * sum_{j != i} E[i][j] rho_g[i][j]
    //   C_bar[i][i] += sd_bar[i] / (2 sd_i)        (sd_i = sqrt(C[i][i]))
    let mut c_bar = Matrix::zeros(k, k);
    for i in 0..k {
        if degenerate[i] {
            continue;
        }
        let mut sd_bar = 0.0;
        for j in 0..k {
            if i == j || degenerate[j] {
                continue;
            }
            let e = 2.0 * (rho_g.get(i, j) - rho_r.get(i, j));
            c_bar.set(i, j, e / (sd_g[i] * sd_g[j]));
            sd_bar += -e * rho_g.get(i, j) / sd_g[i];
        }
        // Both (i, j) and (j, i) terms contribute; E is symmetric so the
        // loop above counts each once and the factor 2 lands here.
        sd_bar *= 2.0;
        // Diagonal path: sd_i = sqrt(C[i][i]).
        c_bar.set(i, i, sd_bar / (2.0 * sd_g[i]));
    }

    // C[i][j] = (1/n) sum_s G[s][i] G[s][j] with G centered:
    //   G_bar = (2/n) G C_bar (C_bar symmetric), then remove column means.
    let mut centered = f_gen.clone();
    for r in 0..n {
        for (v, &m) in centered.row_mut(r).iter_mut().zip(&mu_g) {
            *v -= m;
        }
    }
    let mut g_bar = centered.matmul(&c_bar)?;
    for v in g_bar.data_mut() {
        *v *= 2.0 / nf;
    }
    let col_mean = column_means(&g_bar);
    for r in 0..n {
        for (v, &m) in g_bar.row_mut(r).iter_mut().zip(&col_mean) {
            *v -= m;
        }
    }
    Ok((value, g_bar))
}

/// Composite generator objective: adversarial term plus weighted feedback.
pub fn generator_loss(
    adv: f64,
    mv: f64,
    corr: f64,
    mv_weight: f64,
    corr_weight: f64,
) -> Result<f64> {
    if mv_weight < 0.0 || corr_weight < 0.0 {
        return Err(GanError::Config(format!(
            "feedback weights must be >= 0, got ({mv_weight}, {corr_weight})"
        )));
    }
    Ok(adv + mv_weight * mv + corr_weight * corr)
}

/// Discriminator cross-entropy with a smoothed real target: real samples
/// are pushed toward `alpha`, fake samples toward 0.
pub fn discriminator_loss(real_logits: &Matrix, fake_logits: &Matrix, alpha: f64) -> Result<f64> {
    check_logits("real_logits", real_logits)?;
    check_logits("fake_logits", fake_logits)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(GanError::Config(format!(
            "label smoothing must lie in (0, 1], got {alpha}"
        )));
    }
    let n_real = real_logits.rows() as f64;
    let n_fake = fake_logits.rows() as f64;
    let real_term: f64 = real_logits
        .data()
        .iter()
        .map(|&l| alpha * log_sigmoid(l) + (1.0 - alpha) * log_one_minus_sigmoid(l))
        .sum::<f64>()
        / n_real;
    let fake_term: f64 = fake_logits
        .data()
        .iter()
        .map(|&l| log_one_minus_sigmoid(l))
        .sum::<f64>()
        / n_fake;
    Ok(-real_term - fake_term)
}

/// Value plus per-sample logit gradients of [`discriminator_loss`].
pub fn discriminator_loss_grads(
    real_logits: &Matrix,
    fake_logits: &Matrix,
    alpha: f64,
) -> Result<(f64, Matrix, Matrix)> {
    let value = discriminator_loss(real_logits, fake_logits, alpha)?;
    let n_real = real_logits.rows() as f64;
    let n_fake = fake_logits.rows() as f64;
    let real_grad = real_logits.map(|l| {
        let s = sigmoid(l);
        let d_logsig = if -softplus(-l) < log_floor() {
            0.0
        } else {
            1.0 - s
        };
        let d_log1m = if -softplus(l) < log_floor() { 0.0 } else { -s };
        -(alpha * d_logsig + (1.0 - alpha) * d_log1m) / n_real
    });
    let fake_grad = fake_logits.map(|l| {
        if -softplus(l) < log_floor() {
            0.0
        } else {
            sigmoid(l) / n_fake
        }
    });
    Ok((value, real_grad, fake_grad))
}

/// Wasserstein critic loss with gradient penalty:
/// `mean(fake) - mean(real) + weight * mean((|grad| - 1)^2)`.
///
/// The caller supplies the per-interpolate input-gradient norms; critic
/// scores come from a linear (un-squashed) head.
pub fn wgan_gp_critic_loss(
    real_scores: &Matrix,
    fake_scores: &Matrix,
    interpolate_grad_norms: &[f64],
    weight: f64,
) -> Result<f64> {
    check_logits("real_scores", real_scores)?;
    check_logits("fake_scores", fake_scores)?;
    if weight < 0.0 {
        return Err(GanError::Config(format!(
            "gradient-penalty weight must be >= 0, got {weight}"
        )));
    }
    let mean = |m: &Matrix| m.data().iter().sum::<f64>() / m.rows() as f64;
    let penalty = if interpolate_grad_norms.is_empty() {
        0.0
    } else {
        interpolate_grad_norms
            .iter()
            .map(|&g| (g - 1.0) * (g - 1.0))
            .sum::<f64>()
            / interpolate_grad_norms.len() as f64
    };
    Ok(mean(fake_scores) - mean(real_scores) + weight * penalty)
}
