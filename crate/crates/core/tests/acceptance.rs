//! Acceptance suite: every release gate runs here and prints one
//! `criterion N: PASS/FAIL` line. The heavyweight comparison experiment
//! (criteria 3 and 4) trains its models once and shares them across tests.
//!
//! Run with `cargo test -p faultsynth --test acceptance` (the workspace
//! profile builds tests optimized; the full suite takes a few minutes of
//! CPU, dominated by the six-model ablation experiment).

#![allow(clippy::needless_range_loop)]

use std::sync::OnceLock;
use std::time::Instant;

use faultsynth::data::{
    apply_scale, class_stats, fit_scaler, inverse_scale, stratified_split, write_csv, Dataset,
};
use faultsynth::fidelity::{
    evaluate_fidelity, ks_statistic, mmd_gaussian, wasserstein_1d, SigmaPolicy,
};
use faultsynth::gan::{
    adversarial_loss_g, adversarial_loss_g_grad, corr_feedback, corr_feedback_grad,
    discriminator_loss, discriminator_loss_grads, generator_loss, load_model, mv_feedback,
    mv_feedback_grad, save_model, synthesize_balanced, train, train_instrumented,
    wgan_gp_critic_loss, GanConfig, GanVariant, TrainedGan,
};
use faultsynth::numerics::{
    finite_diff_gradient, mlp_backward, mlp_backward_with_taps, mlp_forward,
    mlp_grad_of_input_gradient, Matrix, MlpParams, MlpSpec, OutputActivation, SeededRng,
};
use faultsynth::scenario::{generate_external, generate_internal, ScenarioConfig};
use faultsynth::tstr::{fit_classifier, predict, run_tstr, ClassifierKind};

fn report(criterion: &str, ok: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
}

// ---------------------------------------------------------------------------
// Criterion 1: gradient suite
// ---------------------------------------------------------------------------

/// Max relative error between analytic and central-difference gradients.
fn max_rel_err(analytic: &MlpParams, numeric: &MlpParams) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, n) in analytic.layers.iter().zip(&numeric.layers) {
        for (&x, &y) in a
            .weights
            .data()
            .iter()
            .chain(&a.bias)
            .zip(n.weights.data().iter().chain(&n.bias))
        {
            let scale = x.abs().max(y.abs()).max(1e-6);
            worst = worst.max((x - y).abs() / scale);
        }
    }
    worst
}

#[test]
fn criterion_1_gradient_suite() {
    let started = Instant::now();
    let h = 1e-5;
    let tol = 1e-4;
    let mut worst: f64 = 0.0;

    for trial in 0..20u64 {
        let mut rng = SeededRng::new(9_000 + trial);
        let d = 2 + (rng.next_below(3) as usize); // features
        let c = 2 + (rng.next_below(2) as usize); // classes
        let latent = 3;
        let batch = 4 + (rng.next_below(3) as usize);
        let feat_width = 3 + (rng.next_below(3) as usize);

        let gen_spec = MlpSpec::new(vec![latent + c, 5, d], 0.2, OutputActivation::Tanh).unwrap();
        let disc_spec =
            MlpSpec::new(vec![d + c, 6, feat_width, 1], 0.2, OutputActivation::Linear).unwrap();
        let gen = MlpParams::init(&gen_spec, &mut rng);
        let disc = MlpParams::init(&disc_spec, &mut rng);
        let feature_layer = disc_spec.n_layers() - 2;

        let mut noise = Matrix::zeros(batch, latent + c);
        rng.fill_gaussian(&mut noise);
        let mut real = Matrix::zeros(batch, d + c);
        rng.fill_gaussian(&mut real);
        let alpha = 0.9;
        let (mv_w, corr_w) = (0.7, 0.3);

        // Real-batch features are fixed (stop-grad) for the generator path.
        let (_, real_cache) = mlp_forward(&disc, &disc_spec, &real).unwrap();
        let f_real = real_cache.hidden(feature_layer).clone();

        let fake_input = |g: &MlpParams| -> Matrix {
            let (x, _) = mlp_forward(g, &gen_spec, &noise).unwrap();
            // the generated features replace the feature block of `real`
            let mut full = real.clone();
            for r in 0..batch {
                full.row_mut(r)[..d].copy_from_slice(x.row(r));
            }
            full
        };

        // --- generator losses: adversarial, mv, corr, composite ---
        let eval_parts = |g: &MlpParams| -> (f64, f64, f64) {
            let (logits, cache) = mlp_forward(&disc, &disc_spec, &fake_input(g)).unwrap();
            let f_gen = cache.hidden(feature_layer);
            (
                adversarial_loss_g(&logits).unwrap(),
                mv_feedback(&f_real, f_gen).unwrap(),
                corr_feedback(&f_real, f_gen).unwrap(),
            )
        };
        type LossFn<'a> = Box<dyn Fn(&MlpParams) -> f64 + 'a>;
        let gen_losses: [(&str, LossFn); 4] = [
            ("adversarial", Box::new(|g| eval_parts(g).0)),
            ("mean-variance", Box::new(|g| eval_parts(g).1)),
            ("correlation", Box::new(|g| eval_parts(g).2)),
            (
                "composite",
                Box::new(|g| {
                    let (adv, mv, corr) = eval_parts(g);
                    generator_loss(adv, mv, corr, mv_w, corr_w).unwrap()
                }),
            ),
        ];

        for (name, loss_fn) in &gen_losses {
            let numeric = finite_diff_gradient(loss_fn.as_ref(), &gen, h);

            // Analytic: backprop through D (taps at the feature layer) into G.
            let (fake_full, gen_cache) = {
                let (x, cache) = mlp_forward(&gen, &gen_spec, &noise).unwrap();
                let mut full = real.clone();
                for r in 0..batch {
                    full.row_mut(r)[..d].copy_from_slice(x.row(r));
                }
                (full, cache)
            };
            let (logits, disc_cache) = mlp_forward(&disc, &disc_spec, &fake_full).unwrap();
            let f_gen = disc_cache.hidden(feature_layer);
            let adv_grad = adversarial_loss_g_grad(&logits);
            let (_, mv_grad) = mv_feedback_grad(&f_real, f_gen).unwrap();
            let (_, corr_grad) = corr_feedback_grad(&f_real, f_gen).unwrap();

            let (out_grad, tap): (Option<Matrix>, Matrix) = match *name {
                "adversarial" => (Some(adv_grad), Matrix::zeros(batch, f_gen.cols())),
                "mean-variance" => (None, mv_grad),
                "correlation" => (None, corr_grad),
                _ => {
                    let mut tap = Matrix::zeros(batch, f_gen.cols());
                    tap.add_scaled(&mv_grad, mv_w).unwrap();
                    tap.add_scaled(&corr_grad, corr_w).unwrap();
                    (Some(adv_grad), tap)
                }
            };
            let (_, input_grad) = mlp_backward_with_taps(
                &disc,
                &disc_spec,
                &disc_cache,
                out_grad.as_ref(),
                &[(feature_layer, &tap)],
            )
            .unwrap();
            let x_grad = input_grad.slice_cols(0, d).unwrap();
            let (analytic, _) = mlp_backward(&gen, &gen_spec, &gen_cache, &x_grad).unwrap();

            let err = max_rel_err(&analytic, &numeric);
            assert!(
                err < tol,
                "{name} loss gradient error {err} on trial {trial}"
            );
            worst = worst.max(err);
        }

        // --- discriminator BCE loss ---
        let fake_fixed = fake_input(&gen);
        let disc_loss = |p: &MlpParams| -> f64 {
            let (lr, _) = mlp_forward(p, &disc_spec, &real).unwrap();
            let (lf, _) = mlp_forward(p, &disc_spec, &fake_fixed).unwrap();
            discriminator_loss(&lr, &lf, alpha).unwrap()
        };
        let numeric = finite_diff_gradient(&disc_loss, &disc, h);
        let (lr, cache_r) = mlp_forward(&disc, &disc_spec, &real).unwrap();
        let (lf, cache_f) = mlp_forward(&disc, &disc_spec, &fake_fixed).unwrap();
        let (_, gr, gf) = discriminator_loss_grads(&lr, &lf, alpha).unwrap();
        let (mut analytic, _) = mlp_backward(&disc, &disc_spec, &cache_r, &gr).unwrap();
        let (fake_part, _) = mlp_backward(&disc, &disc_spec, &cache_f, &gf).unwrap();
        analytic.add_scaled(&fake_part, 1.0).unwrap();
        let err = max_rel_err(&analytic, &numeric);
        assert!(
            err < tol,
            "discriminator loss gradient error {err} on trial {trial}"
        );
        worst = worst.max(err);

        // --- Wasserstein critic loss with gradient penalty ---
        let gp_weight = 10.0;
        let mut blend = vec![0.0; batch];
        for b in &mut blend {
            *b = rng.next_f64();
        }
        let mut interp = real.clone();
        for r in 0..batch {
            let u = blend[r];
            for (o, &xf) in interp.row_mut(r)[..d]
                .iter_mut()
                .zip(&fake_fixed.row(r)[..d])
            {
                *o = u * *o + (1.0 - u) * xf;
            }
        }
        let critic_loss = |p: &MlpParams| -> f64 {
            let (sr, _) = mlp_forward(p, &disc_spec, &real).unwrap();
            let (sf, _) = mlp_forward(p, &disc_spec, &fake_fixed).unwrap();
            let (_, cache_h) = mlp_forward(p, &disc_spec, &interp).unwrap();
            let ones = Matrix::from_vec(batch, 1, vec![1.0; batch]).unwrap();
            let (_, g_in) = mlp_backward(p, &disc_spec, &cache_h, &ones).unwrap();
            let norms: Vec<f64> = (0..batch)
                .map(|r| g_in.row(r)[..d].iter().map(|&g| g * g).sum::<f64>().sqrt())
                .collect();
            wgan_gp_critic_loss(&sr, &sf, &norms, gp_weight).unwrap()
        };
        let numeric = finite_diff_gradient(&critic_loss, &disc, h);

        let (_, cache_r) = mlp_forward(&disc, &disc_spec, &real).unwrap();
        let (_, cache_f) = mlp_forward(&disc, &disc_spec, &fake_fixed).unwrap();
        let (_, cache_h) = mlp_forward(&disc, &disc_spec, &interp).unwrap();
        let ones = Matrix::from_vec(batch, 1, vec![1.0; batch]).unwrap();
        let (_, interp_grad) = mlp_backward(&disc, &disc_spec, &cache_h, &ones).unwrap();
        let inv = 1.0 / batch as f64;
        let (mut analytic, _) = mlp_backward(
            &disc,
            &disc_spec,
            &cache_f,
            &Matrix::from_vec(batch, 1, vec![inv; batch]).unwrap(),
        )
        .unwrap();
        let (real_part, _) = mlp_backward(
            &disc,
            &disc_spec,
            &cache_r,
            &Matrix::from_vec(batch, 1, vec![-inv; batch]).unwrap(),
        )
        .unwrap();
        analytic.add_scaled(&real_part, 1.0).unwrap();
        let mut tangent = Matrix::zeros(batch, d + c);
        for r in 0..batch {
            let norm: f64 = interp_grad.row(r)[..d]
                .iter()
                .map(|&g| g * g)
                .sum::<f64>()
                .sqrt();
            let coef = 2.0 * gp_weight * inv * (norm - 1.0) / norm.max(1e-12);
            for (t, &g) in tangent.row_mut(r)[..d]
                .iter_mut()
                .zip(&interp_grad.row(r)[..d])
            {
                *t = coef * g;
            }
        }
        let penalty = mlp_grad_of_input_gradient(&disc, &disc_spec, &interp, &tangent).unwrap();
        analytic.add_scaled(&penalty, 1.0).unwrap();
        let err = max_rel_err(&analytic, &numeric);
        assert!(
            err < tol,
            "critic loss gradient error {err} on trial {trial}"
        );
        worst = worst.max(err);
    }

    let elapsed = started.elapsed().as_secs_f64();
    let ok = worst < tol && elapsed < 30.0;
    report(
        "1 (gradient suite)",
        ok,
        &format!("20 configs x 6 losses, max relative error {worst:.2e}, {elapsed:.1}s"),
    );
    assert!(ok);
}

// ---------------------------------------------------------------------------
// Criterion 2: metric oracles
// ---------------------------------------------------------------------------

/// Brute-force Wasserstein-1: explicit merged-grid CDF integration.
fn wasserstein_oracle(a: &[f64], b: &[f64]) -> f64 {
    let mut grid: Vec<f64> = a.iter().chain(b).copied().collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let cdf = |xs: &[f64], t: f64| xs.iter().filter(|&&v| v <= t).count() as f64 / xs.len() as f64;
    grid.windows(2)
        .map(|w| (cdf(a, w[0]) - cdf(b, w[0])).abs() * (w[1] - w[0]))
        .sum()
}

/// Brute-force KS: sup of ECDF differences over every sample point.
fn ks_oracle(a: &[f64], b: &[f64]) -> f64 {
    let cdf = |xs: &[f64], t: f64| xs.iter().filter(|&&v| v <= t).count() as f64 / xs.len() as f64;
    a.iter()
        .chain(b)
        .map(|&t| (cdf(a, t) - cdf(b, t)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn criterion_2_metric_oracles() {
    let mut rng = SeededRng::new(777);
    let mut worst_w: f64 = 0.0;
    let mut worst_ks: f64 = 0.0;
    for trial in 0..1000 {
        let n = 1 + rng.next_below(50) as usize;
        let m = 1 + rng.next_below(50) as usize;
        let spread = [0.5, 1.0, 30.0][trial % 3];
        let shift = [0.0, 0.3, 5.0][(trial / 3) % 3];
        let a: Vec<f64> = (0..n).map(|_| spread * rng.next_gaussian()).collect();
        let b: Vec<f64> = (0..m)
            .map(|_| spread * rng.next_gaussian() + shift)
            .collect();
        worst_w = worst_w.max((wasserstein_1d(&a, &b).unwrap() - wasserstein_oracle(&a, &b)).abs());
        worst_ks = worst_ks.max((ks_statistic(&a, &b).unwrap() - ks_oracle(&a, &b)).abs());
    }

    // MMD hand cases.
    let m = Matrix::from_vec(3, 2, vec![0.4, -0.2, 0.9, 0.1, -0.7, 0.3]).unwrap();
    let self_mmd = mmd_gaussian(&m, &m, SigmaPolicy::Fixed(0.8)).unwrap().abs();
    let a = Matrix::from_vec(1, 1, vec![0.0]).unwrap();
    let b = Matrix::from_vec(1, 1, vec![1.0]).unwrap();
    let singleton = mmd_gaussian(&a, &b, SigmaPolicy::Fixed(1.0)).unwrap();
    let singleton_err = (singleton - (2.0 - 2.0 * (-1.0f64).exp())).abs();

    let ok = worst_w < 1e-10 && worst_ks < 1e-10 && self_mmd < 1e-12 && singleton_err < 1e-12;
    report(
        "2 (metric oracles)",
        ok,
        &format!(
            "1000 pairs: |W err| {worst_w:.2e}, |KS err| {worst_ks:.2e}; MMD self {self_mmd:.2e}, singleton err {singleton_err:.2e}"
        ),
    );
    assert!(ok);
}

// ---------------------------------------------------------------------------
// Criteria 3 + 4: the ablation experiment (shared, trained once)
// ---------------------------------------------------------------------------

const EXPERIMENT_SEEDS: [u64; 3] = [1, 2, 3];
const SYNTH_PER_CLASS: usize = 200;

fn experiment_gan_config(variant: GanVariant, seed: u64) -> GanConfig {
    GanConfig {
        variant,
        latent_dim: 32,
        gen_hidden: vec![64, 128],
        disc_hidden: vec![128, 64],
        batch_size: 128,
        epochs: 300,
        seed,
        mv_weight: if variant == GanVariant::F2gan {
            0.1
        } else {
            0.0
        },
        corr_weight: if variant == GanVariant::F2gan {
            0.001
        } else {
            0.0
        },
        ..GanConfig::default()
    }
}

struct Experiment {
    /// Average per-feature Wasserstein per seed, per variant.
    f2gan_w: Vec<f64>,
    cgan_w: Vec<f64>,
    /// Seed-1 f2gan model for the TSTR criterion.
    f2gan_model: TrainedGan,
    external_test: Dataset,
    internal_model: TrainedGan,
    internal_test: Dataset,
    cpu_seconds: f64,
}

static EXPERIMENT: OnceLock<Experiment> = OnceLock::new();

fn experiment() -> &'static Experiment {
    EXPERIMENT.get_or_init(|| {
        let started = Instant::now();
        let external = generate_external(&ScenarioConfig::external_default()).unwrap();
        let (external_train, external_test) = stratified_split(&external, 0.8).unwrap();
        let internal = generate_internal(&ScenarioConfig::internal_default()).unwrap();
        let (internal_train, internal_test) = stratified_split(&internal, 0.8).unwrap();

        // Independent trainings are thread-safe; run them concurrently.
        let mut handles = Vec::new();
        for &seed in &EXPERIMENT_SEEDS {
            for variant in [GanVariant::F2gan, GanVariant::Cgan] {
                let train_ds = external_train.clone();
                handles.push(std::thread::spawn(move || {
                    let model = train(&train_ds, &experiment_gan_config(variant, seed)).unwrap();
                    let synth =
                        synthesize_balanced(&model, SYNTH_PER_CLASS, 10_000 + seed).unwrap();
                    let w = evaluate_fidelity(&train_ds, &synth, SigmaPolicy::MedianHeuristic)
                        .unwrap()
                        .averages
                        .wasserstein;
                    (variant, seed, w, model)
                }));
            }
        }
        let internal_handle = {
            let train_ds = internal_train.clone();
            std::thread::spawn(move || {
                train(&train_ds, &experiment_gan_config(GanVariant::F2gan, 1)).unwrap()
            })
        };

        let mut f2gan_w = vec![0.0; EXPERIMENT_SEEDS.len()];
        let mut cgan_w = vec![0.0; EXPERIMENT_SEEDS.len()];
        let mut f2gan_model = None;
        for handle in handles {
            let (variant, seed, w, model) = handle.join().unwrap();
            let idx = EXPERIMENT_SEEDS.iter().position(|&s| s == seed).unwrap();
            match variant {
                GanVariant::F2gan => {
                    f2gan_w[idx] = w;
                    if seed == EXPERIMENT_SEEDS[0] {
                        f2gan_model = Some(model);
                    }
                }
                GanVariant::Cgan => cgan_w[idx] = w,
                GanVariant::WganGp => unreachable!(),
            }
        }

        Experiment {
            f2gan_w,
            cgan_w,
            f2gan_model: f2gan_model.unwrap(),
            external_test,
            internal_model: internal_handle.join().unwrap(),
            internal_test,
            cpu_seconds: started.elapsed().as_secs_f64(),
        }
    })
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn criterion_3_ablation_ordering() {
    let exp = experiment();
    let f2 = median(&exp.f2gan_w);
    let cg = median(&exp.cgan_w);
    let ok = f2 < cg;
    report(
        "3 (ablation ordering)",
        ok,
        &format!(
            "median avg-Wasserstein over {} seeds: f2gan {f2:.3} < cgan {cg:.3} (per-seed f2gan {:?}, cgan {:?}; experiment wall {:.0}s)",
            EXPERIMENT_SEEDS.len(),
            exp.f2gan_w.iter().map(|w| (w * 1e3).round() / 1e3).collect::<Vec<_>>(),
            exp.cgan_w.iter().map(|w| (w * 1e3).round() / 1e3).collect::<Vec<_>>(),
            exp.cpu_seconds
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_4_tstr_floor() {
    let exp = experiment();

    let synth = synthesize_balanced(&exp.f2gan_model, SYNTH_PER_CLASS, 4242).unwrap();
    let external = run_tstr(
        &synth,
        &exp.external_test,
        &ClassifierKind::default_suite(),
        5,
    )
    .unwrap();
    let knn = external
        .per_classifier
        .iter()
        .find(|r| r.classifier == "knn")
        .unwrap()
        .accuracy;
    let nn = external
        .per_classifier
        .iter()
        .find(|r| r.classifier == "neural_net")
        .unwrap()
        .accuracy;

    let internal_synth = synthesize_balanced(&exp.internal_model, SYNTH_PER_CLASS, 4243).unwrap();
    let internal = run_tstr(
        &internal_synth,
        &exp.internal_test,
        &ClassifierKind::default_suite(),
        5,
    )
    .unwrap();

    let ok = external.average.accuracy >= 0.90
        && knn >= 0.95
        && nn >= 0.95
        && internal.average.accuracy >= 0.85;
    report(
        "4 (TSTR floor)",
        ok,
        &format!(
            "external avg {:.4} (knn {knn:.4}, neural_net {nn:.4}); internal avg {:.4}",
            external.average.accuracy, internal.average.accuracy
        ),
    );
    assert!(ok);
}

// ---------------------------------------------------------------------------
// Criterion 5: Algorithm-1 contract
// ---------------------------------------------------------------------------

/// Small two-blob dataset for the cheap contract checks.
fn toy_dataset(n_per_class: usize, seed: u64) -> Dataset {
    let mut rng = SeededRng::new(seed);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for c in 0..3usize {
        let center = [(-3.0, 0.0), (3.0, 2.0), (0.0, -3.0)][c];
        for _ in 0..n_per_class {
            rows.push(vec![
                center.0 + 0.4 * rng.next_gaussian(),
                center.1 + 0.4 * rng.next_gaussian(),
            ]);
            y.push(c);
        }
    }
    Dataset::new(
        Matrix::from_rows(&rows).unwrap(),
        y,
        faultsynth::data::FeatureSchema::new(vec!["f1".into(), "f2".into()], "label").unwrap(),
        vec!["a".into(), "b".into(), "c".into()],
    )
    .unwrap()
}

fn toy_config(variant: GanVariant, epochs: usize) -> GanConfig {
    GanConfig {
        variant,
        latent_dim: 6,
        gen_hidden: vec![16],
        disc_hidden: vec![16, 8],
        batch_size: 16,
        epochs,
        seed: 99,
        mv_weight: 0.0,
        corr_weight: 0.0,
        ..GanConfig::default()
    }
}

#[test]
fn criterion_5_algorithm_contract() {
    let ds = toy_dataset(24, 50);

    // Ablation identity: byte-identical model files.
    let dir = tempfile::tempdir().unwrap();
    let mut f2_cfg = toy_config(GanVariant::F2gan, 3);
    f2_cfg.mv_weight = 0.0;
    f2_cfg.corr_weight = 0.0;
    let cg_cfg = GanConfig {
        variant: GanVariant::Cgan,
        ..f2_cfg.clone()
    };
    let p_f2 = dir.path().join("f2_zero.json");
    let p_cg = dir.path().join("cgan.json");
    save_model(&train(&ds, &f2_cfg).unwrap(), &p_f2).unwrap();
    save_model(&train(&ds, &cg_cfg).unwrap(), &p_cg).unwrap();
    let identical = std::fs::read(&p_f2).unwrap() == std::fs::read(&p_cg).unwrap();

    // Instrumented 10-epoch runs: every post-clip norm within gamma = 0.5.
    let mut max_norm: f64 = 0.0;
    let mut steps = 0usize;
    for variant in [GanVariant::F2gan, GanVariant::WganGp] {
        let mut cfg = toy_config(variant, 10);
        if variant == GanVariant::F2gan {
            cfg.mv_weight = 1.0;
            cfg.corr_weight = 1.0;
        }
        assert_eq!(cfg.grad_clip, 0.5);
        train_instrumented(&ds, &cfg, |diag| {
            max_norm = max_norm.max(diag.post_clip_grad_norm);
            steps += 1;
        })
        .unwrap();
    }
    let clipped = max_norm <= 0.5 * (1.0 + 1e-9);

    // Balanced synthesis: exact counts, in-range features.
    let model = train(&ds, &toy_config(GanVariant::F2gan, 5)).unwrap();
    let synth = synthesize_balanced(&model, 40, 7).unwrap();
    let counts_ok = class_stats(&synth).counts == vec![40, 40, 40];
    let in_range = (0..synth.n_samples()).all(|r| {
        synth
            .x
            .row(r)
            .iter()
            .zip(model.scaler.min.iter().zip(&model.scaler.max))
            .all(|(&v, (&lo, &hi))| v >= lo && v <= hi)
    });

    let ok = identical && clipped && counts_ok && in_range;
    report(
        "5 (Algorithm-1 contract)",
        ok,
        &format!(
            "ablation files identical: {identical}; max post-clip norm {max_norm:.4} over {steps} steps; balanced counts: {counts_ok}; in-range: {in_range}"
        ),
    );
    assert!(ok);
}

// ---------------------------------------------------------------------------
// Criterion 6: determinism & round-trips
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_determinism_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();

    // Fixture CSVs: same seed, byte-identical files.
    let cfg = ScenarioConfig {
        samples_total: 600,
        seed: 31,
        ..ScenarioConfig::default()
    };
    let (pa, pb) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_csv(&generate_external(&cfg).unwrap(), &pa).unwrap();
    write_csv(&generate_external(&cfg).unwrap(), &pb).unwrap();
    let fixtures_identical = std::fs::read(&pa).unwrap() == std::fs::read(&pb).unwrap();

    // Model files: same config, byte-identical.
    let ds = toy_dataset(16, 3);
    let cfg = toy_config(GanVariant::F2gan, 2);
    let (ma, mb) = (dir.path().join("m1.json"), dir.path().join("m2.json"));
    save_model(&train(&ds, &cfg).unwrap(), &ma).unwrap();
    save_model(&train(&ds, &cfg).unwrap(), &mb).unwrap();
    let models_identical = std::fs::read(&ma).unwrap() == std::fs::read(&mb).unwrap();

    // Synthetic CSVs: same seed, byte-identical.
    let model = load_model(&ma).unwrap();
    let (sa, sb) = (dir.path().join("s1.csv"), dir.path().join("s2.csv"));
    write_csv(&synthesize_balanced(&model, 10, 5).unwrap(), &sa).unwrap();
    write_csv(&synthesize_balanced(&model, 10, 5).unwrap(), &sb).unwrap();
    let synth_identical = std::fs::read(&sa).unwrap() == std::fs::read(&sb).unwrap();

    // Scaler round trip within 1e-9.
    let fixture = generate_external(&ScenarioConfig {
        samples_total: 300,
        seed: 8,
        ..ScenarioConfig::default()
    })
    .unwrap();
    let scaler = fit_scaler(&fixture);
    let back = inverse_scale(&apply_scale(&fixture, &scaler).unwrap(), &scaler).unwrap();
    let scaler_err = fixture
        .x
        .data()
        .iter()
        .zip(back.x.data())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    // save -> load -> save byte-identical.
    let mc = dir.path().join("m3.json");
    save_model(&load_model(&ma).unwrap(), &mc).unwrap();
    let save_load_identical = std::fs::read(&ma).unwrap() == std::fs::read(&mc).unwrap();

    let ok = fixtures_identical
        && models_identical
        && synth_identical
        && scaler_err < 1e-9
        && save_load_identical;
    report(
        "6 (determinism & round-trips)",
        ok,
        &format!(
            "fixture CSVs: {fixtures_identical}; model files: {models_identical}; synthetic CSVs: {synth_identical}; scaler max |err| {scaler_err:.2e}; save/load/save: {save_load_identical}"
        ),
    );
    assert!(ok);
}

// ---------------------------------------------------------------------------
// Criterion 7: fixture learnability
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_fixture_learnability() {
    let mut accs = Vec::new();
    for (name, ds) in [
        (
            "external",
            generate_external(&ScenarioConfig::external_default()).unwrap(),
        ),
        (
            "internal",
            generate_internal(&ScenarioConfig::internal_default()).unwrap(),
        ),
    ] {
        let (train_ds, test_ds) = stratified_split(&ds, 0.8).unwrap();
        let scaler = fit_scaler(&train_ds);
        let train_s = apply_scale(&train_ds, &scaler).unwrap();
        let test_s = apply_scale(&test_ds, &scaler).unwrap();
        let model = fit_classifier(&ClassifierKind::Knn { k: 1 }, &train_s, 0).unwrap();
        let pred = predict(&model, &test_s.x).unwrap();
        let acc = pred.iter().zip(&test_s.y).filter(|(a, b)| a == b).count() as f64
            / test_s.y.len() as f64;
        accs.push((name, acc));
    }
    let ok = accs.iter().all(|(_, acc)| *acc >= 0.95);
    report(
        "7 (fixture learnability)",
        ok,
        &format!(
            "1-NN holdout accuracy: external {:.4}, internal {:.4}",
            accs[0].1, accs[1].1
        ),
    );
    assert!(ok);
}
