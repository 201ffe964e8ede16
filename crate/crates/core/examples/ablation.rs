//! Desk-scale ablation: train the feedback model and its plain-CGAN
//! ablation on one external fixture, then compare fidelity and TSTR.
//!
//!     cargo run --release -p faultsynth --example ablation -- [EPOCHS] [SEED]

use faultsynth::data::stratified_split;
use faultsynth::fidelity::{evaluate_fidelity, SigmaPolicy};
use faultsynth::gan::{synthesize_balanced, train, GanConfig, GanVariant};
use faultsynth::scenario::{generate_external, ScenarioConfig};
use faultsynth::tstr::{run_tstr, ClassifierKind};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let epochs: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(300);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);

    let fixture = generate_external(&ScenarioConfig {
        samples_total: 3_000,
        ..ScenarioConfig::external_default()
    })
    .expect("fixture");
    let (real_train, real_test) = stratified_split(&fixture, 0.8).expect("split");

    println!(
        "fixture: {} train / {} test rows, {} classes",
        real_train.n_samples(),
        real_test.n_samples(),
        real_train.n_classes()
    );
    println!(
        "{:<8} {:>12} {:>10} {:>10} {:>10}",
        "variant", "avg W", "avg KS", "MMD", "TSTR acc"
    );

    for variant in [GanVariant::F2gan, GanVariant::Cgan] {
        let config = GanConfig {
            variant,
            latent_dim: 32,
            gen_hidden: vec![64, 128],
            disc_hidden: vec![128, 64],
            batch_size: 128,
            epochs,
            seed,
            mv_weight: if variant == GanVariant::F2gan { 0.1 } else { 0.0 },
            corr_weight: if variant == GanVariant::F2gan { 0.001 } else { 0.0 },
            ..GanConfig::default()
        };
        let model = train(&real_train, &config).expect("training");
        let synth = synthesize_balanced(&model, 100, seed).expect("synthesis");
        let fidelity =
            evaluate_fidelity(&real_train, &synth, SigmaPolicy::MedianHeuristic).expect("fidelity");
        let tstr =
            run_tstr(&synth, &real_test, &ClassifierKind::default_suite(), seed).expect("tstr");
        println!(
            "{:<8} {:>12.4} {:>10.4} {:>10.6} {:>10.4}",
            variant.as_str(),
            fidelity.averages.wasserstein,
            fidelity.averages.ks,
            fidelity.mmd,
            tstr.average.accuracy
        );
    }
}
