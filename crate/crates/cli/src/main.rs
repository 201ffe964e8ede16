//! The `faultsynth` binary: the three-phase pipeline on the command line.
//! fixture generation, generative training and balanced synthesis, then
//! fidelity and TSTR evaluation with report export.
//!
//! Subcommands: `fixture | train | synth | eval | tstr`. Shared flags:
//! `--config PATH` (JSON run config), `--out DIR`, `--seed U64` (overrides
//! the config seed). Commands print human-readable tables to stdout and
//! write machine-readable JSON/CSV under the output directory; on failure
//! the files written by the failed invocation are removed and the exit
//! code is nonzero.

mod config;
mod output;
mod tables;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use faultsynth::data::{class_stats, load_csv, write_csv, Dataset, FeatureSchema};
use faultsynth::fidelity::{evaluate_fidelity, export_histograms};
use faultsynth::gan::{load_model, save_model, synthesize_balanced, train};
use faultsynth::numerics::derive_subseed;
use faultsynth::scenario::{generate_external, generate_internal, ScenarioKind};

use config::RunConfig;
use output::OutputDir;

#[derive(Parser)]
#[command(
    name = "faultsynth",
    about = "Surrogate fault-data fixtures, feedback-GAN synthesis, and evaluation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Shared {
    /// JSON run config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides paths.out_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Top-level seed (overrides the config seed).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate fixture datasets (external and/or internal) as CSV.
    Fixture {
        #[command(flatten)]
        shared: Shared,
    },
    /// Train a generative model on a dataset CSV.
    Train {
        #[command(flatten)]
        shared: Shared,
        /// Training dataset CSV (last column is the label).
        #[arg(long)]
        data: PathBuf,
    },
    /// Sample a balanced synthetic dataset from a trained model.
    Synth {
        #[command(flatten)]
        shared: Shared,
        /// Model JSON produced by `train`.
        #[arg(long)]
        model: PathBuf,
        /// Samples to generate per class.
        #[arg(long = "per-class")]
        per_class: usize,
    },
    /// Fidelity metrics and histogram export for a real/synthetic pair.
    Eval {
        #[command(flatten)]
        shared: Shared,
        /// Real dataset CSV.
        #[arg(long)]
        real: PathBuf,
        /// Synthetic dataset CSV.
        #[arg(long)]
        synth: PathBuf,
    },
    /// Train-on-synthetic / test-on-real classifier benchmark.
    Tstr {
        #[command(flatten)]
        shared: Shared,
        /// Synthetic training CSV.
        #[arg(long)]
        synth: PathBuf,
        /// Held-out real test CSV.
        #[arg(long = "real-test")]
        real_test: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fixture { shared } => cmd_fixture(&shared),
        Command::Train { shared, data } => cmd_train(&shared, &data),
        Command::Synth {
            shared,
            model,
            per_class,
        } => cmd_synth(&shared, &model, per_class),
        Command::Eval {
            shared,
            real,
            synth,
        } => cmd_eval(&shared, &real, &synth),
        Command::Tstr {
            shared,
            synth,
            real_test,
        } => cmd_tstr(&shared, &synth, &real_test),
    }
}

/// Resolve the run config plus the effective seed and output directory.
fn resolve(shared: &Shared) -> Result<(RunConfig, OutputDir)> {
    let mut config = match &shared.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = shared.seed {
        config.seed = seed;
    }
    if let Some(out) = &shared.out {
        config.paths.out_dir = out.display().to_string();
    }
    let out = OutputDir::create(Path::new(&config.paths.out_dir))?;
    Ok((config, out))
}

/// Echo the resolved config next to the outputs for provenance.
fn echo_config(config: &RunConfig, out: &mut OutputDir) -> Result<()> {
    out.write_json("run_config.json", config)
}

/// Dataset schema straight from a CSV header: every column except the last
/// is a feature, the last is the label.
fn schema_from_header(path: &Path) -> Result<FeatureSchema> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let headers = reader
        .headers()
        .with_context(|| format!("cannot read header of {}", path.display()))?;
    let mut names: Vec<String> = headers.iter().map(str::to_string).collect();
    if names.len() < 2 {
        bail!(
            "{} needs at least one feature column and a label column",
            path.display()
        );
    }
    let label = names.pop().unwrap();
    Ok(FeatureSchema::new(names, label)?)
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    let schema = schema_from_header(path)?;
    Ok(load_csv(path, &schema)?)
}

#[derive(Serialize)]
struct FixtureManifest {
    seed: u64,
    datasets: Vec<DatasetEntry>,
}

#[derive(Serialize)]
struct DatasetEntry {
    kind: String,
    path: String,
    stage_seed: u64,
    rows: usize,
    features: usize,
    classes: usize,
    class_counts: Vec<usize>,
}

fn cmd_fixture(shared: &Shared) -> Result<()> {
    let (config, mut out) = resolve(shared)?;
    let mut entries = Vec::new();

    let jobs = [
        (
            ScenarioKind::External,
            &config.scenario.external,
            "external",
        ),
        (
            ScenarioKind::Internal,
            &config.scenario.internal,
            "internal",
        ),
    ];
    for (kind, params, name) in jobs {
        let Some(params) = params else { continue };
        let stage_seed = derive_subseed(config.seed, &format!("fixture.{name}"));
        let scenario = params.resolve(kind, stage_seed);
        let ds = match kind {
            ScenarioKind::External => generate_external(&scenario)?,
            ScenarioKind::Internal => generate_internal(&scenario)?,
        };
        let file = format!("{name}.csv");
        out.write_with(&file, |path| Ok(write_csv(&ds, path)?))?;
        let stats = class_stats(&ds);
        println!(
            "{name}: {} rows, {} features, {} classes -> {}",
            ds.n_samples(),
            ds.n_features(),
            ds.n_classes(),
            out.path(&file).display()
        );
        entries.push(DatasetEntry {
            kind: name.to_string(),
            path: file,
            stage_seed,
            rows: ds.n_samples(),
            features: ds.n_features(),
            classes: ds.n_classes(),
            class_counts: stats.counts,
        });
    }
    if entries.is_empty() {
        bail!("both fixtures are disabled in the config; nothing to generate");
    }

    out.write_json(
        "manifest.json",
        &FixtureManifest {
            seed: config.seed,
            datasets: entries,
        },
    )?;
    echo_config(&config, &mut out)?;
    out.commit();
    Ok(())
}

fn cmd_train(shared: &Shared, data: &Path) -> Result<()> {
    let (config, mut out) = resolve(shared)?;
    let ds = load_dataset(data)?;

    let mut gan_config = config.gan.clone();
    gan_config.seed = derive_subseed(config.seed, "train");
    let model = train(&ds, &gan_config)
        .with_context(|| format!("training on {} failed", data.display()))?;

    out.write_with("model.json", |path| Ok(save_model(&model, path)?))?;
    out.write_with("loss_log.csv", |path| {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["epoch", "L_D", "L_adv", "L_MV", "L_corr", "L_G"])?;
        for (epoch, e) in model.log.iter().enumerate() {
            w.write_record([
                epoch.to_string(),
                e.l_d.to_string(),
                e.l_adv.to_string(),
                e.l_mv.to_string(),
                e.l_corr.to_string(),
                e.l_g.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;

    let last = model.log.last();
    println!(
        "trained {} on {} ({} epochs, seed {}){}",
        model.config.variant.as_str(),
        data.display(),
        model.config.epochs,
        model.config.seed,
        last.map(|e| format!("; final L_D {:.4}, L_G {:.4}", e.l_d, e.l_g))
            .unwrap_or_default()
    );
    println!("model -> {}", out.path("model.json").display());
    echo_config(&config, &mut out)?;
    out.commit();
    Ok(())
}

fn cmd_synth(shared: &Shared, model_path: &Path, per_class: usize) -> Result<()> {
    let (config, mut out) = resolve(shared)?;
    let model = load_model(model_path)?;
    let seed = derive_subseed(config.seed, "synth");
    let synth = synthesize_balanced(&model, per_class, seed)?;
    out.write_with("synthetic.csv", |path| Ok(write_csv(&synth, path)?))?;
    println!(
        "synthesized {} rows ({} per class x {} classes) -> {}",
        synth.n_samples(),
        per_class,
        synth.n_classes(),
        out.path("synthetic.csv").display()
    );
    echo_config(&config, &mut out)?;
    out.commit();
    Ok(())
}

fn cmd_eval(shared: &Shared, real: &Path, synth: &Path) -> Result<()> {
    let (config, mut out) = resolve(shared)?;
    let real_ds = load_dataset(real)?;
    let synth_ds = load_dataset(synth)?;

    let report = evaluate_fidelity(&real_ds, &synth_ds, config.fidelity.sigma.policy())?;
    let histograms = export_histograms(&real_ds, &synth_ds, config.fidelity.bins)?;
    out.write_json("fidelity_report.json", &report)?;
    out.write_json("histograms.json", &histograms)?;

    let label = synth
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "synthetic".into());
    print!("{}", tables::fidelity_table(&label, &report));
    println!("reports -> {}", out.path("fidelity_report.json").display());
    echo_config(&config, &mut out)?;
    out.commit();
    Ok(())
}

fn cmd_tstr(shared: &Shared, synth: &Path, real_test: &Path) -> Result<()> {
    let (config, mut out) = resolve(shared)?;
    let synth_ds = load_dataset(synth)?;
    let real_ds = load_dataset(real_test)?;

    let seed = derive_subseed(config.seed, "tstr");
    let report = faultsynth::tstr::run_tstr(&synth_ds, &real_ds, &config.tstr.kinds(), seed)?;
    out.write_json("tstr_report.json", &report)?;

    print!("{}", tables::tstr_table(&report));
    println!("report -> {}", out.path("tstr_report.json").display());
    echo_config(&config, &mut out)?;
    out.commit();
    Ok(())
}
