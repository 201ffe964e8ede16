//! Run configuration: one JSON document driving every pipeline stage.
//!
//! All sections are optional and default sensibly; unknown keys anywhere
//! are rejected. Every stage derives its own subseed from the top-level
//! seed as `derive_subseed(seed, stage_name)`, so stages are individually
//! rerunnable and the whole pipeline is reproducible from the echoed
//! config.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use faultsynth::fidelity::SigmaPolicy;
use faultsynth::gan::GanConfig;
use faultsynth::scenario::{ImbalanceSpec, ScenarioConfig, ScenarioKind};
use faultsynth::tstr::ClassifierKind;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub scenario: FixtureSection,
    pub gan: GanConfig,
    pub fidelity: FidelitySection,
    pub tstr: TstrSection,
    pub paths: PathsSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("invalid config {}", path.display()))?;
        Ok(config)
    }
}

/// Which fixtures to generate. Absent keys fall back to the default
/// parameter set; an explicit JSON `null` disables that dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixtureSection {
    pub external: Option<FixtureParams>,
    pub internal: Option<FixtureParams>,
}

impl Default for FixtureSection {
    fn default() -> Self {
        Self {
            external: Some(FixtureParams::default()),
            internal: Some(FixtureParams::default()),
        }
    }
}

/// Overrides for one fixture; every field defaults to the scenario
/// module's per-kind default.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixtureParams {
    pub samples_total: Option<usize>,
    pub imbalance: Option<ImbalanceSpec>,
    pub fault_resistance_range: Option<(f64, f64)>,
    pub irradiance_range: Option<(f64, f64)>,
    pub load_range: Option<(f64, f64)>,
    pub noise_std: Option<f64>,
    pub internal_features: Option<usize>,
}

impl FixtureParams {
    pub fn resolve(&self, kind: ScenarioKind, seed: u64) -> ScenarioConfig {
        let mut cfg = match kind {
            ScenarioKind::External => ScenarioConfig::external_default(),
            ScenarioKind::Internal => ScenarioConfig::internal_default(),
        };
        cfg.seed = seed;
        if let Some(n) = self.samples_total {
            cfg.samples_total = n;
        }
        cfg.imbalance = self.imbalance.clone();
        if let Some(r) = self.fault_resistance_range {
            cfg.fault_resistance_range = r;
        }
        if let Some(r) = self.irradiance_range {
            cfg.irradiance_range = r;
        }
        if let Some(r) = self.load_range {
            cfg.load_range = r;
        }
        if let Some(n) = self.noise_std {
            cfg.noise_std = n;
        }
        if let Some(n) = self.internal_features {
            cfg.internal_features = n;
        }
        cfg
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FidelitySection {
    /// Histogram bin count.
    pub bins: usize,
    /// `"median"` or a fixed positive bandwidth.
    pub sigma: SigmaSetting,
}

impl Default for FidelitySection {
    fn default() -> Self {
        Self {
            bins: 64,
            sigma: SigmaSetting::Named(SigmaName::Median),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaSetting {
    Fixed(f64),
    Named(SigmaName),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaName {
    Median,
}

impl SigmaSetting {
    pub fn policy(&self) -> SigmaPolicy {
        match self {
            SigmaSetting::Named(SigmaName::Median) => SigmaPolicy::MedianHeuristic,
            SigmaSetting::Fixed(s) => SigmaPolicy::Fixed(*s),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TstrSection {
    pub tree_max_depth: usize,
    pub knn_k: usize,
    pub nn_hidden: Vec<usize>,
    pub nn_epochs: usize,
    pub svm_penalty: f64,
    pub svm_epochs: usize,
}

impl Default for TstrSection {
    fn default() -> Self {
        Self {
            tree_max_depth: 12,
            knn_k: 5,
            nn_hidden: vec![64, 32],
            nn_epochs: 200,
            svm_penalty: 1e-3,
            svm_epochs: 200,
        }
    }
}

impl TstrSection {
    pub fn kinds(&self) -> Vec<ClassifierKind> {
        vec![
            ClassifierKind::DecisionTree {
                max_depth: self.tree_max_depth,
            },
            ClassifierKind::Knn { k: self.knn_k },
            ClassifierKind::NeuralNet {
                hidden: self.nn_hidden.clone(),
                epochs: self.nn_epochs,
            },
            ClassifierKind::LinearSvm {
                penalty: self.svm_penalty,
                epochs: self.svm_epochs,
            },
        ]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsSection {
    pub out_dir: String,
}

impl Default for PathsSection {
    fn default() -> Self {
        Self {
            out_dir: "out".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg.seed, 0);
        assert!(cfg.scenario.external.is_some());
        assert!(cfg.scenario.internal.is_some());
        assert_eq!(cfg.fidelity.bins, 64);
        assert_eq!(cfg.tstr.kinds().len(), 4);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"mystery": 1}"#).is_err());
        assert!(
            serde_json::from_str::<RunConfig>(r#"{"scenario": {"external": {"mystery": 1}}}"#)
                .is_err()
        );
    }

    #[test]
    fn null_disables_a_fixture() {
        let cfg: RunConfig = serde_json::from_str(r#"{"scenario": {"internal": null}}"#).unwrap();
        assert!(cfg.scenario.external.is_some());
        assert!(cfg.scenario.internal.is_none());
    }

    #[test]
    fn sigma_accepts_median_or_number() {
        let cfg: RunConfig = serde_json::from_str(r#"{"fidelity": {"sigma": 2.5}}"#).unwrap();
        assert!(matches!(cfg.fidelity.sigma, SigmaSetting::Fixed(s) if s == 2.5));
        let cfg: RunConfig = serde_json::from_str(r#"{"fidelity": {"sigma": "median"}}"#).unwrap();
        assert!(matches!(
            cfg.fidelity.sigma,
            SigmaSetting::Named(SigmaName::Median)
        ));
    }
}
