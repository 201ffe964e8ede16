//! Parametric surrogate generator for labeled microgrid fault-snapshot
//! datasets.
//!
//! Two fixture families:
//!
//! - **External**: line-level short circuits. 30 classes = 3 line sections
//!   x 10 fault types (LG on each phase, LLG / LL on each phase pair, LLL),
//!   18 RMS features (voltage and current, 3 phases x 3 line sections).
//! - **Internal**: inverter switch open-circuit conditions. 12 classes =
//!   6 single switches + 6 documented switch pairs; 6 features by default
//!   (3 phase current RMS, 3 phase voltage RMS), extensible to 12 with
//!   derived per-phase power and impedance channels.
//!
//! The response model is an explicit invented surrogate built from
//! piecewise-smooth closed forms (coefficients in `docs/response-model.md`,
//! version 1). It makes no claim about real hardware physics; it exists so
//! the full pipeline is reproducible, learnable, and seed-deterministic.
//! Per-sample operating conditions vary fault resistance, solar irradiance,
//! and load; multiplicative Gaussian noise is applied per feature.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{class_stats, Dataset, FeatureSchema};
use crate::numerics::{derive_subseed, Matrix, SeededRng};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),

    #[error("unknown class {0:?}")]
    UnknownClass(String),

    #[error("duplicate minority class {0:?}")]
    DuplicateClass(String),

    #[error(transparent)]
    Data(#[from] crate::data::DataError),
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

/// Which fixture family to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    External,
    Internal,
}

/// Optional class-imbalance injection applied after generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImbalanceSpec {
    pub minority_classes: Vec<String>,
    /// Fraction of each minority class to keep, in (0, 1].
    pub ratio: f64,
}

/// Fixture generation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub samples_total: usize,
    pub imbalance: Option<ImbalanceSpec>,
    /// Fault resistance draw range in ohms (external faults only).
    pub fault_resistance_range: (f64, f64),
    /// Normalized solar irradiance draw range.
    pub irradiance_range: (f64, f64),
    /// Normalized load demand draw range.
    pub load_range: (f64, f64),
    /// Relative std of the multiplicative Gaussian measurement noise.
    pub noise_std: f64,
    /// Internal fixture feature count, 1..=12: a prefix of the canonical
    /// channel list (currents, voltages, then derived power/impedance).
    pub internal_features: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::External,
            samples_total: 6_000,
            imbalance: None,
            fault_resistance_range: (0.1, 20.0),
            irradiance_range: (0.5, 1.0),
            load_range: (0.6, 1.2),
            noise_std: 0.02,
            internal_features: 6,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    /// Default external fixture: 6,000 samples over 30 classes.
    pub fn external_default() -> Self {
        Self::default()
    }

    /// Default internal fixture: 2,000 samples over 12 classes.
    pub fn internal_default() -> Self {
        Self {
            kind: ScenarioKind::Internal,
            samples_total: 2_000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ScenarioError::InvalidConfig(msg));
        if self.samples_total == 0 {
            return bad("samples_total must be >= 1".into());
        }
        for (name, (lo, hi)) in [
            ("fault_resistance_range", self.fault_resistance_range),
            ("irradiance_range", self.irradiance_range),
            ("load_range", self.load_range),
        ] {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return bad(format!("{name} must be a finite nonempty interval"));
            }
        }
        if self.fault_resistance_range.0 <= 0.0 {
            return bad("fault resistance must be positive".into());
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad("noise_std must be >= 0".into());
        }
        if self.noise_std >= 0.1 {
            // Box-Muller draws are bounded near 8.6 sigma, so below 0.1 the
            // multiplicative factor can never reach zero.
            return bad("noise_std must stay below 0.1 to keep RMS features positive".into());
        }
        if !(1..=INTERNAL_CHANNELS).contains(&self.internal_features) {
            return bad(format!(
                "internal_features must lie in 1..={INTERNAL_CHANNELS}"
            ));
        }
        if let Some(imb) = &self.imbalance {
            if !(imb.ratio > 0.0 && imb.ratio <= 1.0) {
                return bad("imbalance ratio must lie in (0, 1]".into());
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Fault class tables
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    A,
    B,
    C,
}

const PHASES: [Phase; 3] = [Phase::A, Phase::B, Phase::C];

impl Phase {
    fn index(self) -> usize {
        match self {
            Phase::A => 0,
            Phase::B => 1,
            Phase::C => 2,
        }
    }

    fn letter(self) -> char {
        match self {
            Phase::A => 'a',
            Phase::B => 'b',
            Phase::C => 'c',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSection {
    L12,
    L23,
    L32,
}

const LINES: [LineSection; 3] = [LineSection::L12, LineSection::L23, LineSection::L32];

impl LineSection {
    fn index(self) -> usize {
        match self {
            LineSection::L12 => 0,
            LineSection::L23 => 1,
            LineSection::L32 => 2,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            LineSection::L12 => "12",
            LineSection::L23 => "23",
            LineSection::L32 => "32",
        }
    }
}

/// Short-circuit fault type; phases name the involved conductors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultType {
    Lg(Phase),
    Llg(Phase, Phase),
    Ll(Phase, Phase),
    Lll,
}

impl FaultType {
    fn faulted_phases(self) -> Vec<Phase> {
        match self {
            FaultType::Lg(p) => vec![p],
            FaultType::Llg(p, q) | FaultType::Ll(p, q) => vec![p, q],
            FaultType::Lll => PHASES.to_vec(),
        }
    }

    fn label_part(self) -> String {
        match self {
            FaultType::Lg(p) => format!("LG_{}", p.letter()),
            FaultType::Llg(p, q) => format!("LLG_{}{}", p.letter(), q.letter()),
            FaultType::Ll(p, q) => format!("LL_{}{}", p.letter(), q.letter()),
            FaultType::Lll => "LLL".into(),
        }
    }
}

/// The ten external fault types in class order.
fn fault_types() -> [FaultType; 10] {
    [
        FaultType::Lg(Phase::A),
        FaultType::Lg(Phase::B),
        FaultType::Lg(Phase::C),
        FaultType::Llg(Phase::A, Phase::B),
        FaultType::Llg(Phase::B, Phase::C),
        FaultType::Llg(Phase::C, Phase::A),
        FaultType::Ll(Phase::A, Phase::B),
        FaultType::Ll(Phase::B, Phase::C),
        FaultType::Ll(Phase::C, Phase::A),
        FaultType::Lll,
    ]
}

/// One external fault class: a line section plus a fault type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExternalFault {
    pub line: LineSection,
    pub fault: FaultType,
}

impl ExternalFault {
    pub fn label(&self) -> String {
        format!("L{}_{}", self.line.tag(), self.fault.label_part())
    }
}

/// All 30 external classes, line-major.
pub fn external_classes() -> Vec<ExternalFault> {
    let mut classes = Vec::with_capacity(30);
    for line in LINES {
        for fault in fault_types() {
            classes.push(ExternalFault { line, fault });
        }
    }
    classes
}

/// Inverter bridge switches. Leg assignment: phase a = S1 (upper) / S4
/// (lower), phase b = S3/S6, phase c = S5/S2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Switch {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
}

impl Switch {
    fn phase(self) -> Phase {
        match self {
            Switch::S1 | Switch::S4 => Phase::A,
            Switch::S3 | Switch::S6 => Phase::B,
            Switch::S5 | Switch::S2 => Phase::C,
        }
    }

    fn is_upper(self) -> bool {
        matches!(self, Switch::S1 | Switch::S3 | Switch::S5)
    }

    fn name(self) -> &'static str {
        match self {
            Switch::S1 => "S1",
            Switch::S2 => "S2",
            Switch::S3 => "S3",
            Switch::S4 => "S4",
            Switch::S5 => "S5",
            Switch::S6 => "S6",
        }
    }
}

/// One internal fault class: one or two open switches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InternalFault {
    pub switches: Vec<Switch>,
}

impl InternalFault {
    pub fn label(&self) -> String {
        self.switches.iter().map(|s| s.name()).collect()
    }
}

/// All 12 internal classes: six singles, then the six documented pairs.
pub fn internal_classes() -> Vec<InternalFault> {
    use Switch::*;
    let singles = [S1, S2, S3, S4, S5, S6]
        .into_iter()
        .map(|s| InternalFault { switches: vec![s] });
    let pairs = [(S1, S4), (S1, S6), (S3, S6), (S3, S2), (S5, S2), (S5, S4)]
        .into_iter()
        .map(|(a, b)| InternalFault {
            switches: vec![a, b],
        });
    singles.chain(pairs).collect()
}

// ---------------------------------------------------------------------------
// Response model v1 (full coefficient table in docs/response-model.md)
// ---------------------------------------------------------------------------

const V_NOM: [f64; 3] = [2400.0, 2350.0, 480.0];
const I_BASE: [f64; 3] = [180.0, 140.0, 260.0];
/// (load weight, irradiance weight) per line.
const LINE_MIX: [(f64, f64); 3] = [(0.70, 0.30), (0.85, 0.15), (0.25, 0.75)];
/// Fault resistance at which the sag reaches half depth.
const R_CHAR: f64 = 5.0;
/// Cross-line coupling coefficients, symmetric.
const COUPLING: [[f64; 3]; 3] = [[0.0, 0.5, 0.3], [0.5, 0.0, 0.4], [0.3, 0.4, 0.0]];
/// Smallest value any generated feature may take.
const RMS_FLOOR: f64 = 1e-6;

/// Per-type response coefficients. `surge_other` scales the current surge
/// on the second listed faulted phase (the ground-return asymmetry of LLG
/// faults); `healthy_v` is the signed healthy-phase voltage response:
/// grounded faults swell it (neutral displacement), the line-line fault
/// dips it mildly.
struct TypeResponse {
    sag_floor: f64,
    surge: f64,
    surge_other: f64,
    healthy_v: f64,
}

fn severity(fault: FaultType) -> TypeResponse {
    match fault {
        FaultType::Lg(_) => TypeResponse {
            sag_floor: 0.20,
            surge: 2.5,
            surge_other: 1.0,
            healthy_v: 0.10,
        },
        FaultType::Llg(_, _) => TypeResponse {
            sag_floor: 0.06,
            surge: 3.6,
            surge_other: 0.7,
            healthy_v: 0.25,
        },
        // A phase-to-phase short pulls the conductors together rather than
        // to ground: shallower sag, no zero-sequence swell.
        FaultType::Ll(_, _) => TypeResponse {
            sag_floor: 0.30,
            surge: 2.4,
            surge_other: 1.0,
            healthy_v: -0.10,
        },
        FaultType::Lll => TypeResponse {
            sag_floor: 0.05,
            surge: 4.0,
            surge_other: 1.0,
            healthy_v: 0.0,
        },
    }
}

/// Noiseless external response: 18 values, voltages then currents,
/// line-major and phase-minor within each block.
fn external_response(
    class: &ExternalFault,
    fault_resistance: f64,
    irradiance: f64,
    load: f64,
) -> [f64; 18] {
    // Residual fault severity: 1 at a bolted fault, -> 0 as R_f grows.
    let depth = 1.0 - fault_resistance / (fault_resistance + R_CHAR);
    let response = severity(class.fault);
    let faulted = class.fault.faulted_phases();
    let fault_line = class.line.index();

    let mut out = [0.0; 18];
    for line in LINES {
        let li = line.index();
        let (w_load, w_pv) = LINE_MIX[li];
        let v_healthy = V_NOM[li] * (1.0 - 0.02 * (load - 1.0));
        let i_healthy = I_BASE[li] * (w_load * load + w_pv * irradiance);
        for phase in PHASES {
            let pi = phase.index();
            let fault_position = faulted.iter().position(|&p| p == phase);
            let (v_factor, i_factor) = if li == fault_line {
                if let Some(pos) = fault_position {
                    // Voltage collapses toward the sag floor as R_f -> 0;
                    // current surges inversely, asymmetrically for the
                    // second conductor of a grounded pair.
                    let surge = if pos == 1 {
                        response.surge * response.surge_other
                    } else {
                        response.surge
                    };
                    (
                        response.sag_floor + (1.0 - response.sag_floor) * (1.0 - depth),
                        1.0 + surge * depth,
                    )
                } else {
                    (1.0 + response.healthy_v * depth, 1.0 + 0.10 * depth)
                }
            } else {
                let c = COUPLING[fault_line][li];
                if fault_position.is_some() {
                    (1.0 - 0.05 * c * depth, 1.0 + 0.30 * c * depth)
                } else {
                    (1.0 - 0.02 * c * depth, 1.0 + 0.10 * c * depth)
                }
            };
            out[li * 3 + pi] = v_healthy * v_factor;
            out[9 + li * 3 + pi] = i_healthy * i_factor;
        }
    }
    out
}

const INTERNAL_V_NOM: f64 = 480.0;
const INTERNAL_I_NOM: f64 = 120.0;
/// Upper-switch open: (current factor, voltage factor) on the faulted
/// phase, then (current, voltage) factors on the other two phases. The
/// upper/lower asymmetry is strong enough that no load level can make one
/// signature look like another (no two class factor vectors are
/// proportional).
const UPPER_OPEN: (f64, f64, f64, f64) = (0.60, 0.97, 1.05, 0.995);
const LOWER_OPEN: (f64, f64, f64, f64) = (0.42, 0.90, 1.14, 0.97);
/// Canonical internal channels: currents, voltages, then derived per-phase
/// power (V*I/1000) and impedance magnitude (V/I).
const INTERNAL_CHANNELS: usize = 12;

/// Noiseless internal response over the canonical 12-channel list.
fn internal_response(class: &InternalFault, irradiance: f64, load: f64) -> [f64; 12] {
    let i_healthy = INTERNAL_I_NOM * (0.8 * load + 0.2 * irradiance);
    let v_healthy = INTERNAL_V_NOM * (1.0 - 0.03 * (load - 1.0));
    let mut i_factor = [1.0f64; 3];
    let mut v_factor = [1.0f64; 3];
    for &switch in &class.switches {
        let (fi, fv, oi, ov) = if switch.is_upper() {
            UPPER_OPEN
        } else {
            LOWER_OPEN
        };
        let p = switch.phase().index();
        for k in 0..3 {
            if k == p {
                i_factor[k] *= fi;
                v_factor[k] *= fv;
            } else {
                i_factor[k] *= oi;
                v_factor[k] *= ov;
            }
        }
    }

    let mut out = [0.0; 12];
    for k in 0..3 {
        let i = i_healthy * i_factor[k];
        let v = v_healthy * v_factor[k];
        out[k] = i;
        out[3 + k] = v;
        out[6 + k] = v * i / 1000.0;
        out[9 + k] = v / i;
    }
    out
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Feature names of the external fixture: voltages then currents.
pub fn external_feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(18);
    for quantity in ["V", "I"] {
        for line in LINES {
            for phase in PHASES {
                names.push(format!("{quantity}{}{}", line.tag(), phase.letter()));
            }
        }
    }
    names
}

/// Feature names of the internal fixture for a given channel count.
pub fn internal_feature_names(n: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(INTERNAL_CHANNELS);
    for quantity in ["I", "V", "P", "Z"] {
        for phase in PHASES {
            names.push(format!("{quantity}{}", phase.letter()));
        }
    }
    names.truncate(n);
    names
}

fn uniform_in(rng: &mut SeededRng, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.next_f64()
}

/// Per-class sample counts: as equal as possible, earlier classes take the
/// remainder.
fn balanced_counts(total: usize, n_classes: usize) -> Vec<usize> {
    let base = total / n_classes;
    let extra = total % n_classes;
    (0..n_classes)
        .map(|c| base + usize::from(c < extra))
        .collect()
}

/// Generate the external fault fixture.
///
/// Per sample the draw order is: fault resistance, irradiance, load, then
/// one Gaussian per feature (schema order) for the multiplicative noise.
/// Rows are grouped by class in class order.
pub fn generate_external(config: &ScenarioConfig) -> Result<Dataset> {
    config.validate()?;
    if config.kind != ScenarioKind::External {
        return Err(ScenarioError::InvalidConfig(
            "generate_external needs kind = external".into(),
        ));
    }
    let classes = external_classes();
    let schema = FeatureSchema::new(external_feature_names(), "label")?;
    let class_names: Vec<String> = classes.iter().map(|c| c.label()).collect();
    let counts = balanced_counts(config.samples_total, classes.len());

    let mut rng = SeededRng::new(config.seed);
    let mut x = Matrix::zeros(config.samples_total, 18);
    let mut y = Vec::with_capacity(config.samples_total);
    let mut row = 0usize;
    for (class_idx, class) in classes.iter().enumerate() {
        for _ in 0..counts[class_idx] {
            let rf = uniform_in(&mut rng, config.fault_resistance_range);
            let irr = uniform_in(&mut rng, config.irradiance_range);
            let load = uniform_in(&mut rng, config.load_range);
            let core = external_response(class, rf, irr, load);
            for (j, &v) in core.iter().enumerate() {
                let noisy = v * (1.0 + config.noise_std * rng.next_gaussian());
                x.set(row, j, noisy.max(RMS_FLOOR));
            }
            y.push(class_idx);
            row += 1;
        }
    }

    let ds = Dataset::new(x, y, schema, class_names)?;
    maybe_imbalance(ds, config)
}

/// Generate the internal fault fixture.
///
/// Per sample the draw order is: irradiance, load, then one Gaussian per
/// feature (open-circuit faults have no fault resistance). Rows are grouped
/// by class in class order.
pub fn generate_internal(config: &ScenarioConfig) -> Result<Dataset> {
    config.validate()?;
    if config.kind != ScenarioKind::Internal {
        return Err(ScenarioError::InvalidConfig(
            "generate_internal needs kind = internal".into(),
        ));
    }
    let classes = internal_classes();
    let d = config.internal_features;
    let schema = FeatureSchema::new(internal_feature_names(d), "label")?;
    let class_names: Vec<String> = classes.iter().map(|c| c.label()).collect();
    let counts = balanced_counts(config.samples_total, classes.len());

    let mut rng = SeededRng::new(config.seed);
    let mut x = Matrix::zeros(config.samples_total, d);
    let mut y = Vec::with_capacity(config.samples_total);
    let mut row = 0usize;
    for (class_idx, class) in classes.iter().enumerate() {
        for _ in 0..counts[class_idx] {
            let irr = uniform_in(&mut rng, config.irradiance_range);
            let load = uniform_in(&mut rng, config.load_range);
            let core = internal_response(class, irr, load);
            for (j, &v) in core.iter().take(d).enumerate() {
                let noisy = v * (1.0 + config.noise_std * rng.next_gaussian());
                x.set(row, j, noisy.max(RMS_FLOOR));
            }
            y.push(class_idx);
            row += 1;
        }
    }

    let ds = Dataset::new(x, y, schema, class_names)?;
    maybe_imbalance(ds, config)
}

fn maybe_imbalance(ds: Dataset, config: &ScenarioConfig) -> Result<Dataset> {
    match &config.imbalance {
        None => Ok(ds),
        Some(imb) => apply_imbalance(
            &ds,
            &imb.minority_classes,
            imb.ratio,
            derive_subseed(config.seed, "imbalance"),
        ),
    }
}

/// Subsample each minority class to `ceil(ratio * count)` rows without
/// replacement; other classes are untouched and row order is preserved.
pub fn apply_imbalance(
    ds: &Dataset,
    minority: &[String],
    ratio: f64,
    seed: u64,
) -> Result<Dataset> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(ScenarioError::InvalidConfig(format!(
            "ratio must lie in (0, 1], got {ratio}"
        )));
    }
    let mut targets: Vec<usize> = Vec::with_capacity(minority.len());
    for name in minority {
        let idx = ds
            .class_names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| ScenarioError::UnknownClass(name.clone()))?;
        if targets.contains(&idx) {
            return Err(ScenarioError::DuplicateClass(name.clone()));
        }
        targets.push(idx);
    }
    targets.sort_unstable();

    let stats = class_stats(ds);
    let mut keep = vec![true; ds.n_samples()];
    let mut rng = SeededRng::new(seed);
    for &class in &targets {
        let rows: Vec<usize> = (0..ds.n_samples()).filter(|&r| ds.y[r] == class).collect();
        let want = (ratio * stats.counts[class] as f64).ceil() as usize;
        let mut order = rows.clone();
        rng.shuffle(&mut order);
        for &drop in &order[want.min(order.len())..] {
            keep[drop] = false;
        }
    }

    let kept: Vec<usize> = (0..ds.n_samples()).filter(|&r| keep[r]).collect();
    let mut x = Matrix::zeros(kept.len(), ds.n_features());
    let mut y = Vec::with_capacity(kept.len());
    for (i, &r) in kept.iter().enumerate() {
        x.row_mut(i).copy_from_slice(ds.x.row(r));
        y.push(ds.y[r]);
    }
    Ok(Dataset::new(
        x,
        y,
        ds.schema.clone(),
        ds.class_names.clone(),
    )?)
}
