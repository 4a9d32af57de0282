//! Reliability block composition and whole-system assembly.
//!
//! A [`Block`] is a finite tree of independent components combined in
//! series, in parallel (active redundancy) or as a k-out-of-n group. A
//! [`CpsArchitecture`] groups one block per functional module and combines
//! the module reliabilities into the system figure.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::failure_model::FailureModel;

/// Tolerance on the weight sum of [`CombinerMode::NormalizedMean`].
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Sensor,
    Actuator,
    Network,
    ComputeHardware,
    ComputeSoftware,
    ComputeInteraction,
    Other,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 7] = [
        ComponentKind::Sensor,
        ComponentKind::Actuator,
        ComponentKind::Network,
        ComponentKind::ComputeHardware,
        ComponentKind::ComputeSoftware,
        ComponentKind::ComputeInteraction,
        ComponentKind::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ComponentKind::Sensor => "Sensor",
            ComponentKind::Actuator => "Actuator",
            ComponentKind::Network => "Network",
            ComponentKind::ComputeHardware => "ComputeHardware",
            ComponentKind::ComputeSoftware => "ComputeSoftware",
            ComponentKind::ComputeInteraction => "ComputeInteraction",
            ComponentKind::Other => "Other",
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ComponentKind {
    type Err = Error;

    /// Accepts `ComputeHardware`, `compute_hardware` and `compute-hardware` spellings.
    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| !matches!(c, '_' | '-' | ' '))
            .flat_map(char::to_lowercase)
            .collect();
        ComponentKind::ALL
            .into_iter()
            .find(|k| k.as_str().to_lowercase() == norm)
            .ok_or_else(|| Error::domain(format!("unknown component kind `{s}`")))
    }
}

/// Where a component's mission window starts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Window {
    /// Mission `(0, t]`.
    #[default]
    FreshStart,
    /// Mission `(t_start, t_start + t]`, e.g. after burn-in or accumulated operation.
    TestWindow { t_start: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub id: String,
    pub name: String,
    pub kind: ComponentKind,
    pub model: FailureModel,
    pub window: Window,
}

impl Component {
    pub fn new(
        id: impl Into<String>,
        kind: ComponentKind,
        model: FailureModel,
        window: Window,
    ) -> Result<Self> {
        let id = id.into();
        let c = Component {
            name: id.clone(),
            id,
            kind,
            model,
            window,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Structure("component id must not be empty".into()));
        }
        if self.kind == ComponentKind::ComputeSoftware
            && matches!(self.model, FailureModel::PowerLaw { .. })
        {
            return Err(
                Error::domain("software components take an srgm or constant model")
                    .with_component(&self.id),
            );
        }
        if let Window::TestWindow { t_start } = self.window {
            if !(t_start.is_finite() && t_start >= 0.0) {
                return Err(
                    Error::domain(format!("t_start must be >= 0, got {t_start}"))
                        .with_component(&self.id),
                );
            }
        }
        Ok(())
    }

    /// Survival probability over this component's mission window.
    pub fn reliability(&self, mission: f64) -> Result<f64> {
        let r = match self.window {
            Window::FreshStart => self.model.reliability_at(mission),
            Window::TestWindow { t_start } => self.model.windowed_reliability(t_start, mission),
        };
        r.map_err(|e| e.with_component(&self.id))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    Leaf(Component),
    Series(Vec<Block>),
    Parallel(Vec<Block>),
    KofN { k: usize, children: Vec<Block> },
}

impl Block {
    pub fn leaf(component: Component) -> Self {
        Block::Leaf(component)
    }

    /// Leaves in declaration (depth-first) order.
    pub fn leaves(&self) -> Vec<&Component> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Component>) {
        match self {
            Block::Leaf(c) => out.push(c),
            Block::Series(ch) | Block::Parallel(ch) | Block::KofN { children: ch, .. } => {
                ch.iter().for_each(|b| b.collect_leaves(out))
            }
        }
    }

    /// Checks child counts, k bounds, component constraints and id uniqueness.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        self.validate_into(&mut seen)
    }

    pub(crate) fn validate_into(&self, seen: &mut HashSet<String>) -> Result<()> {
        match self {
            Block::Leaf(c) => {
                c.validate()?;
                if !seen.insert(c.id.clone()) {
                    return Err(Error::Structure(format!(
                        "duplicate component id `{}`",
                        c.id
                    )));
                }
                Ok(())
            }
            Block::Series(ch) | Block::Parallel(ch) | Block::KofN { children: ch, .. } => {
                check_shape(self)?;
                ch.iter().try_for_each(|b| b.validate_into(seen))
            }
        }
    }
}

fn check_shape(block: &Block) -> Result<()> {
    match block {
        Block::Leaf(_) => Ok(()),
        Block::Series(ch) | Block::Parallel(ch) if ch.is_empty() => Err(Error::Structure(
            "series/parallel block needs at least one child".into(),
        )),
        Block::KofN { k, children } if *k < 1 || *k > children.len() => Err(Error::Structure(
            format!("k-of-n requires 1 <= k <= {}, got k = {k}", children.len()),
        )),
        _ => Ok(()),
    }
}

fn check_parts(parts: &[f64]) -> Result<()> {
    if parts.is_empty() {
        return Err(Error::domain("at least one reliability value is required"));
    }
    if let Some(bad) = parts.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::domain(format!(
            "reliability {bad} is outside [0, 1]"
        )));
    }
    Ok(())
}

/// All parts must work: `prod R_i`.
pub fn series_reliability(parts: &[f64]) -> Result<f64> {
    check_parts(parts)?;
    Ok(parts.iter().product())
}

/// At least one part must work: `1 - prod (1 - R_i)`, never below the best
/// single part.
pub fn parallel_reliability(parts: &[f64]) -> Result<f64> {
    check_parts(parts)?;
    if let [only] = parts {
        return Ok(*only);
    }
    let best = parts.iter().copied().fold(0.0, f64::max);
    Ok((1.0 - parts.iter().map(|r| 1.0 - r).product::<f64>()).max(best))
}

/// Probability that at least `k` of the independent, possibly
/// heterogeneous, parts work.
///
/// `dist[j]` is P(exactly j working) for `j < k`, built one part at a time
/// in O(n k); the result is `1 - sum(dist)`. Summing the same prefix makes
/// the value exactly non-increasing in `k`, and `k = 1` is the parallel
/// formula.
pub fn k_of_n_reliability(k: usize, parts: &[f64]) -> Result<f64> {
    check_parts(parts)?;
    if k < 1 || k > parts.len() {
        return Err(Error::domain(format!(
            "k must satisfy 1 <= k <= {}, got {k}",
            parts.len()
        )));
    }
    if k == 1 {
        return parallel_reliability(parts);
    }
    let mut dist = vec![0.0; k];
    dist[0] = 1.0;
    for &p in parts {
        let q = 1.0 - p;
        for j in (1..k).rev() {
            dist[j] = dist[j] * q + dist[j - 1] * p;
        }
        dist[0] *= q;
    }
    let below: f64 = dist.iter().sum();
    Ok((1.0 - below).clamp(0.0, 1.0))
}

/// Reliability of a block for the given mission length.
pub fn evaluate_block(block: &Block, mission: f64) -> Result<f64> {
    check_shape(block)?;
    match block {
        Block::Leaf(c) => c.reliability(mission),
        Block::Series(ch) => series_reliability(&eval_children(ch, mission)?),
        Block::Parallel(ch) => parallel_reliability(&eval_children(ch, mission)?),
        Block::KofN { k, children } => k_of_n_reliability(*k, &eval_children(children, mission)?),
    }
}

fn eval_children(children: &[Block], mission: f64) -> Result<Vec<f64>> {
    children
        .iter()
        .map(|b| evaluate_block(b, mission))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum CombinerMode {
    #[default]
    Product,
    /// Plain sum of the inputs; the result is not a probability.
    LiteralSum,
    /// Weighted mean; `None` means equal weights.
    NormalizedMean { weights: Option<Vec<f64>> },
}

impl CombinerMode {
    pub fn name(&self) -> &'static str {
        match self {
            CombinerMode::Product => "product",
            CombinerMode::LiteralSum => "literal_sum",
            CombinerMode::NormalizedMean { .. } => "normalized_mean",
        }
    }

    pub fn validate(&self, arity: Option<usize>) -> Result<()> {
        if let CombinerMode::NormalizedMean { weights: Some(w) } = self {
            if let Some(n) = arity {
                if w.len() != n {
                    return Err(Error::domain(format!(
                        "expected {n} weights, got {}",
                        w.len()
                    )));
                }
            }
            if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::domain("weights must be finite and non-negative"));
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                return Err(Error::domain(format!("weights must sum to 1, got {sum}")));
            }
        }
        Ok(())
    }
}

impl FromStr for CombinerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(CombinerMode::Product),
            "literal_sum" => Ok(CombinerMode::LiteralSum),
            "normalized_mean" => Ok(CombinerMode::NormalizedMean { weights: None }),
            other => Err(Error::domain(format!(
                "unknown combiner `{other}` (expected product, literal_sum or normalized_mean)"
            ))),
        }
    }
}

/// Output of a combiner; `exceeds_unity` is set when a literal sum leaves [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedValue {
    pub value: f64,
    pub exceeds_unity: bool,
}

pub fn combine(values: &[f64], mode: &CombinerMode) -> Result<CombinedValue> {
    check_parts(values)?;
    mode.validate(Some(values.len()))?;
    let value = match mode {
        CombinerMode::Product => values.iter().product(),
        CombinerMode::LiteralSum => values.iter().sum(),
        CombinerMode::NormalizedMean { weights: Some(w) } => values
            .iter()
            .zip(w)
            .map(|(v, w)| v * w)
            .sum::<f64>()
            .clamp(0.0, 1.0),
        CombinerMode::NormalizedMean { weights: None } => {
            (values.iter().sum::<f64>() / values.len() as f64).clamp(0.0, 1.0)
        }
    };
    Ok(CombinedValue {
        value,
        exceeds_unity: value > 1.0,
    })
}

/// Computation-and-control reliability from its software, hardware and
/// software/hardware interaction parts.
pub fn cc_reliability(sw: f64, hw: f64, sh: f64, mode: &CombinerMode) -> Result<CombinedValue> {
    combine(&[sw, hw, sh], mode)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModuleSlot {
    Sensors,
    Actuators,
    Network,
    CcSoftware,
    CcHardware,
    CcInteraction,
}

impl ModuleSlot {
    pub const ALL: [ModuleSlot; 6] = [
        ModuleSlot::Sensors,
        ModuleSlot::Actuators,
        ModuleSlot::Network,
        ModuleSlot::CcSoftware,
        ModuleSlot::CcHardware,
        ModuleSlot::CcInteraction,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ModuleSlot::Sensors => "sensors",
            ModuleSlot::Actuators => "actuators",
            ModuleSlot::Network => "network",
            ModuleSlot::CcSoftware => "cc_software",
            ModuleSlot::CcHardware => "cc_hardware",
            ModuleSlot::CcInteraction => "cc_interaction",
        }
    }

    /// Component kind assumed for leaves that do not state one.
    pub fn default_kind(self) -> ComponentKind {
        match self {
            ModuleSlot::Sensors => ComponentKind::Sensor,
            ModuleSlot::Actuators => ComponentKind::Actuator,
            ModuleSlot::Network => ComponentKind::Network,
            ModuleSlot::CcSoftware => ComponentKind::ComputeSoftware,
            ModuleSlot::CcHardware => ComponentKind::ComputeHardware,
            ModuleSlot::CcInteraction => ComponentKind::ComputeInteraction,
        }
    }
}

/// Whole-system layout: three physical/network modules plus the
/// computation-and-control module split into software, hardware and
/// interaction parts.
///
/// `cc_software` and `cc_interaction` may be absent, for instance when the
/// hardware block already models complete redundant control units; an
/// absent part counts as reliability 1 in every combiner mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CpsArchitecture {
    pub sensors: Block,
    pub actuators: Block,
    pub network: Block,
    pub cc_software: Option<Block>,
    pub cc_hardware: Block,
    pub cc_interaction: Option<Block>,
    pub cc_mode: CombinerMode,
    pub mission: f64,
    pub data_reliability: Option<f64>,
}

impl CpsArchitecture {
    /// Present module blocks in canonical order.
    pub fn modules(&self) -> Vec<(ModuleSlot, &Block)> {
        ModuleSlot::ALL
            .into_iter()
            .filter_map(|slot| self.module(slot).map(|b| (slot, b)))
            .collect()
    }

    pub fn module(&self, slot: ModuleSlot) -> Option<&Block> {
        match slot {
            ModuleSlot::Sensors => Some(&self.sensors),
            ModuleSlot::Actuators => Some(&self.actuators),
            ModuleSlot::Network => Some(&self.network),
            ModuleSlot::CcSoftware => self.cc_software.as_ref(),
            ModuleSlot::CcHardware => Some(&self.cc_hardware),
            ModuleSlot::CcInteraction => self.cc_interaction.as_ref(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mission.is_finite() && self.mission >= 0.0) {
            return Err(Error::domain(format!(
                "mission must be >= 0, got {}",
                self.mission
            )));
        }
        if let Some(d) = self.data_reliability {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::domain(format!(
                    "data reliability {d} is outside [0, 1]"
                )));
            }
        }
        self.cc_mode.validate(Some(3))?;
        let mut seen = HashSet::new();
        for (_, block) in self.modules() {
            block.validate_into(&mut seen)?;
        }
        Ok(())
    }
}

/// Per-module and system results of [`evaluate_cps`].
#[derive(Debug, Clone, PartialEq)]
pub struct CpsBreakdown {
    pub mission: f64,
    pub sensors: f64,
    pub actuators: f64,
    pub network: f64,
    pub cc_software: Option<f64>,
    pub cc_hardware: f64,
    pub cc_interaction: Option<f64>,
    pub cc: CombinedValue,
    /// Product of the four module reliabilities, without the data term.
    pub system: f64,
    /// `system * data_reliability`, when a data term is configured.
    pub system_with_data: Option<f64>,
}

impl CpsBreakdown {
    /// The most complete system figure: with data when available.
    pub fn headline(&self) -> f64 {
        self.system_with_data.unwrap_or(self.system)
    }

    pub fn module_values(&self) -> Vec<(ModuleSlot, f64)> {
        let mut v = vec![
            (ModuleSlot::Sensors, self.sensors),
            (ModuleSlot::Actuators, self.actuators),
            (ModuleSlot::Network, self.network),
        ];
        if let Some(r) = self.cc_software {
            v.push((ModuleSlot::CcSoftware, r));
        }
        v.push((ModuleSlot::CcHardware, self.cc_hardware));
        if let Some(r) = self.cc_interaction {
            v.push((ModuleSlot::CcInteraction, r));
        }
        v
    }
}

/// Evaluates every module at `mission` and combines them.
///
/// A literal-sum computation-and-control value is only multiplied into the
/// system figure when `allow_literal_sum` is set.
pub fn evaluate_cps(
    arch: &CpsArchitecture,
    mission: f64,
    allow_literal_sum: bool,
) -> Result<CpsBreakdown> {
    arch.validate()?;
    let eval = |b: &Block| evaluate_block(b, mission);
    let sensors = eval(&arch.sensors)?;
    let actuators = eval(&arch.actuators)?;
    let network = eval(&arch.network)?;
    let cc_software = arch.cc_software.as_ref().map(eval).transpose()?;
    let cc_hardware = eval(&arch.cc_hardware)?;
    let cc_interaction = arch.cc_interaction.as_ref().map(eval).transpose()?;
    let cc = cc_reliability(
        cc_software.unwrap_or(1.0),
        cc_hardware,
        cc_interaction.unwrap_or(1.0),
        &arch.cc_mode,
    )?;
    if arch.cc_mode == CombinerMode::LiteralSum && !allow_literal_sum {
        return Err(Error::LiteralSumRefused { value: cc.value });
    }
    let system = cc.value * actuators * sensors * network;
    Ok(CpsBreakdown {
        mission,
        sensors,
        actuators,
        network,
        cc_software,
        cc_hardware,
        cc_interaction,
        cc,
        system,
        system_with_data: arch.data_reliability.map(|d| system * d),
    })
}

/// System reliability at the architecture's own mission, including the
/// data term when present. Literal-sum control modes are refused.
pub fn cps_reliability(arch: &CpsArchitecture) -> Result<f64> {
    evaluate_cps(arch, arch.mission, false).map(|b| b.headline())
}
