//! Off-the-shelf component catalogs and best-candidate selection.
//!
//! Catalog files are comma-separated with the header
//! `component_id,module_kind,model_type,p1,p2,p3,source`:
//!
//! | model_type | p1                      | p2    | p3                         |
//! |------------|-------------------------|-------|----------------------------|
//! | constant   | failures per 10^6 hours | -     | -                          |
//! | powerlaw   | scale (per hour^shape)  | shape | optional age in hours      |
//! | srgm       | a                       | b     | optional test time in hours |

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::composition::{
    evaluate_cps, Block, CombinerMode, Component, ComponentKind, CpsArchitecture, CpsBreakdown,
    Window,
};
use crate::error::{Error, Result};
use crate::failure_model::FailureModel;

pub const CATALOG_HEADER: [&str; 7] = [
    "component_id",
    "module_kind",
    "model_type",
    "p1",
    "p2",
    "p3",
    "source",
];

/// Catalog rates are quoted per 10^6 hours.
pub const RATE_UNIT_HOURS: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub component_id: String,
    pub module_kind: ComponentKind,
    /// Model with rates already converted to per hour.
    pub model: FailureModel,
    pub window: Window,
    pub source: String,
}

impl CatalogEntry {
    pub fn reliability(&self, mission: f64) -> Result<f64> {
        self.instantiate(&self.component_id)?.reliability(mission)
    }

    fn instantiate(&self, id: &str) -> Result<Component> {
        Component::new(id, self.module_kind, self.model, self.window)
    }
}

fn parse_param(raw: &str, name: &str, line: u64) -> Result<Option<f64>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse::<f64>().map(Some).map_err(|_| Error::Catalog {
        line,
        message: format!("{name}: `{raw}` is not a number"),
    })
}

pub fn load_catalog(path: &Path) -> Result<Vec<CatalogEntry>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_catalog(file)
}

pub fn read_catalog<R: std::io::Read>(reader: R) -> Result<Vec<CatalogEntry>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Catalog {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.iter().ne(CATALOG_HEADER) {
        return Err(Error::Catalog {
            line: 1,
            message: format!("header must be `{}`", CATALOG_HEADER.join(",")),
        });
    }

    let mut entries = Vec::new();
    let mut ids = HashSet::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Catalog {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != CATALOG_HEADER.len() {
            return Err(Error::Catalog {
                line,
                message: format!(
                    "expected {} fields, found {}",
                    CATALOG_HEADER.len(),
                    row.len()
                ),
            });
        }
        let id = row[0].to_owned();
        if id.is_empty() {
            return Err(Error::Catalog {
                line,
                message: "empty component_id".into(),
            });
        }
        let kind: ComponentKind = row[1].parse().map_err(|e: Error| Error::Catalog {
            line,
            message: e.to_string(),
        })?;
        let p1 = parse_param(&row[3], "p1", line)?;
        let p2 = parse_param(&row[4], "p2", line)?;
        let p3 = parse_param(&row[5], "p3", line)?;
        let need = |p: Option<f64>, name: &str| {
            p.ok_or_else(|| Error::Catalog {
                line,
                message: format!("{} model needs {name}", &row[2]),
            })
        };
        let entry_err = |e: Error| Error::CatalogEntry {
            id: id.clone(),
            message: match e {
                Error::Domain(m) => m,
                other => other.to_string(),
            },
        };
        let (model, window) = match row[2].to_ascii_lowercase().as_str() {
            "constant" => {
                let rate = need(p1, "p1 (rate per 10^6 h)")?;
                let m = FailureModel::constant_rate(rate / RATE_UNIT_HOURS).map_err(entry_err)?;
                (m, Window::FreshStart)
            }
            "powerlaw" => {
                let m = FailureModel::power_law(need(p1, "p1 (scale)")?, need(p2, "p2 (shape)")?)
                    .map_err(entry_err)?;
                let w = match p3 {
                    Some(t_start) if t_start >= 0.0 => Window::TestWindow { t_start },
                    Some(t) => {
                        return Err(entry_err(Error::Domain(format!(
                            "age must be >= 0, got {t}"
                        ))))
                    }
                    None => Window::FreshStart,
                };
                (m, w)
            }
            "srgm" => {
                let m =
                    FailureModel::srgm(need(p1, "p1 (a)")?, need(p2, "p2 (b)")?, p3.unwrap_or(0.0))
                        .map_err(entry_err)?;
                (m, Window::FreshStart)
            }
            other => {
                return Err(Error::Catalog {
                    line,
                    message: format!("unknown model_type `{other}` (constant, powerlaw, srgm)"),
                })
            }
        };
        if !ids.insert(id.clone()) {
            return Err(entry_err(Error::Domain("duplicate component_id".into())));
        }
        let entry = CatalogEntry {
            component_id: id.clone(),
            module_kind: kind,
            model,
            window,
            source: row[6].to_owned(),
        };
        // enforces kind/model compatibility
        entry
            .instantiate(&id)
            .map_err(|e| entry_err(strip_component(e)))?;
        entries.push(entry);
    }
    Ok(entries)
}

fn strip_component(e: Error) -> Error {
    match e {
        Error::Component { source, .. } => *source,
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedCandidate {
    pub entry: CatalogEntry,
    pub reliability: f64,
}

/// Orders same-kind candidates by reliability at `mission`, best first;
/// equal reliabilities are ordered by ascending component id.
pub fn rank_module(
    kind: ComponentKind,
    entries: &[CatalogEntry],
    mission: f64,
) -> Result<Vec<RankedCandidate>> {
    if entries.is_empty() {
        return Err(Error::MissingModules(vec![kind.to_string()]));
    }
    let mut ranked = entries
        .iter()
        .map(|e| {
            if e.module_kind != kind {
                return Err(Error::CatalogEntry {
                    id: e.component_id.clone(),
                    message: format!("is a {}, not a {kind}", e.module_kind),
                });
            }
            Ok(RankedCandidate {
                entry: e.clone(),
                reliability: e.reliability(mission)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| {
        b.reliability
            .total_cmp(&a.reliability)
            .then_with(|| a.entry.component_id.cmp(&b.entry.component_id))
    });
    Ok(ranked)
}

/// `copies` independent instances of `chosen` in parallel, with ids
/// `<id>-1 .. <id>-n`. A single copy is returned as a bare leaf.
pub fn build_redundant_block(chosen: &CatalogEntry, copies: usize) -> Result<Block> {
    redundant(copies, |tag| {
        Ok(Block::Leaf(
            chosen.instantiate(&format!("{}{tag}", chosen.component_id))?,
        ))
    })
}

fn redundant(copies: usize, make: impl Fn(&str) -> Result<Block>) -> Result<Block> {
    if copies == 0 {
        return Err(Error::domain("redundancy needs at least one copy"));
    }
    let mut units = (1..=copies)
        .map(|c| make(&format!("-{c}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(if copies == 1 {
        units.remove(0)
    } else {
        Block::Parallel(units)
    })
}

/// `positions` distinct slots in series, each a redundant group.
fn slotted(positions: usize, copies: usize, make: impl Fn(&str) -> Result<Block>) -> Result<Block> {
    if positions == 0 {
        return Err(Error::domain("a module needs at least one position"));
    }
    if positions == 1 {
        return redundant(copies, &make);
    }
    let slots = (1..=positions)
        .map(|p| redundant(copies, |tag| make(&format!(".{p}{tag}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Block::Series(slots))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Redundancy {
    /// Distinct functional slots in series.
    pub positions: usize,
    /// Parallel copies per slot.
    pub copies: usize,
}

impl fmt::Display for Redundancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.positions, self.copies)
    }
}

/// Per-module layout. The default has five sensor slots and three actuator
/// slots, one network and one computation-and-control unit, everything
/// duplicated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RedundancyPlan {
    pub sensors: Redundancy,
    pub actuators: Redundancy,
    pub network: Redundancy,
    pub cc: Redundancy,
}

impl Default for RedundancyPlan {
    fn default() -> Self {
        let r = |positions| Redundancy {
            positions,
            copies: 2,
        };
        RedundancyPlan {
            sensors: r(5),
            actuators: r(3),
            network: r(1),
            cc: r(1),
        }
    }
}

impl fmt::Display for RedundancyPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sensors={},actuators={},network={},cc={}",
            self.sensors, self.actuators, self.network, self.cc
        )
    }
}

impl FromStr for RedundancyPlan {
    type Err = Error;

    /// Overrides on top of the default plan: `module=copies` or
    /// `module=<positions>x<copies>`, comma separated.
    fn from_str(s: &str) -> Result<Self> {
        let mut plan = RedundancyPlan::default();
        for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let (module, value) = item.split_once('=').ok_or_else(|| {
                Error::domain(format!("redundancy item `{item}` is not module=count"))
            })?;
            let slot = match module.trim() {
                "sensors" => &mut plan.sensors,
                "actuators" => &mut plan.actuators,
                "network" => &mut plan.network,
                "cc" => &mut plan.cc,
                other => {
                    return Err(Error::domain(format!(
                        "unknown module `{other}` (sensors, actuators, network, cc)"
                    )))
                }
            };
            let count = |t: &str| -> Result<usize> {
                match t.trim().parse::<usize>() {
                    Ok(n) if n >= 1 => Ok(n),
                    _ => Err(Error::domain(format!(
                        "`{t}` in `{item}` is not a positive count"
                    ))),
                }
            };
            match value.split_once('x') {
                Some((p, c)) => {
                    slot.positions = count(p)?;
                    slot.copies = count(c)?;
                }
                None => slot.copies = count(value)?,
            }
        }
        Ok(plan)
    }
}

/// The entry used for each module.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleChoices {
    pub sensor: CatalogEntry,
    pub actuator: CatalogEntry,
    pub network: CatalogEntry,
    pub cc_hardware: CatalogEntry,
    pub cc_software: Option<CatalogEntry>,
    pub cc_interaction: Option<CatalogEntry>,
}

/// Builds the architecture for fixed choices. A computation-and-control unit
/// is its hardware, software and interaction entries in series; redundant
/// units are paralleled as whole units and placed in the hardware slot.
pub fn build_architecture(
    choices: &ModuleChoices,
    mission: f64,
    plan: &RedundancyPlan,
) -> Result<CpsArchitecture> {
    let simple = |entry: &CatalogEntry, r: Redundancy| {
        slotted(r.positions, r.copies, |tag| {
            Ok(Block::Leaf(
                entry.instantiate(&format!("{}{tag}", entry.component_id))?,
            ))
        })
    };
    let unit_parts: Vec<&CatalogEntry> = [
        Some(&choices.cc_hardware),
        choices.cc_software.as_ref(),
        choices.cc_interaction.as_ref(),
    ]
    .into_iter()
    .flatten()
    .collect();
    let cc = slotted(plan.cc.positions, plan.cc.copies, |tag| {
        let leaves = unit_parts
            .iter()
            .map(|e| {
                Ok(Block::Leaf(
                    e.instantiate(&format!("{}{tag}", e.component_id))?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(if leaves.len() == 1 {
            leaves.into_iter().next().unwrap()
        } else {
            Block::Series(leaves)
        })
    })?;
    let arch = CpsArchitecture {
        sensors: simple(&choices.sensor, plan.sensors)?,
        actuators: simple(&choices.actuator, plan.actuators)?,
        network: simple(&choices.network, plan.network)?,
        cc_software: None,
        cc_hardware: cc,
        cc_interaction: None,
        cc_mode: CombinerMode::Product,
        mission,
        data_reliability: None,
    };
    arch.validate()?;
    Ok(arch)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleSelection {
    pub kind: ComponentKind,
    pub ranked: Vec<RankedCandidate>,
    /// The runner-up has exactly the chosen candidate's reliability.
    pub tie: bool,
}

impl ModuleSelection {
    pub fn chosen(&self) -> &RankedCandidate {
        &self.ranked[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub mission: f64,
    pub plan: RedundancyPlan,
    pub modules: Vec<ModuleSelection>,
    pub breakdown: CpsBreakdown,
}

impl SelectionReport {
    /// System reliability without a data term.
    pub fn r_cps(&self) -> f64 {
        self.breakdown.system
    }
}

const REQUIRED_KINDS: [ComponentKind; 4] = [
    ComponentKind::Sensor,
    ComponentKind::Actuator,
    ComponentKind::Network,
    ComponentKind::ComputeHardware,
];
const OPTIONAL_KINDS: [ComponentKind; 2] = [
    ComponentKind::ComputeSoftware,
    ComponentKind::ComputeInteraction,
];

/// Picks the most reliable entry per module kind at `mission` and assembles
/// the redundant architecture described by `plan`.
pub fn assemble_architecture(
    catalog: &[CatalogEntry],
    mission: f64,
    plan: &RedundancyPlan,
) -> Result<(CpsArchitecture, SelectionReport)> {
    let mut by_kind: BTreeMap<ComponentKind, Vec<CatalogEntry>> = BTreeMap::new();
    for e in catalog {
        by_kind.entry(e.module_kind).or_default().push(e.clone());
    }
    let missing: Vec<String> = REQUIRED_KINDS
        .iter()
        .filter(|k| !by_kind.contains_key(k))
        .map(|k| k.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingModules(missing));
    }

    let mut modules = Vec::new();
    for kind in REQUIRED_KINDS.into_iter().chain(OPTIONAL_KINDS) {
        if let Some(entries) = by_kind.get(&kind) {
            let ranked = rank_module(kind, entries, mission)?;
            let tie = ranked.len() > 1 && ranked[1].reliability == ranked[0].reliability;
            modules.push(ModuleSelection { kind, ranked, tie });
        }
    }
    let pick = |kind| {
        modules
            .iter()
            .find(|m| m.kind == kind)
            .map(|m| m.chosen().entry.clone())
    };
    let choices = ModuleChoices {
        sensor: pick(ComponentKind::Sensor).expect("required kind present"),
        actuator: pick(ComponentKind::Actuator).expect("required kind present"),
        network: pick(ComponentKind::Network).expect("required kind present"),
        cc_hardware: pick(ComponentKind::ComputeHardware).expect("required kind present"),
        cc_software: pick(ComponentKind::ComputeSoftware),
        cc_interaction: pick(ComponentKind::ComputeInteraction),
    };
    let arch = build_architecture(&choices, mission, plan)?;
    let breakdown = evaluate_cps(&arch, mission, false)?;
    Ok((
        arch,
        SelectionReport {
            mission,
            plan: *plan,
            modules,
            breakdown,
        },
    ))
}
