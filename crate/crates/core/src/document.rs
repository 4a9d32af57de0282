//! JSON architecture documents.
//!
//! ```json
//! {
//!   "mission_hours": 8760,
//!   "cc_mode": "product",
//!   "data_reliability": 0.98,
//!   "modules": {
//!     "sensors":   {"type": "parallel", "children": [
//!                    {"type": "leaf", "id": "S1-1", "model": {"type": "constant", "lambda": 1e-5}},
//!                    {"type": "leaf", "id": "S1-2", "model": {"type": "constant", "lambda": 1e-5}}]},
//!     "actuators": {"type": "leaf", "id": "A1", "model": {"type": "power_law", "scale": 1e-6, "shape": 1.2}},
//!     "network":   {"type": "leaf", "id": "N1", "model": {"type": "constant", "lambda": 2e-6}},
//!     "cc_hardware": {"type": "k_of_n", "k": 2, "children": [ ... ]}
//!   }
//! }
//! ```
//!
//! `cc_mode` is `"product"`, `"literal_sum"`, `"normalized_mean"` or
//! `{"mode": "normalized_mean", "weights": [w_sw, w_hw, w_sh]}`.
//! `cc_software` and `cc_interaction` are optional. Leaves may carry `name`,
//! `kind` (defaults to the module's kind) and `window: {"t_start": h}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::composition::{
    Block, CombinerMode, Component, ComponentKind, CpsArchitecture, ModuleSlot, Window,
};
use crate::error::{Error, Result};
use crate::failure_model::{FailureModel, ModelSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureDocument {
    pub mission_hours: f64,
    #[serde(default = "default_cc_mode")]
    pub cc_mode: CcModeDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_reliability: Option<f64>,
    pub modules: ModulesDoc,
}

fn default_cc_mode() -> CcModeDoc {
    CcModeDoc::Name("product".into())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CcModeDoc {
    Name(String),
    Detailed {
        mode: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulesDoc {
    pub sensors: NodeDoc,
    pub actuators: NodeDoc,
    pub network: NodeDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cc_software: Option<NodeDoc>,
    pub cc_hardware: NodeDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cc_interaction: Option<NodeDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum NodeDoc {
    Leaf {
        id: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kind: Option<ComponentKind>,
        model: ModelSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<WindowDoc>,
    },
    Series {
        children: Vec<NodeDoc>,
    },
    Parallel {
        children: Vec<NodeDoc>,
    },
    KOfN {
        k: usize,
        children: Vec<NodeDoc>,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowDoc {
    pub t_start: f64,
}

fn doc_err(path: &str, e: impl std::fmt::Display) -> Error {
    Error::Document {
        path: path.to_owned(),
        message: e.to_string(),
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Domain(m) | Error::Structure(m) => m,
        Error::Component { source, .. } => strip(*source),
        other => other.to_string(),
    }
}

impl NodeDoc {
    fn to_block(&self, path: &str, default_kind: ComponentKind) -> Result<Block> {
        let children = |ch: &[NodeDoc]| -> Result<Vec<Block>> {
            if ch.is_empty() {
                return Err(doc_err(&format!("{path}.children"), "must not be empty"));
            }
            ch.iter()
                .enumerate()
                .map(|(i, c)| c.to_block(&format!("{path}.children[{i}]"), default_kind))
                .collect()
        };
        Ok(match self {
            NodeDoc::Leaf {
                id,
                name,
                kind,
                model,
                window,
            } => {
                let model = FailureModel::try_from(*model)
                    .map_err(|e| doc_err(&format!("{path}.model"), strip(e)))?;
                let window = match window {
                    Some(w) => Window::TestWindow { t_start: w.t_start },
                    None => Window::FreshStart,
                };
                let c = Component::new(id.clone(), kind.unwrap_or(default_kind), model, window)
                    .map_err(|e| doc_err(path, strip(e)))?;
                Block::Leaf(match name {
                    Some(n) => c.with_name(n.clone()),
                    None => c,
                })
            }
            NodeDoc::Series { children: ch } => Block::Series(children(ch)?),
            NodeDoc::Parallel { children: ch } => Block::Parallel(children(ch)?),
            NodeDoc::KOfN { k, children: ch } => {
                if *k < 1 || *k > ch.len() {
                    return Err(doc_err(
                        &format!("{path}.k"),
                        format!("must satisfy 1 <= k <= {}, got {k}", ch.len()),
                    ));
                }
                Block::KofN {
                    k: *k,
                    children: children(ch)?,
                }
            }
        })
    }

    pub fn from_block(block: &Block) -> Self {
        let kids = |ch: &[Block]| ch.iter().map(NodeDoc::from_block).collect();
        match block {
            Block::Leaf(c) => NodeDoc::Leaf {
                id: c.id.clone(),
                name: (c.name != c.id).then(|| c.name.clone()),
                kind: Some(c.kind),
                model: c.model.into(),
                window: match c.window {
                    Window::FreshStart => None,
                    Window::TestWindow { t_start } => Some(WindowDoc { t_start }),
                },
            },
            Block::Series(ch) => NodeDoc::Series { children: kids(ch) },
            Block::Parallel(ch) => NodeDoc::Parallel { children: kids(ch) },
            Block::KofN { k, children } => NodeDoc::KOfN {
                k: *k,
                children: kids(children),
            },
        }
    }
}

impl CcModeDoc {
    fn to_mode(&self) -> Result<CombinerMode> {
        let (name, weights) = match self {
            CcModeDoc::Name(n) => (n.as_str(), None),
            CcModeDoc::Detailed { mode, weights } => (mode.as_str(), weights.clone()),
        };
        let mode = match (
            name.parse::<CombinerMode>()
                .map_err(|e| doc_err("cc_mode", strip(e)))?,
            weights,
        ) {
            (CombinerMode::NormalizedMean { .. }, w) => CombinerMode::NormalizedMean { weights: w },
            (_, Some(_)) => {
                return Err(doc_err(
                    "cc_mode.weights",
                    "weights apply to normalized_mean only",
                ))
            }
            (m, None) => m,
        };
        mode.validate(Some(3))
            .map_err(|e| doc_err("cc_mode.weights", strip(e)))?;
        Ok(mode)
    }

    fn from_mode(mode: &CombinerMode) -> Self {
        match mode {
            CombinerMode::NormalizedMean { weights: Some(w) } => CcModeDoc::Detailed {
                mode: mode.name().into(),
                weights: Some(w.clone()),
            },
            m => CcModeDoc::Name(m.name().into()),
        }
    }
}

impl ArchitectureDocument {
    pub fn to_architecture(&self) -> Result<CpsArchitecture> {
        if !(self.mission_hours.is_finite() && self.mission_hours >= 0.0) {
            return Err(doc_err(
                "mission_hours",
                format!("must be >= 0, got {}", self.mission_hours),
            ));
        }
        if let Some(d) = self.data_reliability {
            if !(0.0..=1.0).contains(&d) {
                return Err(doc_err(
                    "data_reliability",
                    format!("{d} is outside [0, 1]"),
                ));
            }
        }
        let m = &self.modules;
        let block = |slot: ModuleSlot, node: &NodeDoc| {
            node.to_block(&format!("modules.{}", slot.key()), slot.default_kind())
        };
        let arch = CpsArchitecture {
            sensors: block(ModuleSlot::Sensors, &m.sensors)?,
            actuators: block(ModuleSlot::Actuators, &m.actuators)?,
            network: block(ModuleSlot::Network, &m.network)?,
            cc_software: m
                .cc_software
                .as_ref()
                .map(|n| block(ModuleSlot::CcSoftware, n))
                .transpose()?,
            cc_hardware: block(ModuleSlot::CcHardware, &m.cc_hardware)?,
            cc_interaction: m
                .cc_interaction
                .as_ref()
                .map(|n| block(ModuleSlot::CcInteraction, n))
                .transpose()?,
            cc_mode: self.cc_mode.to_mode()?,
            mission: self.mission_hours,
            data_reliability: self.data_reliability,
        };
        arch.validate().map_err(|e| doc_err("modules", strip(e)))?;
        Ok(arch)
    }

    pub fn from_architecture(arch: &CpsArchitecture) -> Self {
        ArchitectureDocument {
            mission_hours: arch.mission,
            cc_mode: CcModeDoc::from_mode(&arch.cc_mode),
            data_reliability: arch.data_reliability,
            modules: ModulesDoc {
                sensors: NodeDoc::from_block(&arch.sensors),
                actuators: NodeDoc::from_block(&arch.actuators),
                network: NodeDoc::from_block(&arch.network),
                cc_software: arch.cc_software.as_ref().map(NodeDoc::from_block),
                cc_hardware: NodeDoc::from_block(&arch.cc_hardware),
                cc_interaction: arch.cc_interaction.as_ref().map(NodeDoc::from_block),
            },
        }
    }
}

/// Parses and validates an architecture document.
pub fn parse_architecture(text: &str) -> Result<CpsArchitecture> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ArchitectureDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        doc_err(&path, e.into_inner())
    })?;
    doc.to_architecture()
}

pub fn load_architecture(path: &Path) -> Result<CpsArchitecture> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_architecture(&text)
}

/// Pretty-printed JSON; floats are written in shortest round-trip form.
pub fn architecture_to_json(arch: &CpsArchitecture) -> String {
    let doc = ArchitectureDocument::from_architecture(arch);
    let mut s = serde_json::to_string_pretty(&doc).expect("document serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::{cps_reliability, evaluate_cps};

    const DOC: &str = r#"{
      "mission_hours": 1000,
      "cc_mode": {"mode": "normalized_mean", "weights": [0.2, 0.5, 0.3]},
      "data_reliability": 0.97,
      "modules": {
        "sensors": {"type": "k_of_n", "k": 2, "children": [
          {"type": "leaf", "id": "S1", "model": {"type": "constant", "lambda": 1e-4}},
          {"type": "leaf", "id": "S2", "model": {"type": "constant", "lambda": 2e-4}},
          {"type": "leaf", "id": "S3", "name": "humidity", "model": {"type": "constant", "lambda": 3e-4}}
        ]},
        "actuators": {"type": "parallel", "children": [
          {"type": "leaf", "id": "A1", "model": {"type": "power_law", "scale": 1e-5, "shape": 1.3}},
          {"type": "leaf", "id": "A2", "model": {"type": "power_law", "scale": 1e-5, "shape": 1.3}}
        ]},
        "network": {"type": "leaf", "id": "N1", "model": {"type": "constant", "lambda": 5e-6}},
        "cc_software": {"type": "leaf", "id": "SW", "model": {"type": "srgm", "a": 30, "b": 0.002, "t_test": 2000}},
        "cc_hardware": {"type": "series", "children": [
          {"type": "leaf", "id": "CPU", "model": {"type": "power_law", "scale": 2e-7, "shape": 1.8}}
        ]},
        "cc_interaction": {"type": "leaf", "id": "SH", "model": {"type": "power_law", "scale": 1e-4, "shape": 0.8}, "window": {"t_start": 500}}
      }
    }"#;

    #[test]
    fn parses_full_document() {
        let arch = parse_architecture(DOC).unwrap();
        assert_eq!(arch.mission, 1000.0);
        assert_eq!(arch.sensors.leaves().len(), 3);
        assert_eq!(arch.sensors.leaves()[2].name, "humidity");
        assert_eq!(
            arch.cc_software.as_ref().unwrap().leaves()[0].kind,
            ComponentKind::ComputeSoftware
        );
        assert_eq!(
            arch.cc_interaction.as_ref().unwrap().leaves()[0].window,
            Window::TestWindow { t_start: 500.0 }
        );
        let r = cps_reliability(&arch).unwrap();
        assert!(r > 0.0 && r < 1.0);
    }

    #[test]
    fn emitted_document_round_trips() {
        let arch = parse_architecture(DOC).unwrap();
        let json = architecture_to_json(&arch);
        let again = parse_architecture(&json).unwrap();
        assert_eq!(arch, again);
        let a = evaluate_cps(&arch, arch.mission, false).unwrap();
        let b = evaluate_cps(&again, again.mission, false).unwrap();
        assert_eq!(a, b);
    }

    fn expect_path(text: &str, want: &str) {
        match parse_architecture(text) {
            Err(Error::Document { path, .. }) => assert_eq!(path, want, "{text}"),
            other => panic!("expected document error at {want}, got {other:?}"),
        }
    }

    #[test]
    fn errors_are_path_qualified() {
        expect_path(
            &DOC.replace("\"lambda\": 2e-4", "\"lambda\": -2e-4"),
            "modules.sensors.children[1].model",
        );
        expect_path(&DOC.replace("\"k\": 2", "\"k\": 4"), "modules.sensors.k");
        expect_path(
            &DOC.replace(
                "\"weights\": [0.2, 0.5, 0.3]",
                "\"weights\": [0.2, 0.5, 0.4]",
            ),
            "cc_mode.weights",
        );
        expect_path(&DOC.replace("\"id\": \"S2\"", "\"id\": \"S1\""), "modules");
        expect_path(
            &DOC.replace("\"data_reliability\": 0.97", "\"data_reliability\": 1.5"),
            "data_reliability",
        );
        expect_path(
            &DOC.replace("\"type\": \"series\"", "\"type\": \"chain\""),
            "modules.cc_hardware.type",
        );
        expect_path(
            &DOC.replace("\"mission_hours\": 1000", "\"mission_hours\": -1"),
            "mission_hours",
        );
    }

    #[test]
    fn literal_sum_mode_parses() {
        let doc = DOC.replace(
            r#"{"mode": "normalized_mean", "weights": [0.2, 0.5, 0.3]}"#,
            r#""literal_sum""#,
        );
        let arch = parse_architecture(&doc).unwrap();
        assert_eq!(arch.cc_mode, CombinerMode::LiteralSum);
    }
}
