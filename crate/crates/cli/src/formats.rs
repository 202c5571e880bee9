//! JSON input files and their conversion into core types.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use feederplan_core::feeder::DEFAULT_NODE_WEIGHT;
use feederplan_core::{DamageScenario, DamagedEdge, Edge, FeederGraph, HardeningMenu, MenuOption, Node};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::Failure;

fn default_weight() -> f64 {
    DEFAULT_NODE_WEIGHT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeFile {
    pub id: String,
    #[serde(default = "default_weight")]
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeFile {
    pub id: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeederFile {
    pub name: String,
    pub source: String,
    pub nodes: Vec<NodeFile>,
    pub edges: Vec<EdgeFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DamageFile {
    pub edge: String,
    pub repair_time: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub damaged: Vec<DamageFile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionFile {
    pub dp: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MenuFile {
    pub options: BTreeMap<String, Vec<OptionFile>>,
}

impl From<FeederFile> for FeederGraph {
    fn from(f: FeederFile) -> Self {
        FeederGraph {
            name: f.name,
            source: f.source,
            nodes: f
                .nodes
                .into_iter()
                .map(|n| Node {
                    id: n.id,
                    weight: n.weight,
                })
                .collect(),
            edges: f
                .edges
                .into_iter()
                .map(|e| Edge {
                    id: e.id,
                    from: e.from,
                    to: e.to,
                })
                .collect(),
        }
    }
}

impl From<&FeederGraph> for FeederFile {
    fn from(g: &FeederGraph) -> Self {
        FeederFile {
            name: g.name.clone(),
            source: g.source.clone(),
            nodes: g
                .nodes
                .iter()
                .map(|n| NodeFile {
                    id: n.id.clone(),
                    weight: n.weight,
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeFile {
                    id: e.id.clone(),
                    from: e.from.clone(),
                    to: e.to.clone(),
                })
                .collect(),
        }
    }
}

impl From<ScenarioFile> for DamageScenario {
    fn from(s: ScenarioFile) -> Self {
        DamageScenario {
            damaged: s
                .damaged
                .into_iter()
                .map(|d| DamagedEdge {
                    edge: d.edge,
                    repair_time: d.repair_time,
                })
                .collect(),
        }
    }
}

impl From<&DamageScenario> for ScenarioFile {
    fn from(s: &DamageScenario) -> Self {
        ScenarioFile {
            damaged: s
                .damaged
                .iter()
                .map(|d| DamageFile {
                    edge: d.edge.clone(),
                    repair_time: d.repair_time,
                })
                .collect(),
        }
    }
}

impl MenuFile {
    pub fn menus(&self) -> Vec<HardeningMenu> {
        self.options
            .iter()
            .map(|(edge, opts)| HardeningMenu {
                edge: edge.clone(),
                options: opts.iter().map(|o| MenuOption::new(o.dp, o.cost)).collect(),
            })
            .collect()
    }

    pub fn from_menus(menus: &[HardeningMenu]) -> Self {
        MenuFile {
            options: menus
                .iter()
                .map(|m| {
                    let opts = m
                        .options
                        .iter()
                        .map(|o| OptionFile { dp: o.dp, cost: o.cost })
                        .collect();
                    (m.edge.clone(), opts)
                })
                .collect(),
        }
    }
}

/// Parses `text`, collecting the paths of fields the schema does not know.
pub fn parse_json<T: DeserializeOwned>(text: &str, strict: bool, what: &str) -> Result<T> {
    let mut unknown = Vec::new();
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_ignored::deserialize(&mut de, |path| unknown.push(path.to_string()))
        .map_err(|e| Failure::new("parse", format!("{what}: {e}")))?;
    de.end().map_err(|e| Failure::new("parse", format!("{what}: {e}")))?;
    if !unknown.is_empty() {
        if strict {
            return Err(Failure::new(
                "unknown-field",
                format!("{what}: unknown field(s) {}", unknown.join(", ")),
            )
            .into());
        }
        for path in &unknown {
            eprintln!("warning: {what}: ignoring unknown field `{path}`");
        }
    }
    Ok(value)
}

pub fn read_json<T: DeserializeOwned>(path: &Path, strict: bool) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_json(&text, strict, &path.display().to_string())
}

pub fn read_feeder(path: &Path, strict: bool) -> Result<FeederGraph> {
    Ok(read_json::<FeederFile>(path, strict)?.into())
}

pub fn read_scenario(path: &Path, strict: bool) -> Result<DamageScenario> {
    Ok(read_json::<ScenarioFile>(path, strict)?.into())
}

pub fn read_menus(path: &Path, strict: bool) -> Result<Vec<HardeningMenu>> {
    Ok(read_json::<MenuFile>(path, strict)?.menus())
}

/// Formats `x` with 17 significant digits, '.' as the decimal mark and no
/// trailing zeros, so the text parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".to_string() } else { x.to_string() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 15.368, 1e-7, 2.5e20, -42.0, 9.5, 123456.789] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            assert!(!s.contains(','));
        }
        assert_eq!(fmt_f64(9.5), "9.5");
        assert_eq!(fmt_f64(20.0), "20");
        assert_eq!(fmt_f64(0.0), "0");
    }

    #[test]
    fn missing_weight_defaults_to_one() {
        let f: FeederFile = parse_json(
            r#"{"name":"t","source":"a","nodes":[{"id":"a"},{"id":"b","weight":2}],"edges":[{"id":"e","from":"a","to":"b"}]}"#,
            true,
            "feeder",
        )
        .unwrap();
        assert_eq!(f.nodes[0].weight, 1.0);
        assert_eq!(f.nodes[1].weight, 2.0);
    }

    #[test]
    fn strict_mode_rejects_unknown_fields() {
        let text = r#"{"damaged":[{"edge":"e","repair_time":2,"crew":3}],"note":"x"}"#;
        let err = parse_json::<ScenarioFile>(text, true, "scenario").unwrap_err();
        let failure = err.downcast_ref::<Failure>().unwrap();
        assert_eq!(failure.code, "unknown-field");
        assert!(failure.message.contains("damaged.0.crew"));
        let lenient: ScenarioFile = parse_json(text, false, "scenario").unwrap();
        assert_eq!(lenient.damaged.len(), 1);
    }
}
