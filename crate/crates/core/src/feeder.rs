//! Radial feeder networks, damage scenarios, and the two derived graphs the
//! planner works on: the damaged component graph (intact regions contracted to
//! supernodes) and the soft precedence outtree over damaged edges.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::dsu::DisjointSet;
use crate::error::{Error, Result};
use crate::precedence::{Job, PrecedenceGraph};

/// Node weight used when the input omits one.
pub const DEFAULT_NODE_WEIGHT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub from: String,
    pub to: String,
}

/// A distribution feeder with a single source. Edges are undirected in the
/// input; power flow direction is derived from the source.
#[derive(Debug, Clone, PartialEq)]
pub struct FeederGraph {
    pub name: String,
    pub source: String,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationCode {
    MissingSource,
    DuplicateNode,
    DuplicateEdge,
    UnknownEndpoint,
    NegativeWeight,
    NotRadial,
    Disconnected,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::MissingSource => "missing-source",
            ViolationCode::DuplicateNode => "duplicate-node",
            ViolationCode::DuplicateEdge => "duplicate-edge",
            ViolationCode::UnknownEndpoint => "unknown-endpoint",
            ViolationCode::NegativeWeight => "negative-weight",
            ViolationCode::NotRadial => "not-radial",
            ViolationCode::Disconnected => "disconnected",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    pub detail: String,
}

impl Violation {
    fn new(code: ViolationCode, detail: String) -> Self {
        Self { code, detail }
    }
}

impl FeederGraph {
    /// Reports every structural problem found. An empty result means the
    /// feeder is a connected tree with one known source and sane weights.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        for node in &self.nodes {
            let next = index.len();
            if *index.entry(node.id.as_str()).or_insert(next) != next {
                out.push(Violation::new(
                    ViolationCode::DuplicateNode,
                    format!("node `{}` appears more than once", node.id),
                ));
            }
            if !(node.weight >= 0.0 && node.weight.is_finite()) {
                out.push(Violation::new(
                    ViolationCode::NegativeWeight,
                    format!("node `{}` has weight {}", node.id, node.weight),
                ));
            }
        }

        if !index.contains_key(self.source.as_str()) {
            out.push(Violation::new(
                ViolationCode::MissingSource,
                format!("source `{}` is not a node", self.source),
            ));
        }

        let mut edge_ids = BTreeSet::new();
        for edge in &self.edges {
            if !edge_ids.insert(edge.id.as_str()) {
                out.push(Violation::new(
                    ViolationCode::DuplicateEdge,
                    format!("edge `{}` appears more than once", edge.id),
                ));
            }
            for end in [&edge.from, &edge.to] {
                if !index.contains_key(end.as_str()) {
                    out.push(Violation::new(
                        ViolationCode::UnknownEndpoint,
                        format!("edge `{}` references unknown node `{}`", edge.id, end),
                    ));
                }
            }
        }

        let n = index.len();
        if n > 0 && self.edges.len() != n - 1 {
            out.push(Violation::new(
                ViolationCode::NotRadial,
                format!("{} edges for {} nodes, a radial feeder needs {}", self.edges.len(), n, n - 1),
            ));
        }

        let mut dsu = DisjointSet::new(n);
        let mut cycle_reported = false;
        for edge in &self.edges {
            let (Some(&a), Some(&b)) = (index.get(edge.from.as_str()), index.get(edge.to.as_str()))
            else {
                continue;
            };
            if !dsu.union(a, b) && !cycle_reported {
                cycle_reported = true;
                out.push(Violation::new(
                    ViolationCode::NotRadial,
                    format!("edge `{}` closes a loop", edge.id),
                ));
            }
        }
        if n > 0 {
            let root = dsu.find(0);
            let stranded = (1..n).filter(|&i| dsu.find(i) != root).count();
            if stranded > 0 {
                out.push(Violation::new(
                    ViolationCode::Disconnected,
                    format!("{} node(s) are not connected to `{}`", stranded, self.nodes[0].id),
                ));
            }
        }

        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DamagedEdge {
    pub edge: String,
    pub repair_time: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DamageScenario {
    pub damaged: Vec<DamagedEdge>,
}

impl DamageScenario {
    pub fn new(damaged: impl IntoIterator<Item = (String, f64)>) -> Self {
        Self {
            damaged: damaged
                .into_iter()
                .map(|(edge, repair_time)| DamagedEdge { edge, repair_time })
                .collect(),
        }
    }

    /// Checks the scenario against `feeder` and returns repair times keyed by
    /// edge id.
    pub fn check(&self, feeder: &FeederGraph) -> Result<BTreeMap<String, f64>> {
        let known: BTreeSet<&str> = feeder.edges.iter().map(|e| e.id.as_str()).collect();
        let mut out = BTreeMap::new();
        for d in &self.damaged {
            if !known.contains(d.edge.as_str()) {
                return Err(Error::UnknownEdge(d.edge.clone()));
            }
            if !(d.repair_time > 0.0 && d.repair_time.is_finite()) {
                return Err(Error::NonPositiveRepairTime {
                    edge: d.edge.clone(),
                    value: d.repair_time,
                });
            }
            if out.insert(d.edge.clone(), d.repair_time).is_some() {
                return Err(Error::DuplicateDamage(d.edge.clone()));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Supernode {
    /// Member node ids, sorted.
    pub members: Vec<String>,
    pub weight: f64,
}

/// A damaged edge oriented away from the source, between two supernodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub edge: String,
    pub from: usize,
    pub to: usize,
    pub repair_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DamagedComponentGraph {
    /// Ordered by smallest member id.
    pub supernodes: Vec<Supernode>,
    /// Ordered by edge id.
    pub arcs: Vec<Arc>,
    /// Index of the supernode containing the feeder source.
    pub source: usize,
}

impl DamagedComponentGraph {
    pub fn supernode_of(&self, node: &str) -> Option<usize> {
        self.supernodes
            .iter()
            .position(|s| s.members.binary_search_by(|m| m.as_str().cmp(node)).is_ok())
    }
}

/// Contracts every intact edge of `feeder`, leaving the damaged edges as arcs
/// between supernodes oriented in the direction of power flow.
pub fn contract_intact(
    feeder: &FeederGraph,
    scenario: &DamageScenario,
) -> Result<DamagedComponentGraph> {
    let violations = feeder.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidFeeder(violations));
    }
    let damaged = scenario.check(feeder)?;

    let mut ids: Vec<&str> = feeder.nodes.iter().map(|n| n.id.as_str()).collect();
    ids.sort_unstable();
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut weight = vec![0.0; ids.len()];
    for node in &feeder.nodes {
        weight[index[node.id.as_str()]] = node.weight;
    }

    let mut edges: Vec<&Edge> = feeder.edges.iter().collect();
    edges.sort_unstable_by(|a, b| a.id.cmp(&b.id));

    let n = ids.len();
    let mut dsu = DisjointSet::new(n);
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (k, e) in edges.iter().enumerate() {
        let (a, b) = (index[e.from.as_str()], index[e.to.as_str()]);
        adjacency[a].push((b, k));
        adjacency[b].push((a, k));
        if !damaged.contains_key(e.id.as_str()) {
            dsu.union(a, b);
        }
    }

    // Node ids are visited in sorted order, so components are numbered by
    // their smallest member.
    let mut component = vec![usize::MAX; n];
    let mut supernodes: Vec<Supernode> = Vec::new();
    let mut root_to_component: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, &id) in ids.iter().enumerate() {
        let root = dsu.find(i);
        let c = *root_to_component.entry(root).or_insert_with(|| {
            supernodes.push(Supernode {
                members: Vec::new(),
                weight: 0.0,
            });
            supernodes.len() - 1
        });
        component[i] = c;
        supernodes[c].members.push(String::from(id));
        supernodes[c].weight += weight[i];
    }

    // Orient every edge away from the source.
    let source = index[feeder.source.as_str()];
    let mut upstream = vec![usize::MAX; edges.len()];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([source]);
    seen[source] = true;
    while let Some(u) = queue.pop_front() {
        for &(v, k) in &adjacency[u] {
            if !seen[v] {
                seen[v] = true;
                upstream[k] = u;
                queue.push_back(v);
            }
        }
    }

    let mut arcs = Vec::with_capacity(damaged.len());
    for (k, e) in edges.iter().enumerate() {
        if let Some(&repair_time) = damaged.get(e.id.as_str()) {
            let (a, b) = (index[e.from.as_str()], index[e.to.as_str()]);
            let (tail, head) = if upstream[k] == a { (a, b) } else { (b, a) };
            arcs.push(Arc {
                edge: e.id.clone(),
                from: component[tail],
                to: component[head],
                repair_time,
            });
        }
    }

    Ok(DamagedComponentGraph {
        supernodes,
        arcs,
        source: component[source],
    })
}

/// Builds the soft precedence outtree: job `j`'s parent is the damaged edge
/// feeding the supernode at `j`'s tail, and `j` carries the weight of the
/// supernode it energizes.
pub fn build_precedence(g: &DamagedComponentGraph) -> Result<PrecedenceGraph> {
    let mut incoming: Vec<Option<usize>> = vec![None; g.supernodes.len()];
    for (k, arc) in g.arcs.iter().enumerate() {
        if arc.from >= g.supernodes.len() || arc.to >= g.supernodes.len() {
            return Err(Error::NotOuttree(format!(
                "arc `{}` references a missing supernode",
                arc.edge
            )));
        }
        if arc.to == g.source {
            return Err(Error::NotRadial(arc.to));
        }
        if incoming[arc.to].replace(k).is_some() {
            return Err(Error::NotRadial(arc.to));
        }
    }

    let mut jobs = Vec::with_capacity(g.arcs.len());
    for arc in &g.arcs {
        let parent = if arc.from == g.source {
            None
        } else {
            match incoming[arc.from] {
                Some(k) => Some(g.arcs[k].edge.clone()),
                None => {
                    return Err(Error::NotOuttree(format!(
                        "supernode {} feeding `{}` is unreachable from the source",
                        arc.from, arc.edge
                    )))
                }
            }
        };
        let head = &g.supernodes[arc.to];
        jobs.push(Job {
            id: arc.edge.clone(),
            weight: head.weight,
            repair_time: arc.repair_time,
            parent,
            energizes: head.members.clone(),
        });
    }

    PrecedenceGraph::new(jobs, g.supernodes[g.source].weight)
}

/// `contract_intact` followed by `build_precedence`.
pub fn precedence_for(feeder: &FeederGraph, scenario: &DamageScenario) -> Result<PrecedenceGraph> {
    build_precedence(&contract_intact(feeder, scenario)?)
}
