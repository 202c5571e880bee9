//! Seeded random radial instances.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use feederplan_core::{DamageScenario, DamagedEdge, Edge, FeederGraph, HardeningMenu, MenuOption, Node};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub nodes: usize,
    pub damaged: usize,
    pub options_per_edge: usize,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(nodes: usize, damaged: usize, seed: u64) -> Self {
        Self {
            nodes,
            damaged,
            options_per_edge: 3,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub feeder: FeederGraph,
    pub scenario: DamageScenario,
    pub menus: Vec<HardeningMenu>,
}

fn round_to(x: f64, places: i32) -> f64 {
    let s = 10f64.powi(places);
    (x * s).round() / s
}

/// Random radial feeder by parent attachment: node `i` hangs off a node
/// drawn uniformly from `0..i`. Node weights are uniform on [0.5, 1.5];
/// repair times are integers in 2..=10; each damaged edge gets a menu whose
/// reductions and costs both strictly increase, so filtering keeps it whole.
pub fn generate(cfg: GeneratorConfig) -> Result<Instance, Failure> {
    if cfg.nodes < 1 {
        return Err(Failure::new("infeasible-size", "at least one node is required".into()));
    }
    if cfg.damaged > cfg.nodes - 1 {
        return Err(Failure::new(
            "infeasible-size",
            format!(
                "{} damaged edges requested but a {}-node radial feeder has only {} edges",
                cfg.damaged,
                cfg.nodes,
                cfg.nodes - 1
            ),
        ));
    }
    if cfg.options_per_edge > 8 {
        return Err(Failure::new("infeasible-size", "at most 8 options per edge".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let nodes: Vec<Node> = (0..cfg.nodes)
        .map(|i| Node {
            id: format!("n{i}"),
            weight: round_to(rng.random_range(0.5..=1.5), 3),
        })
        .collect();
    let edges: Vec<Edge> = (1..cfg.nodes)
        .map(|i| Edge {
            id: format!("e{i}"),
            from: format!("n{}", rng.random_range(0..i)),
            to: format!("n{i}"),
        })
        .collect();

    let mut picked = index::sample(&mut rng, edges.len(), cfg.damaged).into_vec();
    picked.sort_unstable();
    let mut damaged = Vec::with_capacity(picked.len());
    let mut menus = Vec::with_capacity(picked.len());
    for k in picked {
        let edge = edges[k].id.clone();
        let repair_time = rng.random_range(2..=10) as f64;

        // Distinct tenths of the repair time, below 0.9 of it.
        let mut tenths = index::sample(&mut rng, 8, cfg.options_per_edge).into_vec();
        tenths.sort_unstable();
        let mut cost = 0.0;
        let options = tenths
            .into_iter()
            .map(|t| {
                cost = round_to(cost + rng.random_range(0.5..3.0), 2);
                MenuOption::new(round_to(repair_time * (t + 1) as f64 / 10.0, 2), cost)
            })
            .collect();

        damaged.push(DamagedEdge {
            edge: edge.clone(),
            repair_time,
        });
        menus.push(HardeningMenu { edge, options });
    }

    Ok(Instance {
        feeder: FeederGraph {
            name: format!("random-{}-{}-{}", cfg.nodes, cfg.damaged, cfg.seed),
            source: "n0".to_string(),
            nodes,
            edges,
        },
        scenario: DamageScenario { damaged },
        menus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use feederplan_core::{filter_dominated, precedence_for};

    #[test]
    fn deterministic_and_valid() {
        let a = generate(GeneratorConfig::new(40, 12, 7)).unwrap();
        let b = generate(GeneratorConfig::new(40, 12, 7)).unwrap();
        assert_eq!(a, b);
        assert!(a.feeder.validate().is_empty());
        assert_eq!(a.scenario.damaged.len(), 12);
        let p = precedence_for(&a.feeder, &a.scenario).unwrap();
        assert_eq!(p.len(), 12);
        for m in &a.menus {
            assert_eq!(filter_dominated(m).unwrap().options.len(), 3);
        }
        assert_ne!(a, generate(GeneratorConfig::new(40, 12, 8)).unwrap());
    }

    #[test]
    fn rejects_more_damage_than_edges() {
        assert_eq!(generate(GeneratorConfig::new(5, 5, 0)).unwrap_err().code, "infeasible-size");
        assert!(generate(GeneratorConfig::new(5, 4, 0)).is_ok());
    }
}
