//! Restoration-aware hardening of radial distribution feeders.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. It covers:
//!
//! * [`feeder`]: feeder graphs, damage scenarios, contraction of intact
//!   regions and the soft precedence outtree over damaged edges;
//! * [`sequence`]: optimal single-crew repair sequencing, evaluation of
//!   arbitrary orders, and an exhaustive permutation oracle;
//! * [`envelope`]: hardening menus, dominance filtering and lower convex
//!   cost envelopes;
//! * [`planner`]: marginal-harm weights, the greedy LP relaxation, rounding,
//!   the multi-pass backfill heuristic and an exact joint oracle;
//! * [`stochastic`]: Monte Carlo estimates of expected harm and the
//!   operability trajectory.

#![no_std]

extern crate alloc;

mod dsu;
pub mod envelope;
pub mod error;
pub mod feeder;
pub mod planner;
pub mod precedence;
pub mod sequence;
pub mod stochastic;

pub use envelope::{
    convex_envelope, envelope_from, envelope_value, filter_dominated, CostEnvelope, HardeningMenu,
    MenuOption, Segment,
};
pub use error::{Error, Result};
pub use feeder::{
    build_precedence, contract_intact, precedence_for, DamageScenario, DamagedComponentGraph,
    DamagedEdge, Edge, FeederGraph, Node, Violation, ViolationCode,
};
pub use planner::{
    budget_sweep, exact_joint_oracle, exact_joint_oracle_precedence, greedy_lp, omega_weights, plan,
    plan_fixed_weights, plan_precedence, round_down, BackfillOutcome, FractionalPlan,
    HardeningPlan, OmegaWeights, OracleCaps, ScheduleUpdate, BUDGET_TOL,
};
pub use precedence::{Job, PrecedenceGraph};
pub use sequence::{
    brute_force_sequence, brute_force_sequence_capped, evaluate_order, optimal_harm,
    optimal_harm_with, optimal_order, optimal_sequence, RepairSequence,
};
pub use stochastic::{
    monte_carlo_expected_harm, sample_scenario, trajectory, EvalReport, MonteCarloConfig,
    ScenarioSample, Trajectory,
};
