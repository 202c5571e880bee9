//! Restoration-aware hardening.
//!
//! For a fixed repair sequence the harm is linear in the repair times, with
//! coefficient `omega_l` (the weight of job `l` plus every job after it). The
//! hardening choice then becomes a multiple-choice knapsack whose LP
//! relaxation over convex cost envelopes is solved greedily by descending
//! `omega / slope`. The multi-pass heuristic rounds the LP down to real
//! strategies and backfills leftover budget, optionally re-sequencing as
//! repair times shrink.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::envelope::{envelope_from, filter_dominated, CostEnvelope, HardeningMenu, MenuOption};
use crate::error::{Error, Result};
use crate::feeder::{precedence_for, DamageScenario, FeederGraph};
use crate::precedence::PrecedenceGraph;
use crate::sequence::{optimal_harm_with, optimal_order_with, optimal_sequence, resolve_order, RepairSequence};

/// Absolute slack on budget comparisons.
pub const BUDGET_TOL: f64 = 1e-9;
/// Default limit on option combinations enumerated by the exact oracle.
pub const DEFAULT_COMBINATION_CAP: u128 = 1_000_000;
/// Default limit on job count for the exact oracle.
pub const DEFAULT_ORACLE_JOB_CAP: usize = 9;

/// When the multi-pass heuristic recomputes the repair sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum ScheduleUpdate {
    /// Option 1: keep the initial sequence and weights throughout.
    #[default]
    Never,
    /// Option 2: re-sequence after each LP pass.
    AfterPass,
    /// Option 3: re-sequence after every greedy commitment as well.
    AfterStep,
}

impl ScheduleUpdate {
    pub const ALL: [ScheduleUpdate; 3] = [
        ScheduleUpdate::Never,
        ScheduleUpdate::AfterPass,
        ScheduleUpdate::AfterStep,
    ];

    pub fn number(self) -> u8 {
        match self {
            ScheduleUpdate::Never => 1,
            ScheduleUpdate::AfterPass => 2,
            ScheduleUpdate::AfterStep => 3,
        }
    }
}

impl TryFrom<u8> for ScheduleUpdate {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(ScheduleUpdate::Never),
            2 => Ok(ScheduleUpdate::AfterPass),
            3 => Ok(ScheduleUpdate::AfterStep),
            other => Err(Error::InvalidOption(other)),
        }
    }
}

/// Marginal harm per unit of repair time, keyed by edge id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OmegaWeights {
    pub values: BTreeMap<String, f64>,
}

impl OmegaWeights {
    pub fn get(&self, edge: &str) -> Option<f64> {
        self.values.get(edge).copied()
    }
}

impl FromIterator<(String, f64)> for OmegaWeights {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        Self {
            values: iter.into_iter().collect(),
        }
    }
}

/// Suffix sums of job weights along `order`, indexed by job.
pub fn omega_for_order(p: &PrecedenceGraph, order: &[usize]) -> Vec<f64> {
    let mut omega = vec![0.0; p.len()];
    let mut acc = 0.0;
    for &j in order.iter().rev() {
        acc += p.jobs()[j].weight;
        omega[j] = acc;
    }
    omega
}

pub fn omega_weights(seq: &RepairSequence, p: &PrecedenceGraph) -> Result<OmegaWeights> {
    let order = resolve_order(p, &seq.order)?;
    let omega = omega_for_order(p, &order);
    Ok(p.jobs()
        .iter()
        .zip(omega)
        .map(|(j, w)| (j.id.clone(), w))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalEntry {
    pub edge: String,
    /// Reduction relative to the envelope origin.
    pub dp: f64,
    /// Envelope cost of `dp`, relative to the origin.
    pub spend: f64,
}

/// Solution of the LP relaxation; entries follow the envelope order given
/// to [`greedy_lp`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FractionalPlan {
    pub entries: Vec<FractionalEntry>,
    pub total_spend: f64,
}

impl FractionalPlan {
    pub fn get(&self, edge: &str) -> Option<&FractionalEntry> {
        self.entries.iter().find(|e| e.edge == edge)
    }

    /// LP objective `sum omega_l * dp_l`.
    pub fn objective(&self, omega: &OmegaWeights) -> f64 {
        self.entries
            .iter()
            .map(|e| omega.get(&e.edge).unwrap_or(0.0) * e.dp)
            .sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct Pick {
    env: usize,
    seg: usize,
    omega: f64,
    slope: f64,
    rank: usize,
}

impl PartialEq for Pick {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pick {}

impl PartialOrd for Pick {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pick {
    // Max-heap on omega / slope, then smallest edge id, then earliest segment.
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.omega * other.slope;
        let rhs = other.omega * self.slope;
        lhs.partial_cmp(&rhs)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.rank.cmp(&self.rank))
            .then_with(|| other.seg.cmp(&self.seg))
    }
}

struct GreedyResult {
    dp: Vec<f64>,
    spend: Vec<f64>,
    total: f64,
}

/// Greedy over envelope segments. `reweigh` is consulted after every full
/// segment commitment with the current relative reductions; returning new
/// weights re-ranks the remaining segments.
fn greedy_core<F>(envs: &[CostEnvelope], omega: &[f64], budget: f64, mut reweigh: F) -> GreedyResult
where
    F: FnMut(&[f64]) -> Option<Vec<f64>>,
{
    let m = envs.len();
    let mut by_id: Vec<usize> = (0..m).collect();
    by_id.sort_by(|&a, &b| envs[a].edge.cmp(&envs[b].edge));
    let mut rank = vec![0; m];
    for (r, &e) in by_id.iter().enumerate() {
        rank[e] = r;
    }

    let mut omega = omega.to_vec();
    let mut next = vec![0usize; m];
    let pick = |omega: &[f64], e: usize, k: usize| Pick {
        env: e,
        seg: k,
        omega: omega[e],
        slope: envs[e].segments[k].slope,
        rank: rank[e],
    };
    let fill = |omega: &[f64], next: &[usize]| -> BinaryHeap<Pick> {
        (0..m)
            .filter(|&e| next[e] < envs[e].segments.len())
            .map(|e| pick(omega, e, next[e]))
            .collect()
    };

    let mut heap = fill(&omega, &next);
    let mut dp = vec![0.0; m];
    let mut spend = vec![0.0; m];
    let mut total = 0.0;

    while let Some(top) = heap.pop() {
        if budget - total <= BUDGET_TOL {
            break;
        }
        let env = &envs[top.env];
        let seg = env.segments[top.seg];
        let cost = env.segment_cost(top.seg);
        if total + cost <= budget + BUDGET_TOL {
            dp[top.env] = seg.upper;
            spend[top.env] = env.breakpoint_cost(top.seg);
            total += cost;
            next[top.env] = top.seg + 1;
            if let Some(w) = reweigh(&dp) {
                omega = w;
                heap = fill(&omega, &next);
            } else if next[top.env] < env.segments.len() {
                heap.push(pick(&omega, top.env, next[top.env]));
            }
        } else {
            let extra = budget - total;
            dp[top.env] = seg.lower + extra / seg.slope;
            spend[top.env] = seg.intercept + extra;
            total = budget;
            break;
        }
    }

    GreedyResult { dp, spend, total }
}

/// Solves the LP relaxation over convex envelopes by committing segments in
/// descending `omega / slope` order until the budget is met exactly or every
/// segment is taken.
pub fn greedy_lp(envelopes: &[CostEnvelope], omega: &OmegaWeights, budget: f64) -> Result<FractionalPlan> {
    check_budget(budget)?;
    let weights = envelopes
        .iter()
        .map(|e| omega.get(&e.edge).ok_or_else(|| Error::UnknownMenuEdge(e.edge.clone())))
        .collect::<Result<Vec<_>>>()?;
    let r = greedy_core(envelopes, &weights, budget, |_| None);
    Ok(fractional(envelopes, r))
}

fn fractional(envs: &[CostEnvelope], r: GreedyResult) -> FractionalPlan {
    FractionalPlan {
        entries: envs
            .iter()
            .zip(r.dp.iter().zip(&r.spend))
            .map(|(e, (&dp, &spend))| FractionalEntry {
                edge: e.edge.clone(),
                dp,
                spend,
            })
            .collect(),
        total_spend: r.total,
    }
}

/// Rounds each fractional reduction down to the nearest envelope breakpoint,
/// which is always a real strategy. Edges that fall back to their origin are
/// omitted.
pub fn round_down(fp: &FractionalPlan, envelopes: &[CostEnvelope]) -> BTreeMap<String, MenuOption> {
    fp.entries
        .iter()
        .filter_map(|entry| {
            let env = envelopes.iter().find(|e| e.edge == entry.edge)?;
            env.round_down(entry.dp).map(|o| (entry.edge.clone(), o))
        })
        .collect()
}

fn check_budget(budget: f64) -> Result<()> {
    if budget >= 0.0 && budget.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidBudget(budget))
    }
}

/// One LP pass of the multi-pass heuristic.
#[derive(Debug, Clone, PartialEq)]
pub struct PassRecord {
    pub envelopes: Vec<CostEnvelope>,
    pub fractional: FractionalPlan,
    /// Strategies adopted in this pass (absolute), keyed by edge.
    pub committed: BTreeMap<String, MenuOption>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackfillOutcome {
    pub choices: BTreeMap<String, MenuOption>,
    pub spend: f64,
    pub residual: f64,
    pub passes: Vec<PassRecord>,
}

/// A hardenable edge: filtered options plus the index of its weight.
struct Slot {
    edge: String,
    key: usize,
    options: Vec<MenuOption>,
}

/// Multi-pass heuristic. `omega` is indexed by slot key; `recompute` maps
/// absolute reductions per slot to fresh weights per slot key.
fn multi_pass<F>(
    slots: &[Slot],
    budget: f64,
    mut omega: Vec<f64>,
    update: ScheduleUpdate,
    mut recompute: F,
) -> BackfillOutcome
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let mut committed: Vec<MenuOption> = vec![MenuOption::NONE; slots.len()];
    let mut passes = Vec::new();

    loop {
        let spent: f64 = committed.iter().map(|o| o.cost).sum();
        let residual = budget - spent;
        if residual <= BUDGET_TOL {
            break;
        }

        // Remaining options: beyond what is in place and affordable on their own.
        let mut live = Vec::new();
        let mut envs = Vec::new();
        for (s, slot) in slots.iter().enumerate() {
            let origin = committed[s];
            let affordable: Vec<MenuOption> = slot
                .options
                .iter()
                .filter(|o| o.dp > origin.dp && o.cost - origin.cost <= residual + BUDGET_TOL)
                .copied()
                .collect();
            let env = envelope_from(&slot.edge, origin, &affordable);
            if !env.is_empty() {
                live.push(s);
                envs.push(env);
            }
        }
        if envs.is_empty() {
            break;
        }

        let weights: Vec<f64> = live.iter().map(|&s| omega[slots[s].key]).collect();
        let base: Vec<f64> = committed.iter().map(|o| o.dp).collect();
        let result = if update == ScheduleUpdate::AfterStep {
            greedy_core(&envs, &weights, residual, |rel| {
                let mut abs = base.clone();
                for (i, &s) in live.iter().enumerate() {
                    abs[s] += rel[i];
                }
                let fresh = recompute(&abs);
                Some(live.iter().map(|&s| fresh[slots[s].key]).collect())
            })
        } else {
            greedy_core(&envs, &weights, residual, |_| None)
        };
        let fp = fractional(&envs, result);

        let mut adopted = BTreeMap::new();
        for (i, &s) in live.iter().enumerate() {
            if let Some(o) = envs[i].round_down(fp.entries[i].dp) {
                committed[s] = o;
                adopted.insert(slots[s].edge.clone(), o);
            }
        }
        let progressed = !adopted.is_empty();
        passes.push(PassRecord {
            envelopes: envs,
            fractional: fp,
            committed: adopted,
        });
        if !progressed {
            break;
        }
        if update != ScheduleUpdate::Never {
            let abs: Vec<f64> = committed.iter().map(|o| o.dp).collect();
            omega = recompute(&abs);
        }
    }

    let spend: f64 = committed.iter().map(|o| o.cost).sum();
    BackfillOutcome {
        choices: slots
            .iter()
            .zip(&committed)
            .filter(|(_, o)| o.dp > 0.0)
            .map(|(s, o)| (s.edge.clone(), *o))
            .collect(),
        spend,
        residual: budget - spend,
        passes,
    }
}

fn sorted_menus(menus: &[HardeningMenu]) -> Result<Vec<&HardeningMenu>> {
    let mut sorted: Vec<&HardeningMenu> = menus.iter().collect();
    sorted.sort_by(|a, b| a.edge.cmp(&b.edge));
    for w in sorted.windows(2) {
        if w[0].edge == w[1].edge {
            return Err(Error::InvalidMenu {
                edge: w[0].edge.clone(),
                reason: String::from("edge has more than one menu"),
            });
        }
    }
    Ok(sorted)
}

/// Multi-pass heuristic with weights held fixed: Option 1 when the weights
/// come from the initial sequence, usable without a precedence graph.
pub fn plan_fixed_weights(menus: &[HardeningMenu], omega: &OmegaWeights, budget: f64) -> Result<BackfillOutcome> {
    check_budget(budget)?;
    let keys: Vec<&String> = omega.values.keys().collect();
    let weights: Vec<f64> = omega.values.values().copied().collect();
    let mut slots = Vec::new();
    for menu in sorted_menus(menus)? {
        let key = keys
            .binary_search(&&menu.edge)
            .map_err(|_| Error::UnknownMenuEdge(menu.edge.clone()))?;
        let filtered = filter_dominated(menu)?;
        if !filtered.options.is_empty() {
            slots.push(Slot {
                edge: menu.edge.clone(),
                key,
                options: filtered.options,
            });
        }
    }
    Ok(multi_pass(&slots, budget, weights, ScheduleUpdate::Never, |_| {
        unreachable!("fixed weights are never recomputed")
    }))
}

/// Chosen strategies with their consequences for restoration.
#[derive(Debug, Clone, PartialEq)]
pub struct HardeningPlan {
    pub choices: BTreeMap<String, MenuOption>,
    pub spend: f64,
    pub budget: f64,
    pub residual: f64,
    /// Expected repair time of every damaged edge after hardening.
    pub repair_times: BTreeMap<String, f64>,
    pub sequence: RepairSequence,
    /// Optimal harm at the hardened expected repair times, `f(E[P])`.
    pub harm: f64,
    /// Heuristic variant, or `None` for the exact oracle.
    pub option: Option<ScheduleUpdate>,
    pub passes: usize,
}

impl HardeningPlan {
    fn assemble(
        p: &PrecedenceGraph,
        choices: BTreeMap<String, MenuOption>,
        budget: f64,
        option: Option<ScheduleUpdate>,
        passes: usize,
    ) -> Result<Self> {
        let times: Vec<f64> = p
            .jobs()
            .iter()
            .map(|j| j.repair_time - choices.get(&j.id).map_or(0.0, |o| o.dp))
            .collect();
        let hardened = p.with_repair_times(&times)?;
        let sequence = optimal_sequence(&hardened);
        let spend: f64 = choices.values().map(|o| o.cost).sum();
        Ok(Self {
            harm: sequence.harm,
            sequence,
            spend,
            budget,
            residual: budget - spend,
            repair_times: hardened.repair_time_map(),
            choices,
            option,
            passes,
        })
    }
}

/// Validated menus aligned with jobs of `p`. Reductions must leave a
/// positive repair time.
fn job_slots(p: &PrecedenceGraph, menus: &[HardeningMenu], filter: bool) -> Result<Vec<Slot>> {
    let mut slots = Vec::new();
    for menu in sorted_menus(menus)? {
        let key = p
            .index_of(&menu.edge)
            .ok_or_else(|| Error::UnknownMenuEdge(menu.edge.clone()))?;
        menu.check()?;
        let repair = p.jobs()[key].repair_time;
        if menu.max_dp() >= repair {
            return Err(Error::InvalidMenu {
                edge: menu.edge.clone(),
                reason: format!(
                    "reduction {} would not leave a positive repair time (expected {})",
                    menu.max_dp(),
                    repair
                ),
            });
        }
        let options = if filter {
            filter_dominated(menu)?.options
        } else {
            let mut o = menu.options.clone();
            o.sort_by(|a, b| a.dp.total_cmp(&b.dp).then(a.cost.total_cmp(&b.cost)));
            o
        };
        if !options.is_empty() {
            slots.push(Slot {
                edge: menu.edge.clone(),
                key,
                options,
            });
        }
    }
    Ok(slots)
}

/// Multi-pass heuristic on a precedence graph whose repair times are the
/// expected (unhardened) values.
pub fn plan_precedence(
    p: &PrecedenceGraph,
    menus: &[HardeningMenu],
    budget: f64,
    option: ScheduleUpdate,
) -> Result<HardeningPlan> {
    check_budget(budget)?;
    let slots = job_slots(p, menus, true)?;
    let base = p.repair_times();
    let recompute = |abs: &[f64]| -> Vec<f64> {
        let mut times = base.clone();
        for (slot, &d) in slots.iter().zip(abs) {
            times[slot.key] -= d;
        }
        omega_for_order(p, &optimal_order_with(p, &times))
    };
    let omega = recompute(&vec![0.0; slots.len()]);
    let outcome = multi_pass(&slots, budget, omega, option, recompute);
    HardeningPlan::assemble(p, outcome.choices, budget, Some(option), outcome.passes.len())
}

/// Multi-pass heuristic from feeder and scenario.
pub fn plan(
    feeder: &FeederGraph,
    scenario: &DamageScenario,
    menus: &[HardeningMenu],
    budget: f64,
    option: ScheduleUpdate,
) -> Result<HardeningPlan> {
    plan_precedence(&precedence_for(feeder, scenario)?, menus, budget, option)
}

/// Plans for every budget in `budgets`, which must be nondecreasing.
///
/// A plan affordable at one budget is affordable at every larger one, so
/// when the heuristic run at a budget does worse than the best plan found
/// at a smaller budget, that earlier plan is kept (with its budget and
/// residual updated). Harm is therefore nonincreasing along the sweep.
pub fn budget_sweep(
    p: &PrecedenceGraph,
    menus: &[HardeningMenu],
    budgets: &[f64],
    option: ScheduleUpdate,
) -> Result<Vec<HardeningPlan>> {
    if budgets.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Invalid(String::from("sweep budgets must be nondecreasing")));
    }
    let mut out: Vec<HardeningPlan> = Vec::with_capacity(budgets.len());
    for &budget in budgets {
        let fresh = plan_precedence(p, menus, budget, option)?;
        let plan = match out.last() {
            Some(best) if best.harm < fresh.harm => HardeningPlan {
                budget,
                residual: budget - best.spend,
                ..best.clone()
            },
            _ => fresh,
        };
        out.push(plan);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCaps {
    pub combinations: u128,
    pub jobs: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        Self {
            combinations: DEFAULT_COMBINATION_CAP,
            jobs: DEFAULT_ORACLE_JOB_CAP,
        }
    }
}

/// Global optimum over every affordable combination of at most one option
/// per edge, each scored by optimal sequencing. Combinations are visited in
/// lexicographic order (edges by id, options by reduction) and only strict
/// improvements replace the incumbent.
pub fn exact_joint_oracle_precedence(
    p: &PrecedenceGraph,
    menus: &[HardeningMenu],
    budget: f64,
    caps: OracleCaps,
) -> Result<HardeningPlan> {
    check_budget(budget)?;
    if p.len() > caps.jobs {
        return Err(Error::OracleTooLarge {
            what: "job count",
            size: p.len() as u128,
            cap: caps.jobs as u128,
        });
    }
    let slots = job_slots(p, menus, false)?;
    let size = slots
        .iter()
        .fold(1u128, |acc, s| acc.saturating_mul(s.options.len() as u128 + 1));
    if size > caps.combinations {
        return Err(Error::OracleTooLarge {
            what: "option combinations",
            size,
            cap: caps.combinations,
        });
    }

    let base = p.repair_times();
    let mut digits = vec![0usize; slots.len()];
    let mut best_digits = digits.clone();
    let mut best = optimal_harm_with(p, &base);
    let mut times = base.clone();
    loop {
        // Odometer: last slot varies fastest.
        let mut k = slots.len();
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            if digits[k] < slots[k].options.len() {
                digits[k] += 1;
                break;
            }
            digits[k] = 0;
        }
        if digits.iter().all(|&d| d == 0) {
            break;
        }

        let mut cost = 0.0;
        for (s, &d) in slots.iter().zip(&digits) {
            let (dp, c) = if d == 0 {
                (0.0, 0.0)
            } else {
                let o = s.options[d - 1];
                (o.dp, o.cost)
            };
            times[s.key] = base[s.key] - dp;
            cost += c;
        }
        if cost > budget + BUDGET_TOL {
            continue;
        }
        let h = optimal_harm_with(p, &times);
        if h < best {
            best = h;
            best_digits.copy_from_slice(&digits);
        }
    }

    let choices = slots
        .iter()
        .zip(&best_digits)
        .filter(|(_, &d)| d > 0)
        .map(|(s, &d)| (s.edge.clone(), s.options[d - 1]))
        .collect();
    HardeningPlan::assemble(p, choices, budget, None, 0)
}

pub fn exact_joint_oracle(
    feeder: &FeederGraph,
    scenario: &DamageScenario,
    menus: &[HardeningMenu],
    budget: f64,
) -> Result<HardeningPlan> {
    exact_joint_oracle_precedence(
        &precedence_for(feeder, scenario)?,
        menus,
        budget,
        OracleCaps::default(),
    )
}
