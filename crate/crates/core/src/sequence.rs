//! Single-crew repair sequencing under soft precedence.
//!
//! A job may be repaired before its parent, but the nodes it feeds only
//! energize once every upstream damaged edge is repaired, so
//! `T_j = max(C_j, T_parent(j))`. Minimizing `sum w_j T_j` is then the
//! classical `1 | outtree | sum w_j C_j` problem, which the group-merging
//! algorithm below solves exactly in `O(n log n)`.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::dsu::DisjointSet;
use crate::error::{Error, Result};
use crate::precedence::PrecedenceGraph;

/// Largest instance `brute_force_sequence` accepts by default.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct RepairSequence {
    pub order: Vec<String>,
    pub completion: BTreeMap<String, f64>,
    pub energization: BTreeMap<String, f64>,
    pub harm: f64,
}

/// Index-level evaluation of an order, aligned with `PrecedenceGraph::jobs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub completion: Vec<f64>,
    pub energization: Vec<f64>,
    pub harm: f64,
}

/// Completion and energization times for `order` (indices into `p.jobs()`).
/// The order must be a permutation; it need not respect precedence.
pub fn timing(p: &PrecedenceGraph, order: &[usize]) -> Timing {
    timing_with(p, order, &p.repair_times())
}

/// As [`timing`], with repair times overridden.
pub fn timing_with(p: &PrecedenceGraph, order: &[usize], times: &[f64]) -> Timing {
    let n = p.len();
    let mut completion = vec![0.0; n];
    let mut clock = 0.0;
    for &j in order {
        clock += times[j];
        completion[j] = clock;
    }
    let mut energization = vec![0.0; n];
    for &j in p.topological_order() {
        let upstream = p.parent(j).map_or(0.0, |k| energization[k]);
        energization[j] = if completion[j] > upstream {
            completion[j]
        } else {
            upstream
        };
    }
    let harm = p
        .jobs()
        .iter()
        .zip(&energization)
        .map(|(job, t)| job.weight * t)
        .sum();
    Timing {
        completion,
        energization,
        harm,
    }
}

fn to_sequence(p: &PrecedenceGraph, order: &[usize], t: Timing) -> RepairSequence {
    let ids = p.jobs();
    RepairSequence {
        order: order.iter().map(|&j| ids[j].id.clone()).collect(),
        completion: ids
            .iter()
            .zip(&t.completion)
            .map(|(j, &c)| (j.id.clone(), c))
            .collect(),
        energization: ids
            .iter()
            .zip(&t.energization)
            .map(|(j, &e)| (j.id.clone(), e))
            .collect(),
        harm: t.harm,
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    weight: f64,
    time: f64,
    /// Smallest job index in the group; job indices follow id order.
    least: usize,
    group: usize,
    stamp: u32,
}

impl Candidate {
    /// Compares `w_a / p_a` against `w_b / p_b` without dividing.
    fn ratio_cmp(&self, other: &Self) -> Ordering {
        let lhs = self.weight * other.time;
        let rhs = other.weight * self.time;
        lhs.partial_cmp(&rhs).unwrap_or(Ordering::Equal)
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Max-heap: larger ratio first, then the group holding the smallest id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.ratio_cmp(other)
            .then_with(|| other.least.cmp(&self.least))
            .then_with(|| other.group.cmp(&self.group))
    }
}

/// Aggregates for the group-merging algorithm. Node 0 is the virtual root,
/// job `j` is node `j + 1`. A group is named by its first node; `last` and
/// `next` thread the concatenated job lists.
struct MergeState {
    weight: Vec<f64>,
    time: Vec<f64>,
    least: Vec<usize>,
    last: Vec<usize>,
    next: Vec<usize>,
    stamp: Vec<u32>,
    groups: DisjointSet,
}

const NIL: usize = usize::MAX;

impl MergeState {
    fn new(p: &PrecedenceGraph, times: &[f64]) -> Self {
        let n = p.len() + 1;
        let mut weight = vec![0.0; n];
        let mut time = vec![0.0; n];
        for (j, job) in p.jobs().iter().enumerate() {
            weight[j + 1] = job.weight;
            time[j + 1] = times[j];
        }
        Self {
            weight,
            time,
            least: (0..n).map(|k| k.wrapping_sub(1)).collect(),
            last: (0..n).collect(),
            next: vec![NIL; n],
            stamp: vec![0; n],
            groups: DisjointSet::new(n),
        }
    }

    fn candidate(&self, group: usize) -> Candidate {
        Candidate {
            weight: self.weight[group],
            time: self.time[group],
            least: self.least[group],
            group,
            stamp: self.stamp[group],
        }
    }

    /// Appends group `j` to the group containing `pred`, returning the
    /// absorbing group.
    fn merge(&mut self, pred: usize, j: usize) -> usize {
        let i = self.groups.find(pred);
        self.weight[i] += self.weight[j];
        self.time[i] += self.time[j];
        if i != 0 && self.least[j] < self.least[i] {
            self.least[i] = self.least[j];
        }
        let tail = self.last[i];
        self.next[tail] = j;
        self.last[i] = self.last[j];
        self.groups.union(i, j);
        self.stamp[i] += 1;
        self.stamp[j] = u32::MAX;
        i
    }
}

/// Harm-minimizing order as job indices.
pub fn optimal_order(p: &PrecedenceGraph) -> Vec<usize> {
    optimal_order_with(p, &p.repair_times())
}

/// As [`optimal_order`], with repair times overridden (all must be positive).
pub fn optimal_order_with(p: &PrecedenceGraph, times: &[f64]) -> Vec<usize> {
    let n = p.len();
    let mut state = MergeState::new(p, times);
    let mut heap: BinaryHeap<Candidate> = (1..=n).map(|g| state.candidate(g)).collect();

    while let Some(c) = heap.pop() {
        if state.stamp[c.group] != c.stamp {
            continue;
        }
        let j = c.group;
        let pred = p.parent(j - 1).map_or(0, |k| k + 1);
        let i = state.merge(pred, j);
        if i != 0 {
            heap.push(state.candidate(i));
        }
    }

    let mut order = Vec::with_capacity(n);
    let mut cursor = state.next[0];
    while cursor != NIL {
        order.push(cursor - 1);
        cursor = state.next[cursor];
    }
    order
}

/// Optimal single-crew harm `f(p)` at the given repair times.
pub fn optimal_harm_with(p: &PrecedenceGraph, times: &[f64]) -> f64 {
    let order = optimal_order_with(p, times);
    timing_with(p, &order, times).harm
}

pub fn optimal_harm(p: &PrecedenceGraph) -> f64 {
    optimal_harm_with(p, &p.repair_times())
}

/// Optimal single-crew repair sequence.
pub fn optimal_sequence(p: &PrecedenceGraph) -> RepairSequence {
    let order = optimal_order(p);
    let t = timing(p, &order);
    to_sequence(p, &order, t)
}

/// Resolves `order` (job ids) against `p`, requiring a permutation.
pub fn resolve_order(p: &PrecedenceGraph, order: &[String]) -> Result<Vec<usize>> {
    if order.len() != p.len() {
        return Err(Error::NotPermutation(format!(
            "{} ids for {} jobs",
            order.len(),
            p.len()
        )));
    }
    let mut seen = vec![false; p.len()];
    let mut out = Vec::with_capacity(order.len());
    for id in order {
        let j = p
            .index_of(id)
            .ok_or_else(|| Error::NotPermutation(format!("unknown job `{id}`")))?;
        if core::mem::replace(&mut seen[j], true) {
            return Err(Error::NotPermutation(format!("job `{id}` repeated")));
        }
        out.push(j);
    }
    Ok(out)
}

/// Evaluates an arbitrary repair order under soft precedence.
pub fn evaluate_order(p: &PrecedenceGraph, order: &[String]) -> Result<RepairSequence> {
    let idx = resolve_order(p, order)?;
    let t = timing(p, &idx);
    Ok(to_sequence(p, &idx, t))
}

/// Exhaustive search over every permutation with the default cap.
pub fn brute_force_sequence(p: &PrecedenceGraph) -> Result<RepairSequence> {
    brute_force_sequence_capped(p, DEFAULT_BRUTE_FORCE_CAP)
}

/// Exhaustive search over every permutation. Permutations are visited in
/// lexicographic id order and only strict improvements replace the
/// incumbent, so ties resolve to the lexicographically least order.
pub fn brute_force_sequence_capped(p: &PrecedenceGraph, cap: usize) -> Result<RepairSequence> {
    if p.len() > cap {
        return Err(Error::OracleTooLarge {
            what: "job count",
            size: p.len() as u128,
            cap: cap as u128,
        });
    }
    let times = p.repair_times();
    let mut perm: Vec<usize> = (0..p.len()).collect();
    let mut best = perm.clone();
    let mut best_harm = timing_with(p, &perm, &times).harm;
    while next_permutation(&mut perm) {
        let h = timing_with(p, &perm, &times).harm;
        if h < best_harm {
            best_harm = h;
            best.copy_from_slice(&perm);
        }
    }
    let t = timing_with(p, &best, &times);
    Ok(to_sequence(p, &best, t))
}

/// Advances to the next lexicographic permutation; false after the last one.
pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut k = v.len() - 1;
    while v[k] <= v[i - 1] {
        k -= 1;
    }
    v.swap(i - 1, k);
    v[i..].reverse();
    true
}
