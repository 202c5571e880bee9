//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p feederplan --test acceptance` (add `--release` for
//! representative timings).

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use feederplan::generate::{generate, GeneratorConfig};
use feederplan_core::{
    brute_force_sequence, budget_sweep, convex_envelope, evaluate_order, exact_joint_oracle_precedence,
    filter_dominated, greedy_lp, monte_carlo_expected_harm, optimal_harm_with, optimal_sequence,
    plan_fixed_weights, plan_precedence, precedence_for, round_down, trajectory, CostEnvelope,
    HardeningMenu, HardeningPlan, Job, MenuOption, MonteCarloConfig, OmegaWeights, OracleCaps, PrecedenceGraph,
    ScheduleUpdate,
};

struct Outcome {
    id: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Outtree with `n` jobs; job `i` hangs off the root or an earlier job.
fn random_outtree(r: &mut ChaCha8Rng, n: usize, w: (u32, u32), p: (u32, u32)) -> PrecedenceGraph {
    let jobs = (0..n)
        .map(|i| {
            let parent = r.random_range(0..=i);
            Job {
                id: format!("j{i:04}"),
                weight: r.random_range(w.0..=w.1) as f64,
                repair_time: r.random_range(p.0..=p.1) as f64,
                parent: (parent < i).then(|| format!("j{parent:04}")),
                energizes: Vec::new(),
            }
        })
        .collect();
    PrecedenceGraph::new(jobs, 1.0).expect("valid outtree")
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut mismatches = 0;
    for _ in 0..500 {
        let n = r.random_range(2..=8);
        let p = random_outtree(&mut r, n, (1, 10), (1, 10));
        let fast = optimal_sequence(&p).harm;
        let brute = brute_force_sequence(&p).expect("within cap").harm;
        if fast != brute {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        id: "1",
        name: "sequencing equals enumeration",
        pass: mismatches == 0 && elapsed < Duration::from_secs(30),
        detail: format!("500 outtrees, {mismatches} mismatches, {:.2?}", elapsed),
    }
}

fn two_edge_menus() -> [HardeningMenu; 2] {
    [
        HardeningMenu::new("1", [(1.0, 1.0), (1.2, 2.5), (2.0, 5.0), (2.5, 12.0), (3.0, 15.0)]),
        HardeningMenu::new("2", [(1.0, 1.0), (3.0, 7.0)]),
    ]
}

fn criterion_2() -> Outcome {
    let menus = two_edge_menus();
    let envs: Vec<CostEnvelope> = menus.iter().map(|m| convex_envelope(m).unwrap()).collect();
    let omega: OmegaWeights = [("1".to_string(), 1.0), ("2".to_string(), 1.0)].into_iter().collect();

    let lp = greedy_lp(&envs, &omega, 10.0).unwrap();
    let e1 = lp.get("1").unwrap();
    let e2 = lp.get("2").unwrap();
    let lp_ok = (e1.dp, e2.dp, e1.spend, e2.spend) == (1.5, 3.0, 3.0, 7.0);

    let rounded = round_down(&lp, &envs);
    let round_ok = rounded.get("1") == Some(&MenuOption::new(1.0, 1.0))
        && rounded.get("2") == Some(&MenuOption::new(3.0, 7.0));

    let out = plan_fixed_weights(&menus, &omega, 10.0).unwrap();
    let backfill_ok = out.choices.get("1") == Some(&MenuOption::new(1.2, 2.5))
        && out.choices.get("2") == Some(&MenuOption::new(3.0, 7.0))
        && out.spend == 9.5;

    Outcome {
        id: "2",
        name: "worked example",
        pass: lp_ok && round_ok && backfill_ok,
        detail: format!(
            "LP dp=({}, {}) spend=({}, {}); rounded {:?}; final {:?} spend {}",
            e1.dp,
            e2.dp,
            e1.spend,
            e2.spend,
            rounded.values().map(|o| (o.dp, o.cost)).collect::<Vec<_>>(),
            out.choices.values().map(|o| (o.dp, o.cost)).collect::<Vec<_>>(),
            out.spend
        ),
    }
}

fn random_menu(r: &mut ChaCha8Rng, edge: &str) -> HardeningMenu {
    let k = r.random_range(1..=3);
    let mut dp = 0.0;
    let mut cost = 0.0;
    let options: Vec<(f64, f64)> = (0..k)
        .map(|_| {
            dp += r.random_range(0.1..2.0);
            cost += r.random_range(0.1..4.0);
            (dp, cost)
        })
        .collect();
    HardeningMenu::new(edge, options)
}

/// Best LP objective among solutions with every edge at an envelope
/// breakpoint except at most one, which sits inside an adjacent segment.
fn breakpoint_search(envs: &[CostEnvelope], omega: &[f64], budget: f64) -> f64 {
    let pts: Vec<Vec<MenuOption>> = envs
        .iter()
        .map(|e| std::iter::once(MenuOption::NONE).chain(e.breakpoints.iter().copied()).collect())
        .collect();
    let mut idx = vec![0usize; pts.len()];
    let mut best = 0.0f64;
    loop {
        let spend: f64 = idx.iter().zip(&pts).map(|(&i, p)| p[i].cost).sum();
        let value: f64 = idx.iter().zip(&pts).zip(omega).map(|((&i, p), w)| w * p[i].dp).sum();
        if spend <= budget + 1e-12 {
            best = best.max(value);
            for (l, p) in pts.iter().enumerate() {
                let i = idx[l];
                if i + 1 < p.len() {
                    let dc = p[i + 1].cost - p[i].cost;
                    let t = ((budget - spend) / dc).clamp(0.0, 1.0);
                    best = best.max(value + omega[l] * t * (p[i + 1].dp - p[i].dp));
                }
            }
        }
        let mut l = 0;
        while l < idx.len() {
            idx[l] += 1;
            if idx[l] < pts[l].len() {
                break;
            }
            idx[l] = 0;
            l += 1;
        }
        if l == idx.len() {
            return best;
        }
    }
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..300 {
        let n = r.random_range(1..=5);
        let menus: Vec<HardeningMenu> = (0..n).map(|l| random_menu(&mut r, &format!("e{l}"))).collect();
        let envs: Vec<CostEnvelope> = menus.iter().map(|m| convex_envelope(m).unwrap()).collect();
        let omega: Vec<f64> = (0..n).map(|_| r.random_range(0.1..5.0)).collect();
        let total: f64 = envs.iter().map(|e| e.max_cost()).sum();
        let budget = r.random_range(0.0..1.2 * total);
        let weights: OmegaWeights = menus.iter().map(|m| m.edge.clone()).zip(omega.iter().copied()).collect();

        let greedy = greedy_lp(&envs, &weights, budget).unwrap().objective(&weights);
        let exhaustive = breakpoint_search(&envs, &omega, budget);
        worst = worst.max((greedy - exhaustive).abs());
    }
    Outcome {
        id: "3",
        name: "greedy LP optimality",
        pass: worst <= 1e-9,
        detail: format!("300 instances, max |greedy - search| = {worst:.3e}"),
    }
}

fn max_option_cost(menus: &[HardeningMenu]) -> f64 {
    menus
        .iter()
        .map(|m| m.options.iter().map(|o| o.cost).fold(0.0, f64::max))
        .sum()
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let mut ratios = Vec::with_capacity(100);
    for seed in 0..100 {
        let nodes = r.random_range(6..=12);
        let cfg = GeneratorConfig {
            nodes,
            damaged: r.random_range(3..=6.min(nodes - 1)),
            options_per_edge: r.random_range(2..=3),
            seed,
        };
        let inst = generate(cfg).unwrap();
        let p = precedence_for(&inst.feeder, &inst.scenario).unwrap();
        let budget = r.random_range(0.1..0.7) * max_option_cost(&inst.menus);
        let heuristic = plan_precedence(&p, &inst.menus, budget, ScheduleUpdate::Never).unwrap();
        let exact = exact_joint_oracle_precedence(&p, &inst.menus, budget, OracleCaps::default()).unwrap();
        ratios.push(heuristic.harm / exact.harm);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Outcome {
        id: "4",
        name: "heuristic against exact oracle",
        pass: mean <= 1.10 && max <= 1.30 && min >= 1.0 - 1e-12,
        detail: format!("100 instances, Option 1 ratio mean {mean:.4}, max {max:.4}, min {min:.4}"),
    }
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    let mut jensen_violations = 0;
    let mut support_violations = 0;
    let mut largest_gap = (0.0f64, 0.0f64);
    for k in 0..50 {
        let n = r.random_range(2..=6);
        let p = random_outtree(&mut r, n, (1, 5), (2, 8));
        let seed = 500 + k;

        let report = monte_carlo_expected_harm(&p, &MonteCarloConfig::new(10_000, seed)).unwrap();
        if report.mean > report.f_of_mean + 3.0 * report.stderr {
            jensen_violations += 1;
        }

        let mut cfg = MonteCarloConfig::new(10_000, seed);
        cfg.support_max = Some(p.repair_times().iter().map(|t| 2.0 * t).collect());
        let bounded = monte_carlo_expected_harm(&p, &cfg).unwrap();
        let gap = bounded.f_of_mean - bounded.mean;
        let bound = bounded.jensen_bound.expect("support given");
        if gap > bound + 3.0 * bounded.stderr {
            support_violations += 1;
        }
        if gap - 3.0 * bounded.stderr > largest_gap.0 - 3.0 * largest_gap.1 {
            largest_gap = (gap, bounded.stderr);
        }
    }
    Outcome {
        id: "5",
        name: "Jensen bound and support bound",
        pass: jensen_violations == 0 && support_violations == 0,
        detail: format!(
            "50 instances, n=1e4: Jensen violations {jensen_violations}; support-bound violations \
             {support_violations} (largest gap {:.4} with SE {:.4}, bound evaluates to 0)",
            largest_gap.0, largest_gap.1
        ),
    }
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let graphs: Vec<PrecedenceGraph> = (0..10)
        .map(|_| {
            let n = r.random_range(2..=8);
            random_outtree(&mut r, n, (1, 10), (1, 10))
        })
        .collect();
    let mut worst = f64::INFINITY;
    for t in 0..1000 {
        let p = &graphs[t % graphs.len()];
        let a: Vec<f64> = (0..p.len()).map(|_| r.random_range(0.1..10.0)).collect();
        let b: Vec<f64> = (0..p.len()).map(|_| r.random_range(0.1..10.0)).collect();
        let lambda: f64 = r.random();
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
        let slack = optimal_harm_with(p, &mix)
            - (lambda * optimal_harm_with(p, &a) + (1.0 - lambda) * optimal_harm_with(p, &b));
        worst = worst.min(slack);
    }
    Outcome {
        id: "6",
        name: "concavity of the min-harm function",
        pass: worst >= -1e-9,
        detail: format!("1000 triples on 10 graphs, min slack {worst:.3e}"),
    }
}

fn criterion_7() -> Outcome {
    let inst = generate(GeneratorConfig::new(30, 12, 7)).unwrap();
    let p = precedence_for(&inst.feeder, &inst.scenario).unwrap();
    let saturation: f64 = inst
        .menus
        .iter()
        .map(|m| filter_dominated(m).unwrap().options.last().map_or(0.0, |o| o.cost))
        .sum();
    let steps = 60;
    let budgets: Vec<f64> = (0..=steps + 5).map(|k| saturation * k as f64 / steps as f64).collect();

    let mut raw_rises = 0;
    let mut rises = 0;
    let mut ends_agree = true;
    let mut tail_flat = true;
    let mut ends: Vec<(f64, f64)> = Vec::new();
    let mut first: Option<Vec<HardeningPlan>> = None;
    for option in ScheduleUpdate::ALL {
        let raw: Vec<f64> = budgets
            .iter()
            .map(|&b| plan_precedence(&p, &inst.menus, b, option).unwrap().harm)
            .collect();
        raw_rises += raw.windows(2).filter(|w| w[1] > w[0]).count();

        let swept = budget_sweep(&p, &inst.menus, &budgets, option).unwrap();
        let harms: Vec<f64> = swept.iter().map(|pl| pl.harm).collect();
        rises += harms.windows(2).filter(|w| w[1] > w[0]).count();
        tail_flat &= harms[steps..].iter().all(|&x| x == harms[steps]);
        ends.push((harms[0], harms[steps]));
        match &first {
            None => first = Some(swept),
            Some(base) => {
                for k in [0, steps] {
                    ends_agree &= swept[k].choices == base[k].choices && swept[k].harm == base[k].harm;
                }
            }
        }
    }
    Outcome {
        id: "7",
        name: "diminishing returns over a budget sweep",
        pass: rises == 0 && ends_agree && tail_flat,
        detail: format!(
            "12 edges, {} budgets x 3 options: {rises} increases in the sweep ({raw_rises} in \
             independent runs); ends agree {ends_agree}; harm at 0 / saturation {:?}",
            budgets.len(),
            ends
        ),
    }
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let inst = generate(GeneratorConfig::new(8500, 2500, 1)).unwrap();
    let gen_time = start.elapsed();
    let valid = inst.feeder.validate().is_empty();

    let p = precedence_for(&inst.feeder, &inst.scenario).unwrap();
    let budget = 0.3 * max_option_cost(&inst.menus);
    let start = Instant::now();
    let plan = plan_precedence(&p, &inst.menus, budget, ScheduleUpdate::Never).unwrap();
    let plan_time = start.elapsed();

    // Sequencing alone on a 2500-job outtree.
    let mut r = rng(8);
    let big = random_outtree(&mut r, 2500, (1, 10), (1, 10));
    let start = Instant::now();
    let seq = optimal_sequence(&big);
    let seq_time = start.elapsed();

    Outcome {
        id: "8",
        name: "scale",
        pass: valid
            && p.len() == 2500
            && plan.spend <= budget + 1e-9
            && seq.order.len() == 2500
            && plan_time < Duration::from_secs(60)
            && seq_time < Duration::from_secs(1),
        detail: format!(
            "generate 8500/2500 in {gen_time:.2?}; Option 1 plan in {plan_time:.2?} ({} passes); \
             2500-job sequence in {seq_time:.2?}",
            plan.passes
        ),
    }
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = r.random_range(1..=20);
        let mut p = random_outtree(&mut r, n, (1, 10), (1, 10));
        // Non-integer times too.
        let times: Vec<f64> = (0..n).map(|_| r.random_range(0.2..7.0)).collect();
        if r.random_bool(0.5) {
            p = p.with_repair_times(&times).unwrap();
        }
        let mut order: Vec<String> = p.jobs().iter().map(|j| j.id.clone()).collect();
        order.shuffle(&mut r);
        let seq = evaluate_order(&p, &order).unwrap();
        let total: f64 = p.repair_times().iter().sum();
        let horizon = total + r.random_range(0.0..5.0);
        let traj = trajectory(&seq, &p, horizon).unwrap();
        let lhs = traj.total_weight * (horizon - traj.resilience);
        // Harm recomputed by walking each job's upstream chain.
        let mut clock = 0.0;
        let mut done = vec![0.0; n];
        for id in &order {
            let j = p.index_of(id).unwrap();
            clock += p.jobs()[j].repair_time;
            done[j] = clock;
        }
        let harm: f64 = (0..n)
            .map(|j| {
                let mut t = done[j];
                let mut up = p.parent(j);
                while let Some(k) = up {
                    t = t.max(done[k]);
                    up = p.parent(k);
                }
                p.jobs()[j].weight * t
            })
            .sum();
        assert!((harm - seq.harm).abs() <= 1e-9 * harm.max(1.0));
        worst = worst.max((lhs - harm).abs() / harm.abs().max(1.0));
    }
    Outcome {
        id: "9",
        name: "trajectory area identity",
        pass: worst <= 1e-9,
        detail: format!("100 random orders, max relative error {worst:.3e}"),
    }
}

fn main() {
    let criteria: [fn() -> Outcome; 9] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
    ];
    let mut failed = 0;
    for c in criteria {
        let o = c();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{status}] {}: {}", o.id, o.name, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
