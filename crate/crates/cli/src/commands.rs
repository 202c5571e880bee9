use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use feederplan_core::stochastic::DEFAULT_SAMPLES;
use feederplan_core::{
    brute_force_sequence, budget_sweep, exact_joint_oracle_precedence, monte_carlo_expected_harm, optimal_sequence,
    plan_precedence, precedence_for, trajectory, HardeningMenu, HardeningPlan, MonteCarloConfig,
    OracleCaps, PrecedenceGraph, RepairSequence, ScheduleUpdate,
};

use crate::formats::{self, fmt_f64, FeederFile, MenuFile, ScenarioFile};
use crate::generate::{generate, GeneratorConfig};
use crate::Failure;

/// Harms closer than this (relative) are reported as equal.
const HARM_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "feederplan", version, about = "Repair sequencing and hardening plans for radial feeders")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Feeder JSON.
    #[arg(long)]
    pub feeder: PathBuf,
    /// Damage scenario JSON.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Reject unknown JSON fields instead of warning.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal single-crew repair order.
    Sequence {
        #[command(flatten)]
        inputs: Inputs,
        /// Also enumerate every order and report whether the harms agree.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hardening plan for one budget.
    Harden {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        menu: PathBuf,
        #[arg(long)]
        budget: f64,
        /// Schedule update policy: 1 never, 2 after each pass, 3 after each commitment.
        #[arg(long, default_value_t = 1)]
        option: u8,
        /// Also solve the joint problem by enumeration.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Harm against budget as CSV.
    Sweep {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        menu: PathBuf,
        /// Budget grid `start:stop:step`, or a single budget.
        #[arg(long)]
        budgets: String,
        #[arg(long, default_value_t = 1)]
        option: u8,
        /// Add Monte Carlo columns with this many samples per budget.
        #[arg(long, requires = "seed")]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of expected harm.
    Evaluate {
        #[command(flatten)]
        inputs: Inputs,
        /// Evaluate the plan built from this menu and `--budget`.
        #[arg(long, requires = "budget")]
        menu: Option<PathBuf>,
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long, default_value_t = 1)]
        option: u8,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: u64,
        #[arg(long)]
        seed: u64,
        /// Truncate every repair time at this value and report the support bound.
        #[arg(long)]
        pmax: Option<f64>,
        /// Write the operability trajectory of the optimal sequence as CSV.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Trajectory horizon; defaults to the total repair time.
        #[arg(long, requires = "trajectory")]
        horizon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random radial instance: feeder.json, scenario.json and menu.json.
    Generate {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        damaged: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        options: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Structural checks on instance files.
    Validate {
        #[arg(long)]
        feeder: PathBuf,
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, requires = "scenario")]
        menu: Option<PathBuf>,
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sequence { inputs, oracle, out } => cmd_sequence(&inputs, oracle, out.as_deref()),
        Command::Harden {
            inputs,
            menu,
            budget,
            option,
            exact,
            out,
        } => cmd_harden(&inputs, &menu, budget, option, exact, out.as_deref()),
        Command::Sweep {
            inputs,
            menu,
            budgets,
            option,
            samples,
            seed,
            out,
        } => {
            let mc = samples.zip(seed);
            cmd_sweep(&inputs, &menu, &budgets, option, mc, out.as_deref())
        }
        Command::Evaluate {
            inputs,
            menu,
            budget,
            option,
            samples,
            seed,
            pmax,
            trajectory,
            horizon,
            out,
        } => {
            let p = load_precedence(&inputs)?;
            let p = match (menu, budget) {
                (Some(menu), Some(budget)) => {
                    let menus = formats::read_menus(&menu, inputs.strict)?;
                    let plan = plan_precedence(&p, &menus, budget, schedule_option(option)?)?;
                    hardened(&p, &plan)?
                }
                _ => p,
            };
            cmd_evaluate(&p, samples, seed, pmax, trajectory.as_deref(), horizon, out.as_deref())
        }
        Command::Generate {
            nodes,
            damaged,
            seed,
            options,
            out,
        } => cmd_generate(
            GeneratorConfig {
                nodes,
                damaged,
                options_per_edge: options,
                seed,
            },
            &out,
        ),
        Command::Validate {
            feeder,
            scenario,
            menu,
            strict,
            out,
        } => cmd_validate(&feeder, scenario.as_deref(), menu.as_deref(), strict, out.as_deref()),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_json(out: Option<&Path>, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_output(out, &text)
}

fn schedule_option(n: u8) -> Result<ScheduleUpdate> {
    Ok(ScheduleUpdate::try_from(n)?)
}

fn load_precedence(inputs: &Inputs) -> Result<PrecedenceGraph> {
    let feeder = formats::read_feeder(&inputs.feeder, inputs.strict)?;
    let scenario = formats::read_scenario(&inputs.scenario, inputs.strict)?;
    Ok(precedence_for(&feeder, &scenario)?)
}

/// `p` with the plan's hardened expected repair times.
fn hardened(p: &PrecedenceGraph, plan: &HardeningPlan) -> Result<PrecedenceGraph> {
    let times: Vec<f64> = p.jobs().iter().map(|j| plan.repair_times[&j.id]).collect();
    Ok(p.with_repair_times(&times)?)
}

fn same_harm(a: f64, b: f64) -> bool {
    (a - b).abs() <= HARM_TOL * a.abs().max(b.abs()).max(1.0)
}

fn sequence_json(seq: &RepairSequence) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("order".into(), json!(seq.order));
    m.insert("completion".into(), json!(seq.completion));
    m.insert("energization".into(), json!(seq.energization));
    m.insert("harm".into(), json!(seq.harm));
    m
}

fn assertion(message: String) -> anyhow::Error {
    Failure::new("assertion-failed", message).into()
}

fn cmd_sequence(inputs: &Inputs, oracle: bool, out: Option<&Path>) -> Result<()> {
    let p = load_precedence(inputs)?;
    let seq = optimal_sequence(&p);
    let mut doc = sequence_json(&seq);
    let mut agrees = true;
    if oracle {
        let brute = brute_force_sequence(&p)?;
        agrees = same_harm(seq.harm, brute.harm);
        doc.insert("oracle".into(), Value::Object(sequence_json(&brute)));
        doc.insert("agrees".into(), json!(agrees));
    }
    write_json(out, &Value::Object(doc))?;
    if !agrees {
        return Err(assertion("optimal sequence disagrees with enumeration".into()));
    }
    Ok(())
}

fn plan_json(p: &PrecedenceGraph, plan: &HardeningPlan) -> Map<String, Value> {
    let choices: Map<String, Value> = plan
        .choices
        .iter()
        .map(|(edge, o)| (edge.clone(), json!({"dp": o.dp, "cost": o.cost})))
        .collect();
    let table: Vec<Value> = p
        .jobs()
        .iter()
        .map(|j| {
            let dp = plan.choices.get(&j.id).map_or(0.0, |o| o.dp);
            json!({"edge": j.id, "dp": dp, "repair_time": plan.repair_times[&j.id]})
        })
        .collect();
    let mut m = Map::new();
    m.insert("plan".into(), Value::Object(choices));
    m.insert("spend".into(), json!(plan.spend));
    m.insert("budget".into(), json!(plan.budget));
    m.insert("residual".into(), json!(plan.residual));
    m.insert("sequence".into(), json!(plan.sequence.order));
    m.insert("harm".into(), json!(plan.harm));
    m.insert("table".into(), Value::Array(table));
    m
}

fn cmd_harden(
    inputs: &Inputs,
    menu: &Path,
    budget: f64,
    option: u8,
    exact: bool,
    out: Option<&Path>,
) -> Result<()> {
    let option = schedule_option(option)?;
    let p = load_precedence(inputs)?;
    let menus = formats::read_menus(menu, inputs.strict)?;
    let plan = plan_precedence(&p, &menus, budget, option)?;

    let mut doc = plan_json(&p, &plan);
    doc.insert("option".into(), json!(option.number()));
    doc.insert("passes".into(), json!(plan.passes));
    doc.insert("unhardened_harm".into(), json!(optimal_sequence(&p).harm));

    let mut ok = true;
    if exact {
        let best = exact_joint_oracle_precedence(&p, &menus, budget, OracleCaps::default())?;
        ok = best.harm <= plan.harm + HARM_TOL * plan.harm.abs().max(1.0);
        let ratio = if best.harm > 0.0 { plan.harm / best.harm } else { 1.0 };
        doc.insert("oracle".into(), Value::Object(plan_json(&p, &best)));
        doc.insert("ratio".into(), json!(ratio));
    }
    write_json(out, &Value::Object(doc))?;
    if !ok {
        return Err(assertion("heuristic plan beats the exact optimum".into()));
    }
    Ok(())
}

/// Parses `start:stop:step` (or a single value) into budgets.
pub fn parse_budgets(spec: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Failure::new("invalid-budgets", format!("`{spec}`: {why}"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad("expected numbers"))?;
    if parts.iter().any(|x| !x.is_finite()) {
        return Err(bad("values must be finite").into());
    }
    let grid = match parts[..] {
        [b] => vec![b],
        [start, stop, step] => {
            if step <= 0.0 {
                return Err(bad("step must be positive").into());
            }
            if stop < start {
                return Err(bad("stop is below start").into());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|k| start + k as f64 * step).collect()
        }
        _ => return Err(bad("expected start:stop:step").into()),
    };
    if grid.iter().any(|&b| b < 0.0) {
        return Err(bad("budgets must be nonnegative").into());
    }
    Ok(grid)
}

fn cmd_sweep(
    inputs: &Inputs,
    menu: &Path,
    budgets: &str,
    option: u8,
    mc: Option<(u64, u64)>,
    out: Option<&Path>,
) -> Result<()> {
    let grid = parse_budgets(budgets)?;
    let option = schedule_option(option)?;
    let p = load_precedence(inputs)?;
    let menus = formats::read_menus(menu, inputs.strict)?;

    let mut csv = String::from("budget,f_of_mean");
    if mc.is_some() {
        csv.push_str(",mc_mean,mc_stderr");
    }
    csv.push('\n');
    let plans = budget_sweep(&p, &menus, &grid, option)?;
    let mut harms = Vec::with_capacity(grid.len());
    for plan in &plans {
        write!(csv, "{},{}", fmt_f64(plan.budget), fmt_f64(plan.harm))?;
        if let Some((samples, seed)) = mc {
            let report = monte_carlo_expected_harm(&hardened(&p, plan)?, &MonteCarloConfig::new(samples, seed))?;
            write!(csv, ",{},{}", fmt_f64(report.mean), fmt_f64(report.stderr))?;
        }
        csv.push('\n');
        harms.push(plan.harm);
    }
    write_output(out, &csv)?;

    if let Some(k) = harms.windows(2).position(|w| w[1] > w[0] && !same_harm(w[0], w[1])) {
        return Err(assertion(format!(
            "harm rises from {} to {} between budgets {} and {}",
            harms[k],
            harms[k + 1],
            grid[k],
            grid[k + 1]
        )));
    }
    Ok(())
}

fn cmd_evaluate(
    p: &PrecedenceGraph,
    samples: u64,
    seed: u64,
    pmax: Option<f64>,
    trajectory_out: Option<&Path>,
    horizon: Option<f64>,
    out: Option<&Path>,
) -> Result<()> {
    let mut cfg = MonteCarloConfig::new(samples, seed);
    cfg.support_max = pmax.map(|m| vec![m; p.len()]);
    let report = monte_carlo_expected_harm(p, &cfg)?;

    if let Some(path) = trajectory_out {
        let seq = optimal_sequence(p);
        let horizon = horizon.unwrap_or_else(|| p.repair_times().iter().sum());
        let traj = trajectory(&seq, p, horizon)?;
        let mut csv = String::from("time,Q\n");
        for &(t, q) in &traj.steps {
            writeln!(csv, "{},{}", fmt_f64(t), fmt_f64(q))?;
        }
        if traj.steps.last().is_some_and(|&(t, _)| t < horizon) {
            writeln!(csv, "{},{}", fmt_f64(horizon), fmt_f64(traj.q_at(horizon)))?;
        }
        write_output(Some(path), &csv)?;
    }

    write_json(
        out,
        &json!({
            "samples": report.samples,
            "seed": report.seed,
            "mean": report.mean,
            "stderr": report.stderr,
            "f_of_mean": report.f_of_mean,
            "jensen_bound": report.jensen_bound,
        }),
    )
}

fn cmd_generate(cfg: GeneratorConfig, dir: &Path) -> Result<()> {
    let inst = generate(cfg)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let files: [(&str, Value); 3] = [
        ("feeder.json", serde_json::to_value(FeederFile::from(&inst.feeder))?),
        ("scenario.json", serde_json::to_value(ScenarioFile::from(&inst.scenario))?),
        ("menu.json", serde_json::to_value(MenuFile::from_menus(&inst.menus))?),
    ];
    for (name, value) in files {
        write_json(Some(&dir.join(name)), &value)?;
    }
    Ok(())
}

fn cmd_validate(
    feeder: &Path,
    scenario: Option<&Path>,
    menu: Option<&Path>,
    strict: bool,
    out: Option<&Path>,
) -> Result<()> {
    let graph = formats::read_feeder(feeder, strict)?;
    let mut violations: Vec<Value> = graph
        .validate()
        .into_iter()
        .map(|v| json!({"code": v.code.as_str(), "detail": v.detail}))
        .collect();

    if violations.is_empty() {
        if let Some(path) = scenario {
            let sc = formats::read_scenario(path, strict)?;
            let menus: Vec<HardeningMenu> = match menu {
                Some(m) => formats::read_menus(m, strict)?,
                None => Vec::new(),
            };
            let checked = precedence_for(&graph, &sc)
                .and_then(|p| plan_precedence(&p, &menus, 0.0, ScheduleUpdate::Never).map(|_| ()));
            if let Err(e) = checked {
                violations.push(json!({"code": e.code(), "detail": e.to_string()}));
            }
        }
    }

    let valid = violations.is_empty();
    write_json(out, &json!({"valid": valid, "violations": violations}))?;
    if !valid {
        return Err(Failure::new("invalid-instance", format!("{} violation(s)", violations.len())).into());
    }
    Ok(())
}
