//! Monte Carlo evaluation of expected harm under random repair times, and
//! the operability trajectory of a restoration.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};
use crate::precedence::PrecedenceGraph;
use crate::sequence::{optimal_harm_with, resolve_order, RepairSequence};

pub const DEFAULT_SAMPLES: u64 = 10_000;

/// Draws a repair time with mean `mean`: geometric on {1, 2, ...} with
/// success probability `1 / mean` when `mean >= 1`, the constant `mean`
/// otherwise.
pub fn sample_repair_time<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    if mean <= 1.0 {
        return mean;
    }
    let geo = Geometric::new(1.0 / mean).expect("probability in (0, 1)");
    // `Geometric` counts failures before the first success.
    1.0 + geo.sample(rng) as f64
}

/// Exact mean of `min(X, cap)` for the repair time law above.
pub fn truncated_mean(mean: f64, cap: f64) -> f64 {
    if mean <= 1.0 {
        return mean.min(cap);
    }
    if cap < 1.0 {
        return cap;
    }
    // E[min(X, m)] = sum_{k=1}^{floor m} P(X >= k) + frac(m) P(X > floor m)
    let s = 1.0 / mean;
    let whole = libm::floor(cap);
    let tail = libm::pow(1.0 - s, whole);
    (1.0 - tail) / s + (cap - whole) * tail
}

/// Independent stream for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSample {
    pub index: u64,
    pub seed: u64,
    pub times: BTreeMap<String, f64>,
}

/// Sample `index` of the run seeded with `seed`; reproducible from the pair.
pub fn sample_scenario(expected: &BTreeMap<String, f64>, seed: u64, index: u64) -> Result<ScenarioSample> {
    check_means(expected.iter().map(|(k, &v)| (k.as_str(), v)))?;
    let mut rng = sample_rng(seed, index);
    let times = expected
        .iter()
        .map(|(edge, &mean)| (edge.clone(), sample_repair_time(mean, &mut rng)))
        .collect();
    Ok(ScenarioSample { index, seed, times })
}

fn check_means<'a>(means: impl Iterator<Item = (&'a str, f64)>) -> Result<()> {
    for (edge, m) in means {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::NonPositiveRepairTime {
                edge: String::from(edge),
                value: m,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub samples: u64,
    pub seed: u64,
    /// Upper end of the support per job (indexed like `jobs()`). When set,
    /// draws are truncated to it and the worst-case Jensen gap is reported.
    pub support_max: Option<Vec<f64>>,
}

impl MonteCarloConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            support_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub samples: u64,
    pub seed: u64,
    /// Sample mean of the optimal harm.
    pub mean: f64,
    /// Standard error of `mean`; zero for a single sample.
    pub stderr: f64,
    /// Optimal harm at the mean repair times.
    pub f_of_mean: f64,
    /// `f(p_max) - 2 f(p_max / 2)` when a support bound was given.
    pub jensen_bound: Option<f64>,
}

/// Monte Carlo estimate of `E[f(P)]` where each job's repair time is drawn
/// independently around the template's repair time (its expected value).
/// Samples are summed in index order so the result does not depend on how
/// they were produced.
pub fn monte_carlo_expected_harm(p: &PrecedenceGraph, cfg: &MonteCarloConfig) -> Result<EvalReport> {
    if cfg.samples == 0 {
        return Err(Error::NoSamples);
    }
    let means = p.repair_times();
    if let Some(cap) = &cfg.support_max {
        if cap.len() != means.len() {
            return Err(Error::Invalid(format!(
                "support bound has {} entries for {} jobs",
                cap.len(),
                means.len()
            )));
        }
        check_means(p.jobs().iter().map(|j| j.id.as_str()).zip(cap.iter().copied()))?;
    }

    let mut times = means.clone();
    // Welford's running mean and variance.
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for index in 0..cfg.samples {
        let mut rng = sample_rng(cfg.seed, index);
        for (t, &m) in times.iter_mut().zip(&means) {
            *t = sample_repair_time(m, &mut rng);
        }
        if let Some(cap) = &cfg.support_max {
            for (t, &c) in times.iter_mut().zip(cap) {
                *t = t.min(c);
            }
        }
        let h = optimal_harm_with(p, &times);
        let k = (index + 1) as f64;
        let delta = h - mean;
        mean += delta / k;
        m2 += delta * (h - mean);
    }

    let n = cfg.samples as f64;
    let stderr = if cfg.samples > 1 {
        libm::sqrt(m2 / (n - 1.0) / n)
    } else {
        0.0
    };

    let (f_of_mean, jensen_bound) = match &cfg.support_max {
        None => (optimal_harm_with(p, &means), None),
        Some(cap) => {
            let eff: Vec<f64> = means.iter().zip(cap).map(|(&m, &c)| truncated_mean(m, c)).collect();
            let half: Vec<f64> = cap.iter().map(|c| c / 2.0).collect();
            let bound = optimal_harm_with(p, cap) - 2.0 * optimal_harm_with(p, &half);
            (optimal_harm_with(p, &eff), Some(bound))
        }
    };

    Ok(EvalReport {
        samples: cfg.samples,
        seed: cfg.seed,
        mean,
        stderr,
        f_of_mean,
        jensen_bound,
    })
}

/// Operability over time as a right-continuous step function.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `(t, Q)` pairs: `Q` holds from `t` until the next entry. The first
    /// entry is at t = 0.
    pub steps: Vec<(f64, f64)>,
    pub horizon: f64,
    /// Area under `Q` over `[0, horizon]`.
    pub resilience: f64,
    pub total_weight: f64,
}

impl Trajectory {
    pub fn q_at(&self, t: f64) -> f64 {
        self.steps
            .iter()
            .take_while(|(s, _)| *s <= t)
            .last()
            .map_or(0.0, |&(_, q)| q)
    }
}

/// Fraction of total weight energized over time for `seq`, integrated
/// exactly over `[0, horizon]`.
pub fn trajectory(seq: &RepairSequence, p: &PrecedenceGraph, horizon: f64) -> Result<Trajectory> {
    resolve_order(p, &seq.order)?;
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(p.len());
    let mut last = 0.0f64;
    for job in p.jobs() {
        let t = *seq
            .energization
            .get(&job.id)
            .ok_or_else(|| Error::Invalid(format!("sequence lacks energization time for `{}`", job.id)))?;
        let c = seq.completion.get(&job.id).copied().unwrap_or(t);
        last = last.max(c).max(t);
        events.push((t, job.weight));
    }
    if !(horizon >= last && horizon.is_finite()) {
        return Err(Error::HorizonTooShort {
            horizon,
            completion: last,
        });
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let total = p.total_weight();
    let frac = |w: f64| if total > 0.0 { w / total } else { 1.0 };

    let mut on = p.base_weight();
    let mut steps = Vec::with_capacity(events.len() + 1);
    steps.push((0.0, frac(on)));
    // Integrate in weight units, normalize once.
    let mut area = 0.0;
    let mut clock = 0.0;
    for (t, w) in events {
        area += on * (t - clock);
        clock = t;
        on += w;
        match steps.last_mut() {
            Some(last) if last.0 == t => last.1 = frac(on),
            _ => steps.push((t, frac(on))),
        }
    }
    area += on * (horizon - clock);
    let resilience = if total > 0.0 { area / total } else { horizon };

    Ok(Trajectory {
        steps,
        horizon,
        resilience,
        total_weight: total,
    })
}
