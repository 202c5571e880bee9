use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A repair job: one damaged edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub id: String,
    /// Weight of the supernode energized once this job and all its
    /// ancestors are complete.
    pub weight: f64,
    pub repair_time: f64,
    /// Parent job, or `None` when the job hangs directly off the virtual root
    /// (the supernode holding the source).
    pub parent: Option<String>,
    pub energizes: Vec<String>,
}

/// Soft precedence outtree over repair jobs.
///
/// Jobs are stored sorted by id; every index-based accessor refers to that
/// order. Roots hang off an implicit virtual root with zero weight and zero
/// repair time, energized at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecedenceGraph {
    jobs: Vec<Job>,
    parent: Vec<Option<usize>>,
    /// Parents before children.
    topo: Vec<usize>,
    base_weight: f64,
}

impl PrecedenceGraph {
    /// `base_weight` is the weight already energized at t = 0 (the source
    /// supernode).
    pub fn new(mut jobs: Vec<Job>, base_weight: f64) -> Result<Self> {
        jobs.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in jobs.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::NotOuttree(format!("duplicate job `{}`", pair[0].id)));
            }
        }
        if !(base_weight >= 0.0 && base_weight.is_finite()) {
            return Err(Error::InvalidWeight {
                id: String::from("<source>"),
                value: base_weight,
            });
        }
        for job in &jobs {
            check_job(&job.id, job.weight, job.repair_time)?;
        }

        let lookup = |id: &str| jobs.binary_search_by(|j| j.id.as_str().cmp(id)).ok();
        let mut parent = Vec::with_capacity(jobs.len());
        for job in &jobs {
            parent.push(match &job.parent {
                None => None,
                Some(pid) => match lookup(pid) {
                    Some(k) => Some(k),
                    None => {
                        return Err(Error::NotOuttree(format!(
                            "job `{}` has unknown parent `{}`",
                            job.id, pid
                        )))
                    }
                },
            });
        }

        let n = jobs.len();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut topo = Vec::with_capacity(n);
        for (j, p) in parent.iter().enumerate() {
            match p {
                Some(k) => children[*k].push(j),
                None => topo.push(j),
            }
        }
        let mut head = 0;
        while head < topo.len() {
            let j = topo[head];
            head += 1;
            topo.extend_from_slice(&children[j]);
        }
        if topo.len() != n {
            return Err(Error::NotOuttree(String::from(
                "parent links contain a cycle",
            )));
        }

        Ok(Self {
            jobs,
            parent,
            topo,
            base_weight,
        })
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn parent(&self, job: usize) -> Option<usize> {
        self.parent[job]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.jobs.binary_search_by(|j| j.id.as_str().cmp(id)).ok()
    }

    /// Job indices with every parent ahead of its children.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn base_weight(&self) -> f64 {
        self.base_weight
    }

    /// Weight of every node in the feeder, energized or not.
    pub fn total_weight(&self) -> f64 {
        self.base_weight + self.jobs.iter().map(|j| j.weight).sum::<f64>()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.jobs.iter().map(|j| j.weight).collect()
    }

    pub fn repair_times(&self) -> Vec<f64> {
        self.jobs.iter().map(|j| j.repair_time).collect()
    }

    pub fn repair_time_map(&self) -> BTreeMap<String, f64> {
        self.jobs
            .iter()
            .map(|j| (j.id.clone(), j.repair_time))
            .collect()
    }

    /// Same structure and weights with new repair times, indexed like `jobs()`.
    pub fn with_repair_times(&self, times: &[f64]) -> Result<Self> {
        if times.len() != self.jobs.len() {
            return Err(Error::Invalid(format!(
                "expected {} repair times, got {}",
                self.jobs.len(),
                times.len()
            )));
        }
        let mut next = self.clone();
        for (job, &t) in next.jobs.iter_mut().zip(times) {
            check_job(&job.id, job.weight, t)?;
            job.repair_time = t;
        }
        Ok(next)
    }

    /// Ancestors of `job`, nearest first.
    pub fn ancestors(&self, job: usize) -> impl Iterator<Item = usize> + '_ {
        core::iter::successors(self.parent[job], move |&k| self.parent[k])
    }

    /// True when `order` never places a job ahead of its parent.
    pub fn is_linear_extension(&self, order: &[usize]) -> bool {
        let mut position = vec![usize::MAX; self.len()];
        for (i, &j) in order.iter().enumerate() {
            if j >= self.len() {
                return false;
            }
            position[j] = i;
        }
        (0..self.len()).all(|j| match self.parent[j] {
            Some(k) => position[k] < position[j],
            None => true,
        })
    }
}

fn check_job(id: &str, weight: f64, repair_time: f64) -> Result<()> {
    if !(weight >= 0.0 && weight.is_finite()) {
        return Err(Error::InvalidWeight {
            id: String::from(id),
            value: weight,
        });
    }
    if !(repair_time > 0.0 && repair_time.is_finite()) {
        return Err(Error::NonPositiveRepairTime {
            edge: String::from(id),
            value: repair_time,
        });
    }
    Ok(())
}
