//! Monte Carlo schedule-risk simulation over the activity-risk factor
//! matrix: completion-time distribution, per-task criticality indices and
//! deadline probability.
//!
//! Each replication owns an independent ChaCha stream keyed by its index,
//! and per-replication outcomes are reduced in index order, so results are
//! bit-identical no matter how many workers run them.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, Project, RiskFactorMatrix, Task, TaskId};
use crate::sched::BaselineSchedule;

pub const HISTOGRAM_BINS: usize = 50;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("replications must be at least 1")]
    NoReplications,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub replications: usize,
    pub seed: u64,
    pub deadline: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Percentiles {
    pub p10: f64,
    pub p50: f64,
    pub p80: f64,
    pub p90: f64,
    pub p95: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub replications: usize,
    pub seed: u64,
    pub mean: f64,
    pub std: f64,
    pub percentiles: Percentiles,
    /// Fraction of replications in which the task sat on a critical path.
    pub criticality_index: BTreeMap<TaskId, f64>,
    /// The deadline the probability refers to, when one was configured.
    pub deadline: Option<f64>,
    pub deadline_probability: Option<f64>,
    /// Fixed 50-bin histogram of the makespan sample.
    pub histogram: Vec<HistogramBin>,
    /// Raw makespans, one per replication, in replication order. Not part of
    /// the serialized result.
    #[serde(skip)]
    pub makespans: Vec<f64>,
}

/// Duration of one activity under one draw vector: risks push the duration
/// from the optimistic estimate toward the pessimistic one, saturating at it.
pub fn sample_duration(
    task: &Task,
    rf_row: &BTreeMap<String, f64>,
    draws: &BTreeMap<String, f64>,
) -> f64 {
    let exposure: f64 = rf_row
        .iter()
        .map(|(risk, rf)| rf * draws.get(risk).copied().unwrap_or(0.0))
        .sum();
    task.est_min + (task.est_max - task.est_min) * exposure.clamp(0.0, 1.0)
}

/// Everything a replication needs, precomputed once: dense task indexing,
/// topological order, adjacency, and per-task risk-factor rows.
struct SimPlan {
    ids: Vec<TaskId>,
    order: Vec<usize>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    est_min: Vec<f64>,
    est_span: Vec<f64>,
    /// Per task: (risk index, rf) pairs.
    rf_rows: Vec<Vec<(usize, f64)>>,
    risk_count: usize,
}

impl SimPlan {
    fn build(
        project: &Project,
        matrix: &RiskFactorMatrix,
        baseline: &BaselineSchedule,
    ) -> Result<Self, SimError> {
        let ids = project.task_ids();
        let index_of: BTreeMap<TaskId, usize> =
            ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let arcs: BTreeSet<(TaskId, TaskId)> = baseline.combined_arcs(project);
        let order_ids = crate::model::topological_order(&ids, &arcs)?;
        let order: Vec<usize> = order_ids.iter().map(|id| index_of[id]).collect();

        let mut preds = vec![Vec::new(); ids.len()];
        let mut succs = vec![Vec::new(); ids.len()];
        for &(u, v) in &arcs {
            preds[index_of[&v]].push(index_of[&u]);
            succs[index_of[&u]].push(index_of[&v]);
        }

        let risks = matrix.risk_ids();
        let risk_index: BTreeMap<&String, usize> =
            risks.iter().enumerate().map(|(i, r)| (r, i)).collect();
        let mut rf_rows = vec![Vec::new(); ids.len()];
        for ((task, risk), &rf) in &matrix.entries {
            if let Some(&ti) = index_of.get(task) {
                rf_rows[ti].push((risk_index[risk], rf));
            }
        }

        let est_min: Vec<f64> = ids
            .iter()
            .map(|id| project.task(*id).expect("valid id").est_min)
            .collect();
        let est_span: Vec<f64> = ids
            .iter()
            .map(|id| {
                let t = project.task(*id).expect("valid id");
                t.est_max - t.est_min
            })
            .collect();

        Ok(SimPlan {
            ids,
            order,
            preds,
            succs,
            est_min,
            est_span,
            rf_rows,
            risk_count: risks.len(),
        })
    }

    /// One replication: sample durations, forward and backward pass, record
    /// the makespan and which tasks had (numerically) zero slack.
    fn replicate(&self, seed: u64, rep: u64) -> (f64, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(rep);
        // One draw per risk, shared by every activity the risk touches.
        let draws: Vec<f64> = (0..self.risk_count).map(|_| rng.random::<f64>()).collect();

        let n = self.ids.len();
        let mut durations = vec![0.0_f64; n];
        for (i, duration) in durations.iter_mut().enumerate() {
            let exposure: f64 = self.rf_rows[i]
                .iter()
                .map(|&(r, rf)| rf * draws[r])
                .sum::<f64>()
                .clamp(0.0, 1.0);
            *duration = self.est_min[i] + self.est_span[i] * exposure;
        }

        let mut early_start = vec![0.0_f64; n];
        let mut early_finish = vec![0.0_f64; n];
        let mut makespan = 0.0_f64;
        for &i in &self.order {
            let es = self.preds[i]
                .iter()
                .map(|&p| early_finish[p])
                .fold(0.0_f64, f64::max);
            early_start[i] = es;
            early_finish[i] = es + durations[i];
            if early_finish[i] > makespan {
                makespan = early_finish[i];
            }
        }

        let mut late_start = vec![0.0_f64; n];
        for &i in self.order.iter().rev() {
            let lf = self.succs[i]
                .iter()
                .map(|&s| late_start[s])
                .fold(makespan, f64::min);
            late_start[i] = lf - durations[i];
        }

        let eps = 1e-9 * makespan.max(1.0);
        let critical: Vec<bool> = (0..n)
            .map(|i| (late_start[i] - early_start[i]).abs() <= eps)
            .collect();
        (makespan, critical)
    }
}

/// Runs the simulation, fanning replications out over rayon when the
/// `parallel` feature is enabled.
pub fn run_simulation(
    project: &Project,
    matrix: &RiskFactorMatrix,
    baseline: &BaselineSchedule,
    cfg: &SimConfig,
) -> Result<SimulationResult, SimError> {
    let plan = SimPlan::build(project, matrix, baseline)?;
    run_with(&plan, cfg, |reps| {
        #[cfg(feature = "parallel")]
        {
            (0..reps)
                .into_par_iter()
                .map(|rep| plan.replicate(cfg.seed, rep as u64))
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..reps).map(|rep| plan.replicate(cfg.seed, rep as u64)).collect()
        }
    })
}

/// Sequential twin of [`run_simulation`]; always available so the two paths
/// can be compared for equality and benchmarked against each other.
pub fn run_simulation_sequential(
    project: &Project,
    matrix: &RiskFactorMatrix,
    baseline: &BaselineSchedule,
    cfg: &SimConfig,
) -> Result<SimulationResult, SimError> {
    let plan = SimPlan::build(project, matrix, baseline)?;
    run_with(&plan, cfg, |reps| {
        (0..reps).map(|rep| plan.replicate(cfg.seed, rep as u64)).collect()
    })
}

fn run_with(
    plan: &SimPlan,
    cfg: &SimConfig,
    execute: impl FnOnce(usize) -> Vec<(f64, Vec<bool>)>,
) -> Result<SimulationResult, SimError> {
    if cfg.replications == 0 {
        return Err(SimError::NoReplications);
    }
    let outcomes = execute(cfg.replications);

    let n = cfg.replications;
    let task_count = plan.ids.len();
    let mut makespans = Vec::with_capacity(n);
    let mut critical_counts = vec![0u64; task_count];
    for (makespan, critical) in outcomes {
        makespans.push(makespan);
        for (i, was_critical) in critical.into_iter().enumerate() {
            if was_critical {
                critical_counts[i] += 1;
            }
        }
    }

    let lo = makespans.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = makespans.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mean, std) = if lo == hi {
        // Degenerate sample: exact, avoids summation noise.
        (lo, 0.0)
    } else {
        let mean = makespans.iter().sum::<f64>() / n as f64;
        let var = makespans.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>()
            / (n as f64 - 1.0).max(1.0);
        (mean, var.sqrt())
    };

    let mut sorted = makespans.clone();
    sorted.sort_by(f64::total_cmp);
    let pct = |p: f64| -> f64 {
        let rank = p * (n as f64 - 1.0);
        let lo_idx = rank.floor() as usize;
        let hi_idx = rank.ceil() as usize;
        let frac = rank - lo_idx as f64;
        sorted[lo_idx] * (1.0 - frac) + sorted[hi_idx] * frac
    };
    let percentiles = Percentiles {
        p10: pct(0.10),
        p50: pct(0.50),
        p80: pct(0.80),
        p90: pct(0.90),
        p95: pct(0.95),
    };

    let histogram = build_histogram(&sorted, lo, hi);
    let deadline_probability = cfg
        .deadline
        .map(|d| makespans.iter().filter(|&&m| m <= d).count() as f64 / n as f64);

    let criticality_index = plan
        .ids
        .iter()
        .enumerate()
        .map(|(i, &id)| (id, critical_counts[i] as f64 / n as f64))
        .collect();

    Ok(SimulationResult {
        replications: n,
        seed: cfg.seed,
        mean,
        std,
        percentiles,
        criticality_index,
        deadline: cfg.deadline,
        deadline_probability,
        histogram,
        makespans,
    })
}

fn build_histogram(sorted: &[f64], lo: f64, hi: f64) -> Vec<HistogramBin> {
    if lo == hi {
        return vec![HistogramBin {
            lower: lo,
            upper: hi,
            count: sorted.len() as u64,
        }];
    }
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let mut bins: Vec<HistogramBin> = (0..HISTOGRAM_BINS)
        .map(|i| HistogramBin {
            lower: lo + i as f64 * width,
            upper: lo + (i + 1) as f64 * width,
            count: 0,
        })
        .collect();
    for &m in sorted {
        let idx = (((m - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
        bins[idx].count += 1;
    }
    bins
}

/// Fraction of replications finishing on or before the deadline.
pub fn deadline_probability(result: &SimulationResult, deadline: f64) -> f64 {
    result.makespans.iter().filter(|&&m| m <= deadline).count() as f64
        / result.makespans.len() as f64
}

/// Per-task criticality indices recorded by the run.
pub fn criticality_indices(result: &SimulationResult) -> &BTreeMap<TaskId, f64> {
    &result.criticality_index
}
