//! Resource-feasible baseline scheduling, critical/feeding chain
//! identification, and buffer insertion.
//!
//! The baseline comes from a serial schedule-generation scheme with a
//! minimum-late-start priority rule. The critical chain is traced backward
//! through precedence arcs and the resource links the SGS recorded, so
//! resource dependence extends the chain the same way handoffs do.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::buffer::{
    activity_variance, apd_buffer, cut_paste_buffer, rsem_buffer, BufferError, BufferMethod,
    ChainEstimates, FeedingSubnetwork, VarianceAssumption,
};
use crate::model::{cpm_pass, dedup_arcs, ModelError, Project, TaskId};

#[derive(Debug, Error)]
pub enum SchedError {
    #[error("INFEASIBLE: task {task} demands {demand} of {resource}, capacity {capacity}")]
    Infeasible {
        task: TaskId,
        resource: String,
        demand: f64,
        capacity: f64,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Buffer(#[from] BufferError),
}

/// Resource-feasible start/finish times plus the binding resource links the
/// schedule generation recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSchedule {
    pub start: BTreeMap<TaskId, f64>,
    pub finish: BTreeMap<TaskId, f64>,
    /// (releaser, waiter): the waiter started exactly when the releaser
    /// freed the capacity it was queued on.
    pub resource_links: BTreeSet<(TaskId, TaskId)>,
    pub durations_used: BTreeMap<TaskId, f64>,
}

impl BaselineSchedule {
    pub fn makespan(&self) -> f64 {
        self.finish.values().copied().fold(0.0, f64::max)
    }

    /// Precedence arcs and resource links together, deduplicated.
    pub fn combined_arcs(&self, project: &Project) -> BTreeSet<(TaskId, TaskId)> {
        let mut arcs = dedup_arcs(&project.arcs);
        arcs.extend(self.resource_links.iter().copied());
        arcs
    }
}

/// Builds the baseline with a serial SGS: tasks are taken in order of CPM
/// late start (ties to the smaller id) and placed at the earliest time that
/// satisfies precedence and every resource capacity.
pub fn build_baseline(project: &Project) -> Result<BaselineSchedule, SchedError> {
    let durations: BTreeMap<TaskId, f64> =
        project.tasks.iter().map(|t| (t.id, t.est_avg)).collect();

    for task in &project.tasks {
        for (res, &demand) in &task.demand {
            let capacity = project.resources.get(res).copied().unwrap_or(0.0);
            if demand > capacity {
                return Err(SchedError::Infeasible {
                    task: task.id,
                    resource: res.clone(),
                    demand,
                    capacity,
                });
            }
        }
    }

    let cpm = cpm_pass(project, &durations)?;
    let preds = project.predecessors();

    let mut unscheduled: BTreeSet<TaskId> = project.task_ids().into_iter().collect();
    let mut start: BTreeMap<TaskId, f64> = BTreeMap::new();
    let mut finish: BTreeMap<TaskId, f64> = BTreeMap::new();
    let mut resource_links: BTreeSet<(TaskId, TaskId)> = BTreeSet::new();
    // Scheduled tasks that hold any resource, kept for the feasibility sweep.
    let mut placed: Vec<TaskId> = Vec::new();

    let demand_of = |id: TaskId| &project.task(id).expect("scheduled task exists").demand;

    while !unscheduled.is_empty() {
        let &next = unscheduled
            .iter()
            .filter(|id| preds[id].iter().all(|p| !unscheduled.contains(p)))
            .min_by(|a, b| {
                cpm[a]
                    .late_start
                    .total_cmp(&cpm[b].late_start)
                    .then(a.cmp(b))
            })
            .expect("a valid DAG always has a ready task");
        unscheduled.remove(&next);

        let ready = preds[&next]
            .iter()
            .map(|p| finish[p])
            .fold(0.0_f64, f64::max);
        let duration = durations[&next];
        let demand = demand_of(next);

        // Capacity only frees up at finish events, so those are the only
        // candidate start times beyond the precedence-ready point.
        let mut candidates: Vec<f64> = vec![ready];
        for &k in &placed {
            if finish[&k] > ready {
                candidates.push(finish[&k]);
            }
        }
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();

        let fits = |t: f64| -> bool {
            // Zero-duration tasks occupy no interval.
            if duration == 0.0 {
                return true;
            }
            for (res, &units) in demand {
                let capacity = project.resources[res];
                // Usage is piecewise constant; check each event point in [t, t+d).
                let mut events: Vec<f64> = vec![t];
                for &k in &placed {
                    let s = start[&k];
                    if s > t && s < t + duration {
                        events.push(s);
                    }
                }
                for &e in &events {
                    let mut used = units;
                    for &k in &placed {
                        if start[&k] <= e && e < finish[&k] {
                            used += demand_of(k).get(res).copied().unwrap_or(0.0);
                        }
                    }
                    if used > capacity + 1e-9 {
                        return false;
                    }
                }
            }
            true
        };

        let chosen = candidates
            .iter()
            .copied()
            .find(|&t| fits(t))
            .expect("schedule always fits after the last finish");

        if chosen > ready {
            // The binding release: a task finishing exactly at the chosen
            // start that shares a resource with the waiter.
            let releaser = placed
                .iter()
                .copied()
                .filter(|&k| finish[&k] == chosen)
                .filter(|&k| demand.keys().any(|r| demand_of(k).contains_key(r)))
                .min();
            if let Some(r) = releaser {
                resource_links.insert((r, next));
            }
        }

        start.insert(next, chosen);
        finish.insert(next, chosen + duration);
        if !demand_of(next).is_empty() {
            placed.push(next);
        }
    }

    Ok(BaselineSchedule {
        start,
        finish,
        resource_links,
        durations_used: durations,
    })
}

/// A path of non-critical tasks merging into the critical chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedingChain {
    pub tasks: Vec<TaskId>,
    pub merge_task: TaskId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalChainPlan {
    pub critical_chain: Vec<TaskId>,
    pub feeding_chains: Vec<FeedingChain>,
    pub makespan: f64,
}

/// Traces the critical chain backward from the latest finish through arcs
/// whose predecessor finishes exactly when the task starts, preferring
/// resource links on ties, then decomposes the remaining tasks into feeding
/// chains.
pub fn identify_critical_chain(
    project: &Project,
    sched: &BaselineSchedule,
) -> CriticalChainPlan {
    if sched.start.is_empty() {
        return CriticalChainPlan {
            critical_chain: Vec::new(),
            feeding_chains: Vec::new(),
            makespan: 0.0,
        };
    }
    let arcs = sched.combined_arcs(project);
    let mut preds_by_task: BTreeMap<TaskId, Vec<TaskId>> = BTreeMap::new();
    let mut has_succ: BTreeSet<TaskId> = BTreeSet::new();
    for &(u, v) in &arcs {
        preds_by_task.entry(v).or_default().push(u);
        has_succ.insert(u);
    }

    // Among latest finishers prefer a sink, so a zero-duration dummy end
    // task anchors the chain and merge arcs into it stay visible.
    let makespan = sched.makespan();
    let last = sched
        .finish
        .iter()
        .filter(|(_, &f)| f == makespan)
        .map(|(&id, _)| id)
        .min_by_key(|id| (has_succ.contains(id), *id))
        .expect("schedule has at least one task");

    let mut chain = vec![last];
    let mut current = last;
    loop {
        let t_start = sched.start[&current];
        let back: Vec<TaskId> = preds_by_task
            .get(&current)
            .map(|ps| {
                ps.iter()
                    .copied()
                    .filter(|p| sched.finish[p] == t_start)
                    .collect()
            })
            .unwrap_or_default();
        if back.is_empty() {
            break;
        }
        let via_resource = back
            .iter()
            .copied()
            .filter(|&p| sched.resource_links.contains(&(p, current)))
            .min();
        current = via_resource.unwrap_or_else(|| back.into_iter().min().unwrap());
        chain.push(current);
    }
    chain.reverse();

    let chain_set: BTreeSet<TaskId> = chain.iter().copied().collect();
    let feeding_chains = feeding_decomposition(project, sched, &arcs, &chain, &chain_set);

    CriticalChainPlan {
        critical_chain: chain,
        feeding_chains,
        makespan,
    }
}

/// Groups non-critical tasks into disjoint simple paths, each ending at an
/// arc into the chain. Paths grow backward along the longest incoming
/// duration within the non-critical subgraph.
fn feeding_decomposition(
    project: &Project,
    sched: &BaselineSchedule,
    arcs: &BTreeSet<(TaskId, TaskId)>,
    chain: &[TaskId],
    chain_set: &BTreeSet<TaskId>,
) -> Vec<FeedingChain> {
    let chain_pos: BTreeMap<TaskId, usize> =
        chain.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let off_chain: Vec<TaskId> = project
        .task_ids()
        .into_iter()
        .filter(|id| !chain_set.contains(id))
        .collect();
    if off_chain.is_empty() {
        return Vec::new();
    }
    let off_set: BTreeSet<TaskId> = off_chain.iter().copied().collect();

    // Longest cumulative duration of a non-critical path ending at each task.
    let sub_arcs: BTreeSet<(TaskId, TaskId)> = arcs
        .iter()
        .copied()
        .filter(|(u, v)| off_set.contains(u) && off_set.contains(v))
        .collect();
    let order = crate::model::topological_order(&off_chain, &sub_arcs)
        .expect("subgraph of a DAG is a DAG");
    let mut preds_in: BTreeMap<TaskId, Vec<TaskId>> =
        off_chain.iter().map(|&id| (id, Vec::new())).collect();
    for &(u, v) in &sub_arcs {
        preds_in.get_mut(&v).expect("validated").push(u);
    }
    let mut path_len: BTreeMap<TaskId, f64> = BTreeMap::new();
    for &id in &order {
        let best = preds_in[&id]
            .iter()
            .map(|p| path_len[p])
            .fold(0.0_f64, f64::max);
        path_len.insert(id, best + sched.durations_used[&id]);
    }

    // Terminal tasks feed the chain directly; each picks its tightest merge.
    let mut terminals: Vec<(usize, TaskId, TaskId)> = Vec::new(); // (merge pos, task, merge)
    for &t in &off_chain {
        let mut merges: Vec<TaskId> = arcs
            .iter()
            .filter(|&&(u, v)| u == t && chain_set.contains(&v))
            .map(|&(_, v)| v)
            .collect();
        if merges.is_empty() {
            continue;
        }
        merges.sort_by(|a, b| {
            let gap_a = sched.start[a] - sched.finish[&t];
            let gap_b = sched.start[b] - sched.finish[&t];
            gap_a.total_cmp(&gap_b).then(a.cmp(b))
        });
        let merge = merges[0];
        terminals.push((chain_pos[&merge], t, merge));
    }
    terminals.sort();

    let mut assigned: BTreeSet<TaskId> = BTreeSet::new();
    let mut chains = Vec::new();
    for (_, terminal, merge) in terminals {
        if assigned.contains(&terminal) {
            continue;
        }
        let mut path = vec![terminal];
        assigned.insert(terminal);
        let mut cur = terminal;
        loop {
            let next = preds_in[&cur]
                .iter()
                .copied()
                .filter(|p| !assigned.contains(p))
                .max_by(|a, b| path_len[a].total_cmp(&path_len[b]).then(b.cmp(a)));
            match next {
                Some(p) => {
                    assigned.insert(p);
                    path.push(p);
                    cur = p;
                }
                None => break,
            }
        }
        path.reverse();
        chains.push(FeedingChain {
            tasks: path,
            merge_task: merge,
        });
    }
    chains
}

/// A chain plan with buffers sized by one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferedSchedule {
    pub plan: CriticalChainPlan,
    /// Sizes indexed like `plan.feeding_chains`.
    pub feeding_buffers: Vec<f64>,
    pub project_buffer: f64,
    pub buffered_completion: f64,
    pub method: BufferMethod,
}

/// Sizes every feeding buffer and the project buffer by the given method.
/// Buffers consume time only; nothing is re-leveled.
pub fn insert_buffers(
    plan: &CriticalChainPlan,
    project: &Project,
    sched: &BaselineSchedule,
    method: BufferMethod,
    variance: VarianceAssumption,
) -> Result<BufferedSchedule, SchedError> {
    let arcs = sched.combined_arcs(project);
    let tasks_of = |ids: &[TaskId]| -> Vec<&crate::model::Task> {
        ids.iter()
            .map(|&id| project.task(id).expect("plan references project tasks"))
            .collect()
    };

    let chain_buffer = |ids: &[TaskId], arc_count: usize, task_count: usize| -> Result<f64, SchedError> {
        if ids.is_empty() {
            return Ok(0.0);
        }
        match method {
            BufferMethod::Cpm => {
                Ok(cut_paste_buffer(&ChainEstimates::from_tasks(tasks_of(ids))?))
            }
            BufferMethod::Rsem => Ok(rsem_buffer(&ChainEstimates::from_tasks(tasks_of(ids))?)),
            BufferMethod::Apd => {
                let variances: BTreeMap<TaskId, f64> = ids
                    .iter()
                    .map(|&id| {
                        (
                            id,
                            activity_variance(project.task(id).expect("valid id"), variance),
                        )
                    })
                    .collect();
                let sub =
                    FeedingSubnetwork::new(task_count, arc_count, ids.to_vec(), variances)?;
                Ok(apd_buffer(&sub))
            }
        }
    };

    let mut feeding_buffers = Vec::with_capacity(plan.feeding_chains.len());
    for fc in &plan.feeding_chains {
        let set: BTreeSet<TaskId> = fc.tasks.iter().copied().collect();
        // Arcs internal to the sub-network plus its single merge arc.
        let internal = arcs
            .iter()
            .filter(|(u, v)| set.contains(u) && set.contains(v))
            .count();
        feeding_buffers.push(chain_buffer(&fc.tasks, internal + 1, fc.tasks.len())?);
    }

    // Project buffer: same formulas over the critical chain; for APD the
    // density input is the whole network's.
    let project_buffer = chain_buffer(
        &plan.critical_chain,
        arcs.len(),
        project.tasks.len(),
    )?;

    Ok(BufferedSchedule {
        plan: plan.clone(),
        feeding_buffers,
        project_buffer,
        buffered_completion: plan.makespan + project_buffer,
        method,
    })
}
