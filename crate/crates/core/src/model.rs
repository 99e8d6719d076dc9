//! Project network model: tasks, precedence, resources, risk register,
//! structural validation, and the forward/backward critical-path pass.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 1-based task index, matching the Patterson convention.
pub type TaskId = usize;

/// A single activity with its four-point duration estimate and per-resource demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    pub name: String,
    #[serde(rename = "min")]
    pub est_min: f64,
    #[serde(rename = "avg")]
    pub est_avg: f64,
    #[serde(rename = "safe")]
    pub est_safe: f64,
    #[serde(rename = "max")]
    pub est_max: f64,
    /// Resource id -> units consumed per time step while the task runs.
    #[serde(default)]
    pub demand: BTreeMap<String, f64>,
}

impl Task {
    /// Task with all four estimates collapsed to one duration and no demand.
    pub fn fixed(id: TaskId, duration: f64) -> Self {
        Task {
            id,
            name: format!("T{id}"),
            est_min: duration,
            est_avg: duration,
            est_safe: duration,
            est_max: duration,
            demand: BTreeMap::new(),
        }
    }

    /// Safety removed from the task: `safe - avg`.
    pub fn uncertainty(&self) -> f64 {
        self.est_safe - self.est_avg
    }
}

/// Task network with precedence arcs, renewable resource capacities and an
/// optional deadline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub tasks: Vec<Task>,
    /// (predecessor, successor) pairs, in input order.
    pub arcs: Vec<(TaskId, TaskId)>,
    #[serde(default)]
    pub resources: BTreeMap<String, f64>,
    #[serde(default)]
    pub deadline: Option<f64>,
}

impl Project {
    pub fn task(&self, id: TaskId) -> Option<&Task> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn task_ids(&self) -> Vec<TaskId> {
        self.tasks.iter().map(|t| t.id).collect()
    }

    /// Successor adjacency over the precedence arcs (deduplicated, sorted).
    pub fn successors(&self) -> BTreeMap<TaskId, Vec<TaskId>> {
        adjacency(self.task_ids(), self.arcs.iter().copied())
    }

    /// Predecessor adjacency over the precedence arcs (deduplicated, sorted).
    pub fn predecessors(&self) -> BTreeMap<TaskId, Vec<TaskId>> {
        adjacency(self.task_ids(), self.arcs.iter().map(|&(u, v)| (v, u)))
    }

    /// Topological order of task ids (smallest id first among ready tasks).
    pub fn topological_order(&self) -> Result<Vec<TaskId>, ModelError> {
        topological_order(&self.task_ids(), &dedup_arcs(&self.arcs))
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("project serializes")
    }
}

pub(crate) fn adjacency(
    ids: Vec<TaskId>,
    arcs: impl Iterator<Item = (TaskId, TaskId)>,
) -> BTreeMap<TaskId, Vec<TaskId>> {
    let mut map: BTreeMap<TaskId, BTreeSet<TaskId>> =
        ids.into_iter().map(|id| (id, BTreeSet::new())).collect();
    for (u, v) in arcs {
        map.entry(u).or_default().insert(v);
    }
    map.into_iter()
        .map(|(k, v)| (k, v.into_iter().collect()))
        .collect()
}

pub(crate) fn dedup_arcs(arcs: &[(TaskId, TaskId)]) -> BTreeSet<(TaskId, TaskId)> {
    arcs.iter().copied().collect()
}

/// Kahn's algorithm with deterministic smallest-id tie-breaking.
pub(crate) fn topological_order(
    ids: &[TaskId],
    arcs: &BTreeSet<(TaskId, TaskId)>,
) -> Result<Vec<TaskId>, ModelError> {
    let mut indegree: BTreeMap<TaskId, usize> = ids.iter().map(|&id| (id, 0)).collect();
    let mut succ: BTreeMap<TaskId, Vec<TaskId>> = BTreeMap::new();
    for &(u, v) in arcs {
        if let Some(d) = indegree.get_mut(&v) {
            *d += 1;
        }
        succ.entry(u).or_default().push(v);
    }
    let mut ready: BTreeSet<TaskId> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&id, _)| id)
        .collect();
    let mut order = Vec::with_capacity(ids.len());
    while let Some(&next) = ready.iter().next() {
        ready.remove(&next);
        order.push(next);
        if let Some(vs) = succ.get(&next) {
            for &v in vs {
                let d = indegree.get_mut(&v).expect("arc endpoints validated");
                *d -= 1;
                if *d == 0 {
                    ready.insert(v);
                }
            }
        }
    }
    if order.len() != ids.len() {
        let stuck: Vec<TaskId> = ids
            .iter()
            .copied()
            .filter(|id| !order.contains(id))
            .collect();
        return Err(ModelError::Cycle { tasks: stuck });
    }
    Ok(order)
}

/// A risk event from the register with FMEA-style scores on [1, 10].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEvent {
    pub id: String,
    pub description: String,
    /// Occurrence score (10 = most probable).
    pub p: f64,
    /// Cost impact score.
    pub impact_cost: f64,
    /// Time impact score.
    pub impact_time: f64,
    /// Quality impact score.
    pub impact_quality: f64,
    /// Detection score (10 = least detectable).
    pub d: f64,
}

/// Sparse activity-risk factor matrix: (task, risk) -> fraction of the task's
/// min-to-max span that the risk can consume.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RiskFactorMatrix {
    pub entries: BTreeMap<(TaskId, String), f64>,
}

impl RiskFactorMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, task: TaskId, risk: &str, rf: f64) {
        self.entries.insert((task, risk.to_string()), rf);
    }

    pub fn get(&self, task: TaskId, risk: &str) -> f64 {
        self.entries
            .get(&(task, risk.to_string()))
            .copied()
            .unwrap_or(0.0)
    }

    /// Distinct risk ids present in the matrix, sorted.
    pub fn risk_ids(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.entries.keys().map(|(_, r)| r).collect();
        set.into_iter().cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Stable machine-readable codes for validation findings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FindingCode {
    Cycle,
    DanglingArc,
    DemandExceedsCapacity,
    DuplicateArc,
    DuplicateId,
    EstimateOrder,
    IsolatedTask,
    NegativeDemand,
    NegativeEstimate,
    SelfArc,
    UnknownResource,
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FindingCode::Cycle => "CYCLE",
            FindingCode::DanglingArc => "DANGLING_ARC",
            FindingCode::DemandExceedsCapacity => "DEMAND_EXCEEDS_CAPACITY",
            FindingCode::DuplicateArc => "DUPLICATE_ARC",
            FindingCode::DuplicateId => "DUPLICATE_ID",
            FindingCode::EstimateOrder => "ESTIMATE_ORDER",
            FindingCode::IsolatedTask => "ISOLATED_TASK",
            FindingCode::NegativeDemand => "NEGATIVE_DEMAND",
            FindingCode::NegativeEstimate => "NEGATIVE_ESTIMATE",
            FindingCode::SelfArc => "SELF_ARC",
            FindingCode::UnknownResource => "UNKNOWN_RESOURCE",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub code: FindingCode,
    pub message: String,
    pub location: String,
}

/// Outcome of structural validation. Findings are data, not failures.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Checks every structural invariant of the project and reports violations
/// with stable codes, ordered by task id then code.
pub fn validate_project(project: &Project) -> ValidationReport {
    // (anchor task id, code, finding) triples so ordering is deterministic.
    let mut errors: Vec<(TaskId, Finding)> = Vec::new();
    let mut warnings: Vec<(TaskId, Finding)> = Vec::new();

    let mut seen_ids: BTreeSet<TaskId> = BTreeSet::new();
    for task in &project.tasks {
        if !seen_ids.insert(task.id) {
            errors.push((
                task.id,
                Finding {
                    code: FindingCode::DuplicateId,
                    message: format!("task id {} appears more than once", task.id),
                    location: format!("task {}", task.id),
                },
            ));
        }
    }

    for task in &project.tasks {
        let e = [task.est_min, task.est_avg, task.est_safe, task.est_max];
        if e.iter().any(|&v| v < 0.0) {
            errors.push((
                task.id,
                Finding {
                    code: FindingCode::NegativeEstimate,
                    message: format!(
                        "task {} has a negative estimate (min={}, avg={}, safe={}, max={})",
                        task.id, e[0], e[1], e[2], e[3]
                    ),
                    location: format!("task {}", task.id),
                },
            ));
        }
        if !(e[0] <= e[1] && e[1] <= e[2] && e[2] <= e[3]) {
            errors.push((
                task.id,
                Finding {
                    code: FindingCode::EstimateOrder,
                    message: format!(
                        "task {} estimates must satisfy min <= avg <= safe <= max (got {}, {}, {}, {})",
                        task.id, e[0], e[1], e[2], e[3]
                    ),
                    location: format!("task {}", task.id),
                },
            ));
        }
        for (res, &units) in &task.demand {
            if units < 0.0 {
                errors.push((
                    task.id,
                    Finding {
                        code: FindingCode::NegativeDemand,
                        message: format!("task {} demands {units} of {res}", task.id),
                        location: format!("task {}", task.id),
                    },
                ));
            }
            match project.resources.get(res) {
                None => errors.push((
                    task.id,
                    Finding {
                        code: FindingCode::UnknownResource,
                        message: format!("task {} demands undeclared resource {res}", task.id),
                        location: format!("task {}", task.id),
                    },
                )),
                Some(&cap) if units > cap => errors.push((
                    task.id,
                    Finding {
                        code: FindingCode::DemandExceedsCapacity,
                        message: format!(
                            "task {} demands {units} of {res} but capacity is {cap}",
                            task.id
                        ),
                        location: format!("task {}", task.id),
                    },
                )),
                _ => {}
            }
        }
    }

    let mut seen_arcs: BTreeSet<(TaskId, TaskId)> = BTreeSet::new();
    for &(u, v) in &project.arcs {
        if u == v {
            errors.push((
                u,
                Finding {
                    code: FindingCode::SelfArc,
                    message: format!("task {u} depends on itself"),
                    location: format!("arc ({u},{v})"),
                },
            ));
            continue;
        }
        for end in [u, v] {
            if !seen_ids.contains(&end) {
                errors.push((
                    end,
                    Finding {
                        code: FindingCode::DanglingArc,
                        message: format!("arc ({u},{v}) references unknown task {end}"),
                        location: format!("arc ({u},{v})"),
                    },
                ));
            }
        }
        if !seen_arcs.insert((u, v)) {
            errors.push((
                u,
                Finding {
                    code: FindingCode::DuplicateArc,
                    message: format!("arc ({u},{v}) is listed more than once"),
                    location: format!("arc ({u},{v})"),
                },
            ));
        }
    }

    // Cycle check over the well-formed arcs only.
    let valid_arcs: BTreeSet<(TaskId, TaskId)> = seen_arcs
        .iter()
        .copied()
        .filter(|&(u, v)| u != v && seen_ids.contains(&u) && seen_ids.contains(&v))
        .collect();
    for scc in nontrivial_sccs(&seen_ids, &valid_arcs) {
        let listed: Vec<String> = scc.iter().map(|id| id.to_string()).collect();
        errors.push((
            scc[0],
            Finding {
                code: FindingCode::Cycle,
                message: format!("tasks {} form a dependency cycle", listed.join(",")),
                location: format!("tasks {}", listed.join(",")),
            },
        ));
    }

    if project.tasks.len() > 1 {
        let mut touched: BTreeSet<TaskId> = BTreeSet::new();
        for &(u, v) in &project.arcs {
            touched.insert(u);
            touched.insert(v);
        }
        for task in &project.tasks {
            if !touched.contains(&task.id) {
                warnings.push((
                    task.id,
                    Finding {
                        code: FindingCode::IsolatedTask,
                        message: format!("task {} has no precedence relation", task.id),
                        location: format!("task {}", task.id),
                    },
                ));
            }
        }
    }

    let sort = |v: &mut Vec<(TaskId, Finding)>| {
        v.sort_by(|a, b| {
            (a.0, a.1.code, &a.1.location).cmp(&(b.0, b.1.code, &b.1.location))
        })
    };
    sort(&mut errors);
    sort(&mut warnings);
    ValidationReport {
        errors: errors.into_iter().map(|(_, f)| f).collect(),
        warnings: warnings.into_iter().map(|(_, f)| f).collect(),
    }
}

/// Strongly connected components with more than one member, each sorted,
/// ordered by smallest member. Tarjan over the (id, arc) graph.
fn nontrivial_sccs(ids: &BTreeSet<TaskId>, arcs: &BTreeSet<(TaskId, TaskId)>) -> Vec<Vec<TaskId>> {
    let index_of: BTreeMap<TaskId, usize> =
        ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let nodes: Vec<TaskId> = ids.iter().copied().collect();
    let n = nodes.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in arcs {
        succ[index_of[&u]].push(index_of[&v]);
    }

    let mut index = vec![usize::MAX; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut counter = 0usize;
    let mut sccs: Vec<Vec<TaskId>> = Vec::new();

    // Iterative Tarjan to avoid recursion depth limits on long chains.
    enum Frame {
        Enter(usize),
        Resume(usize, usize),
    }
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work = vec![Frame::Enter(root)];
        while let Some(frame) = work.pop() {
            match frame {
                Frame::Enter(v) => {
                    index[v] = counter;
                    lowlink[v] = counter;
                    counter += 1;
                    stack.push(v);
                    on_stack[v] = true;
                    work.push(Frame::Resume(v, 0));
                }
                Frame::Resume(v, mut i) => {
                    let mut descended = false;
                    while i < succ[v].len() {
                        let w = succ[v][i];
                        i += 1;
                        if index[w] == usize::MAX {
                            work.push(Frame::Resume(v, i));
                            work.push(Frame::Enter(w));
                            descended = true;
                            break;
                        } else if on_stack[w] {
                            lowlink[v] = lowlink[v].min(index[w]);
                        }
                    }
                    if descended {
                        continue;
                    }
                    if lowlink[v] == index[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("scc stack");
                            on_stack[w] = false;
                            comp.push(nodes[w]);
                            if w == v {
                                break;
                            }
                        }
                        if comp.len() > 1 {
                            comp.sort_unstable();
                            sccs.push(comp);
                        }
                    }
                    // Propagate lowlink to parent Resume frame if present.
                    if let Some(Frame::Resume(p, _)) = work.last() {
                        let p = *p;
                        lowlink[p] = lowlink[p].min(lowlink[v]);
                    }
                }
            }
        }
    }
    sccs.sort_by_key(|c| c[0]);
    sccs
}

/// Early/late times and slack for one task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpmTimes {
    pub early_start: f64,
    pub early_finish: f64,
    pub late_start: f64,
    pub late_finish: f64,
    pub slack: f64,
}

/// Forward/backward pass over the precedence DAG with the given durations.
/// Late times are anchored at the project early finish.
pub fn cpm_pass(
    project: &Project,
    durations: &BTreeMap<TaskId, f64>,
) -> Result<BTreeMap<TaskId, CpmTimes>, ModelError> {
    cpm_over_arcs(&project.task_ids(), &dedup_arcs(&project.arcs), durations)
}

/// Same pass over an explicit arc set (scheduler and simulation run it over
/// precedence plus resource links).
pub fn cpm_over_arcs(
    ids: &[TaskId],
    arcs: &BTreeSet<(TaskId, TaskId)>,
    durations: &BTreeMap<TaskId, f64>,
) -> Result<BTreeMap<TaskId, CpmTimes>, ModelError> {
    for &id in ids {
        match durations.get(&id) {
            None => return Err(ModelError::MissingDuration(id)),
            Some(d) if *d < 0.0 => return Err(ModelError::NegativeDuration(id)),
            _ => {}
        }
    }
    let order = topological_order(ids, arcs)?;
    let mut preds: BTreeMap<TaskId, Vec<TaskId>> = ids.iter().map(|&id| (id, vec![])).collect();
    let mut succs: BTreeMap<TaskId, Vec<TaskId>> = ids.iter().map(|&id| (id, vec![])).collect();
    for &(u, v) in arcs {
        preds.get_mut(&v).expect("validated").push(u);
        succs.get_mut(&u).expect("validated").push(v);
    }

    let mut early_start: BTreeMap<TaskId, f64> = BTreeMap::new();
    let mut early_finish: BTreeMap<TaskId, f64> = BTreeMap::new();
    for &id in &order {
        let es = preds[&id]
            .iter()
            .map(|p| early_finish[p])
            .fold(0.0_f64, f64::max);
        early_start.insert(id, es);
        early_finish.insert(id, es + durations[&id]);
    }
    let makespan = early_finish.values().copied().fold(0.0_f64, f64::max);

    let mut late_finish: BTreeMap<TaskId, f64> = BTreeMap::new();
    let mut late_start: BTreeMap<TaskId, f64> = BTreeMap::new();
    for &id in order.iter().rev() {
        let lf = succs[&id]
            .iter()
            .map(|s| late_start[s])
            .fold(makespan, f64::min);
        late_finish.insert(id, lf);
        late_start.insert(id, lf - durations[&id]);
    }

    let eps = 1e-9 * makespan.max(1.0);
    let mut out = BTreeMap::new();
    for &id in ids {
        let mut slack = late_start[&id] - early_start[&id];
        if slack < 0.0 && slack > -eps {
            slack = 0.0; // rounding noise from the backward subtraction
        }
        out.insert(
            id,
            CpmTimes {
                early_start: early_start[&id],
                early_finish: early_finish[&id],
                late_start: late_start[&id],
                late_finish: late_finish[&id],
                slack,
            },
        );
    }
    Ok(out)
}

/// Makespan implied by a CPM table.
pub fn cpm_makespan(times: &BTreeMap<TaskId, CpmTimes>) -> f64 {
    times.values().map(|t| t.early_finish).fold(0.0, f64::max)
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("dependency cycle involving tasks {tasks:?}")]
    Cycle { tasks: Vec<TaskId> },
    #[error("no duration supplied for task {0}")]
    MissingDuration(TaskId),
    #[error("negative duration for task {0}")]
    NegativeDuration(TaskId),
    #[error("unknown task {0}")]
    UnknownTask(TaskId),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(durations: &[f64]) -> Project {
        let tasks: Vec<Task> = durations
            .iter()
            .enumerate()
            .map(|(i, &d)| Task::fixed(i + 1, d))
            .collect();
        let arcs = (1..durations.len()).map(|i| (i, i + 1)).collect();
        Project {
            tasks,
            arcs,
            resources: BTreeMap::new(),
            deadline: None,
        }
    }

    fn durations_of(p: &Project) -> BTreeMap<TaskId, f64> {
        p.tasks.iter().map(|t| (t.id, t.est_avg)).collect()
    }

    /// Independent oracle: longest source-to-sink path by full enumeration.
    pub(crate) fn brute_force_makespan(
        ids: &[TaskId],
        arcs: &BTreeSet<(TaskId, TaskId)>,
        durations: &BTreeMap<TaskId, f64>,
    ) -> f64 {
        let succs = adjacency(ids.to_vec(), arcs.iter().copied());
        let mut best = 0.0_f64;
        fn walk(
            id: TaskId,
            acc: f64,
            succs: &BTreeMap<TaskId, Vec<TaskId>>,
            durations: &BTreeMap<TaskId, f64>,
            best: &mut f64,
        ) {
            let here = acc + durations[&id];
            if succs[&id].is_empty() {
                if here > *best {
                    *best = here;
                }
                return;
            }
            for &s in &succs[&id] {
                walk(s, here, succs, durations, best);
            }
        }
        let has_pred: BTreeSet<TaskId> = arcs.iter().map(|&(_, v)| v).collect();
        for &id in ids {
            if !has_pred.contains(&id) {
                walk(id, 0.0, &succs, durations, &mut best);
            }
        }
        best
    }

    #[test]
    fn well_formed_series_has_no_errors() {
        let p = series(&[1.0, 2.0, 3.0]);
        let report = validate_project(&p);
        assert!(report.errors.is_empty(), "{:?}", report.errors);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn two_task_cycle_is_reported() {
        let mut p = series(&[1.0, 1.0]);
        p.arcs = vec![(1, 2), (2, 1)];
        let report = validate_project(&p);
        let cycle: Vec<&Finding> = report
            .errors
            .iter()
            .filter(|f| f.code == FindingCode::Cycle)
            .collect();
        assert_eq!(cycle.len(), 1);
        assert_eq!(cycle[0].location, "tasks 1,2");
    }

    #[test]
    fn estimate_order_violation_is_reported_at_task() {
        let mut p = series(&[1.0]);
        p.tasks[0].est_avg = 5.0;
        p.tasks[0].est_safe = 4.0;
        p.tasks[0].est_min = 1.0;
        p.tasks[0].est_max = 9.0;
        let report = validate_project(&p);
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].code, FindingCode::EstimateOrder);
        assert_eq!(report.errors[0].location, "task 1");
    }

    #[test]
    fn disjoint_cycles_reported_separately() {
        let mut p = series(&[1.0; 6]);
        p.arcs = vec![(1, 2), (2, 3), (3, 1), (3, 4), (5, 6), (6, 5)];
        let report = validate_project(&p);
        let cycles: Vec<&str> = report
            .errors
            .iter()
            .filter(|f| f.code == FindingCode::Cycle)
            .map(|f| f.location.as_str())
            .collect();
        assert_eq!(cycles, vec!["tasks 1,2,3", "tasks 5,6"]);
    }

    #[test]
    fn dangling_self_and_duplicate_arcs() {
        let mut p = series(&[1.0, 1.0]);
        p.arcs = vec![(1, 2), (1, 2), (2, 2), (1, 9)];
        let report = validate_project(&p);
        let codes: Vec<FindingCode> = report.errors.iter().map(|f| f.code).collect();
        assert!(codes.contains(&FindingCode::DuplicateArc));
        assert!(codes.contains(&FindingCode::SelfArc));
        assert!(codes.contains(&FindingCode::DanglingArc));
    }

    #[test]
    fn demand_checks() {
        let mut p = series(&[1.0, 1.0]);
        p.resources.insert("R1".into(), 2.0);
        p.tasks[0].demand.insert("R1".into(), 3.0);
        p.tasks[1].demand.insert("R9".into(), 1.0);
        let report = validate_project(&p);
        let codes: Vec<FindingCode> = report.errors.iter().map(|f| f.code).collect();
        assert_eq!(
            codes,
            vec![
                FindingCode::DemandExceedsCapacity,
                FindingCode::UnknownResource
            ]
        );
    }

    #[test]
    fn findings_sorted_by_task_then_code() {
        let mut p = series(&[1.0, 1.0, 1.0]);
        p.tasks[0].est_avg = 9.0; // avg above safe
        p.tasks[0].est_safe = 2.0;
        p.tasks[2].est_min = -1.0; // negative, and safe above max
        p.tasks[2].est_max = 0.5;
        let report = validate_project(&p);
        let keys: Vec<(&str, FindingCode)> = report
            .errors
            .iter()
            .map(|f| (f.location.as_str(), f.code))
            .collect();
        assert_eq!(
            keys,
            vec![
                ("task 1", FindingCode::EstimateOrder),
                ("task 3", FindingCode::EstimateOrder),
                ("task 3", FindingCode::NegativeEstimate),
            ]
        );
    }

    #[test]
    fn cpm_series() {
        let p = series(&[3.0, 4.0]);
        let t = cpm_pass(&p, &durations_of(&p)).unwrap();
        assert_eq!(cpm_makespan(&t), 7.0);
        assert_eq!(t[&1].slack, 0.0);
        assert_eq!(t[&2].slack, 0.0);
    }

    #[test]
    fn cpm_diamond_short_branch_slack() {
        // 1 -> {2 (5), 3 (3)} -> 4, unit ends
        let tasks = vec![
            Task::fixed(1, 1.0),
            Task::fixed(2, 5.0),
            Task::fixed(3, 3.0),
            Task::fixed(4, 1.0),
        ];
        let p = Project {
            tasks,
            arcs: vec![(1, 2), (1, 3), (2, 4), (3, 4)],
            resources: BTreeMap::new(),
            deadline: None,
        };
        let t = cpm_pass(&p, &durations_of(&p)).unwrap();
        assert_eq!(cpm_makespan(&t), 7.0);
        assert_eq!(t[&3].slack, 2.0);
        assert_eq!(t[&2].slack, 0.0);
    }

    #[test]
    fn cpm_all_zero_durations() {
        let p = series(&[0.0, 0.0, 0.0]);
        let t = cpm_pass(&p, &durations_of(&p)).unwrap();
        for times in t.values() {
            assert_eq!(times.early_start, 0.0);
            assert_eq!(times.late_finish, 0.0);
            assert_eq!(times.slack, 0.0);
        }
    }

    #[test]
    fn cpm_missing_duration() {
        let p = series(&[1.0, 1.0]);
        let mut d = durations_of(&p);
        d.remove(&2);
        assert_eq!(cpm_pass(&p, &d), Err(ModelError::MissingDuration(2)));
    }

    #[test]
    fn cpm_matches_brute_force_on_random_dags() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let n = rng.random_range(2..=12);
            let ids: Vec<TaskId> = (1..=n).collect();
            let mut arcs = BTreeSet::new();
            for v in 2..=n {
                // at least one predecessor keeps the DAG weakly connected
                let u = rng.random_range(1..v);
                arcs.insert((u, v));
            }
            for _ in 0..n {
                let u = rng.random_range(1..=n);
                let v = rng.random_range(1..=n);
                if u < v {
                    arcs.insert((u, v));
                }
            }
            let durations: BTreeMap<TaskId, f64> = ids
                .iter()
                .map(|&id| (id, rng.random_range(0..10) as f64))
                .collect();
            let times = cpm_over_arcs(&ids, &arcs, &durations).unwrap();
            let expected = brute_force_makespan(&ids, &arcs, &durations);
            assert_eq!(cpm_makespan(&times), expected);
            for t in times.values() {
                assert!(t.slack >= 0.0);
            }
        }
    }

    #[test]
    fn makespan_invariant_under_task_list_permutation() {
        let p = series(&[2.0, 5.0, 1.0, 4.0]);
        let t = cpm_pass(&p, &durations_of(&p)).unwrap();
        let mut shuffled = p.clone();
        shuffled.tasks.reverse();
        let t2 = cpm_pass(&shuffled, &durations_of(&shuffled)).unwrap();
        assert_eq!(cpm_makespan(&t), cpm_makespan(&t2));
    }

    #[test]
    fn zero_slack_tasks_form_a_path() {
        let p = series(&[2.0, 3.0, 4.0]);
        let t = cpm_pass(&p, &durations_of(&p)).unwrap();
        let critical: Vec<TaskId> = t
            .iter()
            .filter(|(_, v)| v.slack == 0.0)
            .map(|(&k, _)| k)
            .collect();
        assert_eq!(critical, vec![1, 2, 3]);
    }

    #[test]
    fn project_json_round_trip() {
        let mut p = series(&[1.5, 2.5]);
        p.resources.insert("R1".into(), 4.0);
        p.deadline = Some(30.0);
        p.tasks[0].demand.insert("R1".into(), 2.0);
        let text = p.to_json();
        let back = Project::from_json(&text).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn project_json_matches_documented_shape() {
        let text = r#"{"tasks":[{"id":1,"name":"a","min":1,"avg":2,"safe":3,"max":4,"demand":{"R1":2}}],"arcs":[[1,2]],"resources":{"R1":4},"deadline":30}"#;
        let p = Project::from_json(text).unwrap();
        assert_eq!(p.tasks[0].est_safe, 3.0);
        assert_eq!(p.arcs, vec![(1, 2)]);
        assert_eq!(p.deadline, Some(30.0));
    }
}
