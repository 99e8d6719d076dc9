//! Acceptance suite: one test per engine-level criterion, each printing a
//! pass/fail line. The pipeline determinism criterion lives with the CLI
//! crate, next to the binary it exercises.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ccpm_core::*;

fn criterion(number: u8, name: &str, check: impl FnOnce() -> Result<String, String>) {
    match check() {
        Ok(detail) => println!("criterion {number} ({name}): PASS {detail}"),
        Err(msg) => {
            println!("criterion {number} ({name}): FAIL {msg}");
            panic!("criterion {number} ({name}) failed: {msg}");
        }
    }
}

fn budget(start: Instant, limit: Duration) -> Result<(), String> {
    let elapsed = start.elapsed();
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("runtime {elapsed:?} exceeded budget {limit:?}"))
    }
}

fn fixed_task(id: TaskId, avg: f64, safe: f64) -> Task {
    Task {
        id,
        name: format!("T{id}"),
        est_min: avg,
        est_avg: avg,
        est_safe: safe,
        est_max: safe,
        demand: BTreeMap::new(),
    }
}

/// Random project network: a full series spine (handoff-style project) with
/// extra forward arcs up to the requested density, aggressive estimates
/// uniform on [2,10] and safe estimates 1.5-2x the aggressive ones.
fn random_network(rng: &mut ChaCha8Rng) -> Project {
    let n: usize = rng.random_range(10..=30);
    let density = rng.random_range(1.2..=2.0);
    let tasks: Vec<Task> = (1..=n)
        .map(|id| {
            let avg = rng.random_range(2.0..=10.0);
            let safe = avg * rng.random_range(1.5..=2.0);
            fixed_task(id, avg, safe)
        })
        .collect();
    let mut arcs: Vec<(TaskId, TaskId)> = (1..n).map(|i| (i, i + 1)).collect();
    let mut seen: BTreeSet<(TaskId, TaskId)> = arcs.iter().copied().collect();
    let target = (density * n as f64).round() as usize;
    let mut guard = 0;
    while arcs.len() < target && guard < 10_000 {
        guard += 1;
        let u = rng.random_range(1..n);
        let v = rng.random_range(u + 1..=n);
        if seen.insert((u, v)) {
            arcs.push((u, v));
        }
    }
    Project {
        tasks,
        arcs,
        resources: BTreeMap::new(),
        deadline: None,
    }
}

#[test]
fn acceptance_1_buffer_method_comparison() {
    criterion(1, "buffer method comparison", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut wins = 0usize;
        let mut ratios = Vec::new();
        const INSTANCES: usize = 30;
        for _ in 0..INSTANCES {
            let p = random_network(&mut rng);
            let sched = build_baseline(&p).map_err(|e| e.to_string())?;
            let plan = identify_critical_chain(&p, &sched);
            let completion = |method| {
                insert_buffers(&plan, &p, &sched, method, VarianceAssumption::RsemHalfU)
                    .map(|b| b.buffered_completion)
                    .map_err(|e| e.to_string())
            };
            let cpm = completion(BufferMethod::Cpm)?;
            let apd = completion(BufferMethod::Apd)?;
            if cpm >= apd {
                wins += 1;
            }
            ratios.push(cpm / apd);
        }
        let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let win_rate = wins as f64 / INSTANCES as f64;
        if win_rate < 0.90 {
            return Err(format!(
                "cut-and-paste completion >= adaptive on only {wins}/{INSTANCES} instances"
            ));
        }
        if !(1.05..=1.50).contains(&mean_ratio) {
            return Err(format!("mean completion ratio {mean_ratio:.4} outside [1.05, 1.50]"));
        }
        budget(start, Duration::from_secs(10))?;
        Ok(format!(
            "(win rate {win_rate:.2}, mean ratio {mean_ratio:.4})"
        ))
    });
}

#[test]
fn acceptance_2_buffer_oracle_equivalence() {
    criterion(2, "buffer sizing oracle equivalence", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in 0..100 {
            let len = rng.random_range(1..=12);
            let pairs: Vec<(f64, f64)> = (0..len)
                .map(|_| {
                    let avg = rng.random_range(1.0..=10.0);
                    (avg + rng.random_range(0.0..=8.0), avg)
                })
                .collect();
            let us: Vec<f64> = pairs.iter().map(|&(s, a)| s - a).collect();
            let chain = ChainEstimates::new(pairs).map_err(|e| e.to_string())?;

            // One-line oracles, coded apart from the implementation.
            let cpm_oracle = 0.5 * us.iter().sum::<f64>();
            let rsem_oracle = us.iter().map(|u| u * u).sum::<f64>().sqrt();
            let cpm = cut_paste_buffer(&chain);
            let rsem = rsem_buffer(&chain);
            if (cpm - cpm_oracle).abs() > 1e-12 {
                return Err(format!("case {case}: cut-and-paste {cpm} != oracle {cpm_oracle}"));
            }
            if (rsem - rsem_oracle).abs() > 1e-12 {
                return Err(format!("case {case}: rsem {rsem} != oracle {rsem_oracle}"));
            }

            let path: Vec<TaskId> = (1..=len).collect();
            let vas: BTreeMap<TaskId, f64> = path
                .iter()
                .map(|&id| (id, rng.random_range(0.0..=9.0)))
                .collect();
            let t_n = len + rng.random_range(0..=4);
            let t_pr = rng.random_range(0..=2 * t_n);
            let apd_oracle = (1.0 + t_pr as f64 / t_n as f64)
                * path.iter().map(|id| vas[id]).sum::<f64>().sqrt();
            let sub = FeedingSubnetwork::new(t_n, t_pr, path, vas).map_err(|e| e.to_string())?;
            let apd = apd_buffer(&sub);
            if (apd - apd_oracle).abs() > 1e-12 {
                return Err(format!("case {case}: apd {apd} != oracle {apd_oracle}"));
            }
        }
        budget(start, Duration::from_secs(1))?;
        Ok(String::new())
    });
}

#[test]
fn acceptance_3_monte_carlo_analytic_mean() {
    criterion(3, "Monte Carlo analytic mean", || {
        let start = Instant::now();
        let mut task = fixed_task(1, 10.0, 20.0);
        task.est_min = 10.0;
        task.est_max = 20.0;
        let p = Project {
            tasks: vec![task],
            arcs: vec![],
            resources: BTreeMap::new(),
            deadline: None,
        };
        let mut matrix = RiskFactorMatrix::new();
        matrix.insert(1, "R1", 0.5);
        let baseline = build_baseline(&p).map_err(|e| e.to_string())?;
        let result = run_simulation(
            &p,
            &matrix,
            &baseline,
            &SimConfig {
                replications: 100_000,
                seed: 42,
                deadline: None,
            },
        )
        .map_err(|e| e.to_string())?;
        let expected = 12.5;
        let tolerance = expected * 0.005;
        if (result.mean - expected).abs() > tolerance {
            return Err(format!(
                "mean {} deviates from {expected} by more than 0.5%",
                result.mean
            ));
        }
        budget(start, Duration::from_secs(2))?;
        Ok(format!("(mean {:.4})", result.mean))
    });
}

#[test]
fn acceptance_4_monte_carlo_degeneracy() {
    criterion(4, "Monte Carlo degeneracy", || {
        let tasks = vec![
            fixed_task(1, 2.0, 4.0),
            fixed_task(2, 5.0, 9.0),
            fixed_task(3, 3.0, 5.0),
            fixed_task(4, 1.0, 2.0),
        ];
        // est_min = est_avg here, so the min-duration CPM makespan is the
        // baseline makespan as well.
        let p = Project {
            tasks,
            arcs: vec![(1, 2), (1, 3), (2, 4), (3, 4)],
            resources: BTreeMap::new(),
            deadline: None,
        };
        let baseline = build_baseline(&p).map_err(|e| e.to_string())?;
        let durations_min: BTreeMap<TaskId, f64> =
            p.tasks.iter().map(|t| (t.id, t.est_min)).collect();
        let expected = cpm_makespan(&cpm_pass(&p, &durations_min).map_err(|e| e.to_string())?);

        let result = run_simulation(
            &p,
            &RiskFactorMatrix::new(),
            &baseline,
            &SimConfig {
                replications: 5_000,
                seed: 3,
                deadline: None,
            },
        )
        .map_err(|e| e.to_string())?;
        if result.std != 0.0 {
            return Err(format!("variance is {} not exactly 0", result.std * result.std));
        }
        if result.makespans.iter().any(|&m| m != expected) {
            return Err(format!("some replication differs from the CPM makespan {expected}"));
        }
        Ok(format!("(all replications at {expected})"))
    });
}

#[test]
fn acceptance_6_fault_tree_brute_force() {
    criterion(6, "fault/event tree oracles", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(64);

        // Random tree with an exact leaf count.
        fn random_tree(
            rng: &mut ChaCha8Rng,
            leaves: usize,
            depth: usize,
            counter: &mut usize,
        ) -> FaultTree {
            if leaves == 1 {
                if depth < 3 && rng.random_range(0..100) < 20 {
                    // Occasional single-child gate keeps that shape exercised.
                    let op = if rng.random::<bool>() { GateOp::And } else { GateOp::Or };
                    return FaultTree::gate(op, vec![random_tree(rng, 1, depth + 1, counter)]);
                }
                *counter += 1;
                return FaultTree::event(&format!("e{counter}"), rng.random::<f64>());
            }
            let op = if rng.random::<bool>() { GateOp::And } else { GateOp::Or };
            let parts = rng.random_range(2..=leaves.min(3));
            let mut remaining = leaves;
            let mut children = Vec::with_capacity(parts);
            for i in 0..parts {
                let slots_left = parts - i - 1;
                let take = if slots_left == 0 {
                    remaining
                } else {
                    rng.random_range(1..=remaining - slots_left)
                };
                remaining -= take;
                children.push(random_tree(rng, take, depth + 1, counter));
            }
            FaultTree::gate(op, children)
        }

        fn leaves(tree: &FaultTree) -> Vec<f64> {
            match tree {
                FaultTree::Event { probability, .. } => vec![*probability],
                FaultTree::Gate { children, .. } => {
                    children.iter().flat_map(leaves).collect()
                }
            }
        }

        fn holds(tree: &FaultTree, occurred: &[bool], cursor: &mut usize) -> bool {
            match tree {
                FaultTree::Event { .. } => {
                    let v = occurred[*cursor];
                    *cursor += 1;
                    v
                }
                FaultTree::Gate { gate, children, .. } => {
                    let kids: Vec<bool> = children
                        .iter()
                        .map(|c| holds(c, occurred, cursor))
                        .collect();
                    match gate {
                        GateOp::And => kids.iter().all(|&b| b),
                        GateOp::Or => kids.iter().any(|&b| b),
                    }
                }
            }
        }

        for case in 0..50 {
            let leaf_count = rng.random_range(1..=10);
            let tree = random_tree(&mut rng, leaf_count, 0, &mut 0);
            let ps = leaves(&tree);
            let l = ps.len();
            assert!(l <= 10);
            let mut oracle = 0.0_f64;
            for mask in 0..(1u64 << l) {
                let occurred: Vec<bool> = (0..l).map(|i| mask >> i & 1 == 1).collect();
                let weight: f64 = ps
                    .iter()
                    .enumerate()
                    .map(|(i, p)| if occurred[i] { *p } else { 1.0 - p })
                    .product();
                if holds(&tree, &occurred, &mut 0) {
                    oracle += weight;
                }
            }
            let fast = evaluate_fault_tree(&tree).map_err(|e| e.to_string())?;
            if (fast - oracle).abs() > 1e-12 {
                return Err(format!("case {case}: gate evaluation {fast} != enumeration {oracle}"));
            }
        }

        for k in 0..=12usize {
            let initiating = rng.random::<f64>();
            let tree = EventTree {
                initiating_probability: initiating,
                strategies: (0..k)
                    .map(|i| Strategy {
                        name: format!("s{i}"),
                        failure_probability: rng.random::<f64>(),
                    })
                    .collect(),
            };
            let paths = evaluate_event_tree(&tree).map_err(|e| e.to_string())?;
            let total: f64 = paths.iter().map(|(_, p)| p).sum();
            if (total - initiating).abs() > 1e-9 {
                return Err(format!(
                    "k={k}: path probabilities sum to {total}, expected {initiating}"
                ));
            }
        }
        budget(start, Duration::from_secs(10))?;
        Ok(String::new())
    });
}

#[test]
fn acceptance_7_fuzzy_monotonicity_sweep() {
    criterion(7, "fuzzy monotonicity sweep", || {
        let start = Instant::now();
        let rb = default_rule_base();
        let grid: Vec<f64> = (0..19).map(|i| 1.0 + 0.5 * i as f64).collect();
        let g = grid.len();
        let mut values = vec![0.0_f64; g * g * g];
        for (i, &p) in grid.iter().enumerate() {
            for (j, &ai) in grid.iter().enumerate() {
                for (k, &d) in grid.iter().enumerate() {
                    values[(i * g + j) * g + k] =
                        risk_criticality(p, ai, d, &rb).map_err(|e| e.to_string())?;
                }
            }
        }
        // Differences below float rounding noise are not violations; genuine
        // ones (a non-monotone engine) show up orders of magnitude larger.
        const NOISE: f64 = 1e-12;
        let mut violations = 0usize;
        let idx = |i: usize, j: usize, k: usize| (i * g + j) * g + k;
        for i in 0..g {
            for j in 0..g {
                for k in 0..g {
                    let here = values[idx(i, j, k)];
                    if i + 1 < g && values[idx(i + 1, j, k)] < here - NOISE {
                        violations += 1;
                    }
                    if j + 1 < g && values[idx(i, j + 1, k)] < here - NOISE {
                        violations += 1;
                    }
                    if k + 1 < g && values[idx(i, j, k + 1)] < here - NOISE {
                        violations += 1;
                    }
                }
            }
        }
        if violations > 0 {
            return Err(format!("{violations} monotonicity violations over the grid"));
        }
        budget(start, Duration::from_secs(30))?;
        Ok(format!("({} grid points)", g * g * g))
    });
}

#[test]
fn acceptance_8_symmetry_fixed_point() {
    criterion(8, "criticality symmetry fixed point", || {
        let rb = default_rule_base();
        let rcn = risk_criticality(5.5, 5.5, 5.5, &rb).map_err(|e| e.to_string())?;
        if (rcn - 5.5).abs() > 0.05 {
            return Err(format!("rcn(5.5, 5.5, 5.5) = {rcn}, expected 5.5 +- 0.05"));
        }
        Ok(format!("(rcn {rcn:.6})"))
    });
}

#[test]
fn acceptance_9_scheduler_audit() {
    criterion(9, "scheduler capacity audit", || {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for case in 0..50 {
            let n = rng.random_range(2..=10);
            let cap = rng.random_range(1..=3) as f64;
            let tasks: Vec<Task> = (1..=n)
                .map(|id| {
                    let mut t = fixed_task(id, rng.random_range(1..=8) as f64, 0.0);
                    t.est_safe = t.est_avg;
                    t.est_max = t.est_avg;
                    let units = rng.random_range(0..=cap as u32) as f64;
                    if units > 0.0 {
                        t.demand.insert("R1".into(), units);
                    }
                    t
                })
                .collect();
            let mut arcs = Vec::new();
            for v in 2..=n {
                if rng.random_range(0..100) < 55 {
                    arcs.push((rng.random_range(1..v), v));
                }
            }
            let mut project = Project {
                tasks,
                arcs,
                resources: BTreeMap::new(),
                deadline: None,
            };
            project.resources.insert("R1".into(), cap);

            let sched = build_baseline(&project).map_err(|e| e.to_string())?;
            // Time-sweep audit at every start/finish event.
            let mut events: Vec<f64> = sched.start.values().copied().collect();
            events.extend(sched.finish.values().copied());
            for &e in &events {
                let used: f64 = project
                    .tasks
                    .iter()
                    .filter(|t| sched.start[&t.id] <= e && e < sched.finish[&t.id])
                    .map(|t| t.demand.get("R1").copied().unwrap_or(0.0))
                    .sum();
                if used > cap {
                    return Err(format!("case {case}: capacity violated at t={e}: {used} > {cap}"));
                }
            }

            // Unbounded capacity: the chain must be a CPM-critical path.
            let mut unbounded = project.clone();
            unbounded.resources.insert("R1".into(), 1e9);
            let free = build_baseline(&unbounded).map_err(|e| e.to_string())?;
            let plan = identify_critical_chain(&unbounded, &free);
            let chain_length: f64 = plan
                .critical_chain
                .iter()
                .map(|id| free.durations_used[id])
                .sum();
            let durations: BTreeMap<TaskId, f64> = unbounded
                .tasks
                .iter()
                .map(|t| (t.id, t.est_avg))
                .collect();
            let cpm = cpm_makespan(&cpm_pass(&unbounded, &durations).map_err(|e| e.to_string())?);
            if chain_length != cpm {
                return Err(format!(
                    "case {case}: chain length {chain_length} != CPM makespan {cpm}"
                ));
            }
        }
        Ok(String::new())
    });
}

#[test]
fn acceptance_10_cpm_oracle() {
    criterion(10, "CPM longest-path oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(1010);

        // Independent oracle: enumerate every path from every source.
        fn longest_path(p: &Project, durations: &BTreeMap<TaskId, f64>) -> f64 {
            let succs = p.successors();
            let has_pred: BTreeSet<TaskId> = p.arcs.iter().map(|&(_, v)| v).collect();
            fn walk(
                id: TaskId,
                acc: f64,
                succs: &BTreeMap<TaskId, Vec<TaskId>>,
                durations: &BTreeMap<TaskId, f64>,
                best: &mut f64,
            ) {
                let here = acc + durations[&id];
                if here > *best {
                    *best = here;
                }
                for &s in &succs[&id] {
                    walk(s, here, succs, durations, best);
                }
            }
            let mut best = 0.0_f64;
            for t in &p.tasks {
                if !has_pred.contains(&t.id) {
                    walk(t.id, 0.0, &succs, durations, &mut best);
                }
            }
            best
        }

        for case in 0..100 {
            let n = rng.random_range(2..=12);
            let tasks: Vec<Task> = (1..=n)
                .map(|id| fixed_task(id, rng.random_range(0..=9) as f64, 0.0))
                .map(|mut t| {
                    t.est_safe = t.est_avg;
                    t.est_max = t.est_avg;
                    t
                })
                .collect();
            let mut arc_set = BTreeSet::new();
            for v in 2..=n {
                if rng.random_range(0..100) < 70 {
                    arc_set.insert((rng.random_range(1..v), v));
                }
            }
            for _ in 0..n {
                let u = rng.random_range(1..=n);
                let v = rng.random_range(1..=n);
                if u < v {
                    arc_set.insert((u, v));
                }
            }
            let p = Project {
                tasks,
                arcs: arc_set.into_iter().collect(),
                resources: BTreeMap::new(),
                deadline: None,
            };
            let durations: BTreeMap<TaskId, f64> =
                p.tasks.iter().map(|t| (t.id, t.est_avg)).collect();
            let times = cpm_pass(&p, &durations).map_err(|e| e.to_string())?;
            let expected = longest_path(&p, &durations);
            let got = cpm_makespan(&times);
            if got != expected {
                return Err(format!("case {case}: makespan {got} != enumeration {expected}"));
            }
        }
        Ok(String::new())
    });
}
