//! File reports rendered from a bundle: machine-readable JSON and CSV plus
//! a human-readable summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ccpm_core::*;

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::pipeline::AnalysisBundle;

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::runtime("report", format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::runtime("report", format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Emits every applicable report for the requested formats and returns the
/// written paths.
pub fn render_report(bundle: &AnalysisBundle, cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let dir = &cfg.out;
    let mut written = Vec::new();

    if cfg.formats.contains(&Format::Json) {
        let json = serde_json::to_string_pretty(bundle)
            .map_err(|e| CliError::runtime("report", e))?;
        written.push(write_file(dir, "bundle.json", &json)?);
        if let Some(mitigation) = &bundle.mitigation {
            let json = serde_json::to_string_pretty(mitigation)
                .map_err(|e| CliError::runtime("report", e))?;
            written.push(write_file(dir, "mitigation.json", &json)?);
        }
    }

    if cfg.formats.contains(&Format::Csv) {
        if let Some(ranking) = &bundle.risk_ranking {
            written.push(write_file(dir, "risks.csv", &risks_csv(ranking))?);
        }
        if let (Some(baseline), Some(plan)) = (&bundle.baseline, &bundle.chain_plan) {
            // Gantt buffers come from the first requested method.
            let gantt_buffers = cfg
                .methods
                .first()
                .and_then(|m| bundle.buffered.get(&m.to_string()));
            written.push(write_file(
                dir,
                "schedule.csv",
                &schedule_csv(baseline, plan, gantt_buffers),
            )?);
            written.push(write_file(
                dir,
                "buffers.csv",
                &buffers_csv(&cfg.methods, &bundle.buffered),
            )?);
        }
        if let Some(sim) = &bundle.simulation {
            written.push(write_file(dir, "makespan_hist.csv", &histogram_csv(sim))?);
        }
    }

    if cfg.formats.contains(&Format::Text) {
        written.push(write_file(dir, "summary.txt", &summary_text(bundle, cfg))?);
        if let Some(mitigation) = &bundle.mitigation {
            written.push(write_file(dir, "mitigation.txt", &mitigation_text(mitigation))?);
        }
    }

    Ok(written)
}

pub fn risks_csv(ranking: &[RiskAssessment]) -> String {
    let mut out = String::from("risk_id,ai,rcn,rank\n");
    for row in ranking {
        let _ = writeln!(out, "{},{},{},{}", row.risk_id, row.ai, row.rcn, row.rank);
    }
    out
}

/// Gantt rows: every task, then the chosen method's feeding buffers at their
/// merge points and the project buffer after the last chain task.
pub fn schedule_csv(
    baseline: &BaselineSchedule,
    plan: &CriticalChainPlan,
    buffers: Option<&BufferedSchedule>,
) -> String {
    let mut out = String::from("task,start,finish,kind\n");
    for (id, start) in &baseline.start {
        let _ = writeln!(out, "{},{},{},task", id, start, baseline.finish[id]);
    }
    if let Some(b) = buffers {
        for (i, chain) in plan.feeding_chains.iter().enumerate() {
            let size = b.feeding_buffers[i];
            let merge_start = baseline.start[&chain.merge_task];
            let _ = writeln!(
                out,
                "FB{},{},{},feeding_buffer",
                i + 1,
                merge_start - size,
                merge_start
            );
        }
        let _ = writeln!(
            out,
            "PB,{},{},project_buffer",
            plan.makespan,
            plan.makespan + b.project_buffer
        );
    }
    out
}

pub fn buffers_csv(
    methods: &[BufferMethod],
    buffered: &std::collections::BTreeMap<String, BufferedSchedule>,
) -> String {
    let mut out = String::from("chain,method,size\n");
    for method in methods {
        if let Some(b) = buffered.get(&method.to_string()) {
            for (i, size) in b.feeding_buffers.iter().enumerate() {
                let _ = writeln!(out, "feeding:{},{},{}", i + 1, method, size);
            }
            let _ = writeln!(out, "project,{},{}", method, b.project_buffer);
        }
    }
    out
}

pub fn histogram_csv(sim: &SimulationResult) -> String {
    let mut out = String::from("bin_lower,bin_upper,count\n");
    for bin in &sim.histogram {
        let _ = writeln!(out, "{},{},{}", bin.lower, bin.upper, bin.count);
    }
    out
}

pub fn mitigation_text(report: &MitigationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "top event probability: {:.6}", report.top_event_probability);
    let _ = writeln!(out, "\nroot causes by contribution:");
    let _ = writeln!(out, "{:<28} {:>12}", "event", "contribution");
    for cause in &report.ranked_root_causes {
        let _ = writeln!(out, "{:<28} {:>12.6}", cause.event, cause.contribution);
    }
    let _ = writeln!(out, "\nmitigation outcome paths (S success, F failure):");
    let _ = writeln!(out, "{:<12} {:>12}", "signature", "probability");
    for path in &report.path_table {
        let _ = writeln!(out, "{:<12} {:>12.6}", path.signature, path.probability);
    }
    out
}

pub fn summary_text(bundle: &AnalysisBundle, cfg: &RunConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "validation: {} errors, {} warnings",
        bundle.validation.errors.len(),
        bundle.validation.warnings.len()
    );

    match &bundle.risk_ranking {
        Some(ranking) => {
            let top = &ranking[0];
            let _ = writeln!(
                out,
                "risk assessment: {} risks ranked; top {} (rcn {:.4})",
                ranking.len(),
                top.risk_id,
                top.rcn
            );
        }
        None => {
            let _ = writeln!(out, "risk assessment: skipped");
        }
    }

    if let Some(plan) = &bundle.chain_plan {
        let chain: Vec<String> = plan.critical_chain.iter().map(|id| id.to_string()).collect();
        let _ = writeln!(out, "baseline makespan: {}", plan.makespan);
        let _ = writeln!(out, "critical chain: {}", chain.join(" -> "));
        let _ = writeln!(out, "feeding chains: {}", plan.feeding_chains.len());
    }

    if !bundle.buffered.is_empty() {
        let _ = writeln!(out, "buffered completion per method:");
        for method in &cfg.methods {
            if let Some(b) = bundle.buffered.get(&method.to_string()) {
                let _ = writeln!(
                    out,
                    "  {}: {:.6} (project buffer {:.6})",
                    method, b.buffered_completion, b.project_buffer
                );
            }
        }
        let cpm = bundle.buffered.get("cpm");
        let apd = bundle.buffered.get("apd");
        match (cpm, apd) {
            (Some(c), Some(a)) if a.buffered_completion > 0.0 => {
                let _ = writeln!(
                    out,
                    "cpm/apd completion ratio: {:.6}",
                    c.buffered_completion / a.buffered_completion
                );
            }
            _ => {
                let _ = writeln!(out, "cpm/apd completion ratio: n/a");
            }
        }
    }

    match &bundle.simulation {
        Some(sim) => {
            let _ = writeln!(
                out,
                "simulation: {} replications, seed {} | mean {:.4} std {:.4} p50 {:.4} p80 {:.4} p95 {:.4}",
                sim.replications,
                sim.seed,
                sim.mean,
                sim.std,
                sim.percentiles.p50,
                sim.percentiles.p80,
                sim.percentiles.p95
            );
            if let (Some(deadline), Some(prob)) = (sim.deadline, sim.deadline_probability) {
                let _ = writeln!(out, "deadline {}: probability {:.4}", deadline, prob);
            }
        }
        None => {
            let _ = writeln!(out, "simulation: skipped");
        }
    }

    match &bundle.mitigation {
        Some(m) => {
            let top_cause = m
                .ranked_root_causes
                .first()
                .map(|c| format!("{} ({:.4})", c.event, c.contribution))
                .unwrap_or_else(|| "none".into());
            let _ = writeln!(
                out,
                "mitigation: top event probability {:.6}; leading root cause {}",
                m.top_event_probability, top_cause
            );
        }
        None => {
            let _ = writeln!(out, "mitigation: skipped");
        }
    }

    out
}
