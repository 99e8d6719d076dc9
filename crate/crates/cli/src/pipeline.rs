//! Pipeline orchestration: ingest inputs, run the analysis stages in order,
//! assemble the bundle. Identical config and inputs produce byte-identical
//! JSON output; all randomness flows from the single seed.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ccpm_core::*;
use log::info;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, ExitClass};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub seed: u64,
    /// Input path -> SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
}

/// Everything one run computed, in stage order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisBundle {
    pub provenance: Provenance,
    pub validation: ValidationReport,
    pub risk_ranking: Option<Vec<RiskAssessment>>,
    pub baseline: Option<BaselineSchedule>,
    pub chain_plan: Option<CriticalChainPlan>,
    /// Method name -> buffered schedule, one entry per requested method.
    pub buffered: BTreeMap<String, BufferedSchedule>,
    pub simulation: Option<SimulationResult>,
    pub mitigation: Option<MitigationReport>,
}

pub fn read_input(stage: &'static str, path: &Path, prov: &mut Provenance) -> Result<String, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::parse(stage, format!("cannot read {}: {e}", path.display())))?;
    let digest = Sha256::digest(&bytes);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    prov.inputs.insert(path.display().to_string(), hex);
    String::from_utf8(bytes)
        .map_err(|e| CliError::parse(stage, format!("{} is not UTF-8: {e}", path.display())))
}

pub fn load_project(cfg: &RunConfig, prov: &mut Provenance) -> Result<Project, CliError> {
    let path = cfg.project.as_deref().ok_or(CliError {
        stage: "parse",
        class: ExitClass::Parse,
        message: "--project is required for this command".into(),
    })?;
    let text = read_input("parse", path, prov)?;
    // Patterson text by extension, JSON otherwise.
    let project = if path.extension().is_some_and(|e| e == "rcp" || e == "patterson") {
        parse_patterson(&text).map_err(|e| CliError::parse("parse", e))?
    } else {
        Project::from_json(&text)
            .map_err(|e| CliError::parse("parse", format!("{}: {e}", path.display())))?
    };
    Ok(project)
}

pub fn load_register(
    cfg: &RunConfig,
    project: &Project,
    prov: &mut Provenance,
) -> Result<Option<(Vec<RiskEvent>, RiskFactorMatrix)>, CliError> {
    match cfg.risks.as_deref() {
        None => Ok(None),
        Some(path) => {
            let text = read_input("assess", path, prov)?;
            let parsed = parse_risk_register(&text, project)
                .map_err(|e| CliError::parse("assess", e))?;
            Ok(Some(parsed))
        }
    }
}

pub fn load_ahp(cfg: &RunConfig, prov: &mut Provenance) -> Result<AhpMatrix, CliError> {
    match cfg.ahp.as_deref() {
        None => Ok(AhpMatrix::neutral()),
        Some(path) => {
            let text = read_input("assess", path, prov)?;
            AhpMatrix::from_json(&text).map_err(|e| CliError::parse("assess", e))
        }
    }
}

pub fn load_mitigation(
    cfg: &RunConfig,
    prov: &mut Provenance,
) -> Result<Option<MitigationInput>, CliError> {
    match cfg.fault_tree.as_deref() {
        None => Ok(None),
        Some(path) => {
            let text = read_input("mitigate", path, prov)?;
            let input =
                MitigationInput::from_json(&text).map_err(|e| CliError::parse("mitigate", e))?;
            Ok(Some(input))
        }
    }
}

pub fn new_provenance(cfg: &RunConfig) -> Provenance {
    Provenance {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        inputs: BTreeMap::new(),
    }
}

/// Full pipeline: validate, assess (if a register is given), baseline,
/// chain, buffers per requested method, simulate (if a register is given),
/// mitigate (if a fault tree is given).
pub fn run_pipeline(cfg: &RunConfig) -> Result<AnalysisBundle, CliError> {
    let mut prov = new_provenance(cfg);
    let project = load_project(cfg, &mut prov)?;

    info!("validate: {} tasks, {} arcs", project.tasks.len(), project.arcs.len());
    let validation = validate_project(&project);
    if !validation.is_valid() {
        return Err(CliError {
            stage: "validate",
            class: ExitClass::Validation,
            message: format!(
                "{} structural errors, first: {}",
                validation.errors.len(),
                validation.errors[0].message
            ),
        });
    }

    let register = load_register(cfg, &project, &mut prov)?;
    let risk_ranking = match &register {
        Some((events, _)) if !events.is_empty() => {
            info!("assess: {} risks", events.len());
            let matrix = load_ahp(cfg, &mut prov)?;
            let rb = default_rule_base();
            Some(rank_register(events, &matrix, &rb).map_err(|e| CliError::runtime("assess", e))?)
        }
        _ => None,
    };

    info!("schedule: building baseline");
    let baseline = build_baseline(&project).map_err(|e| CliError::runtime("schedule", e))?;
    let plan = identify_critical_chain(&project, &baseline);
    info!(
        "schedule: makespan {}, chain length {}, {} feeding chains",
        plan.makespan,
        plan.critical_chain.len(),
        plan.feeding_chains.len()
    );

    let mut buffered = BTreeMap::new();
    for &method in &cfg.methods {
        let b = insert_buffers(&plan, &project, &baseline, method, cfg.variance)
            .map_err(|e| CliError::runtime("buffer", e))?;
        buffered.insert(method.to_string(), b);
    }

    let simulation = match &register {
        Some((_, matrix)) => {
            info!("simulate: {} replications, seed {}", cfg.reps, cfg.seed);
            let sim_cfg = SimConfig {
                replications: cfg.reps,
                seed: cfg.seed,
                deadline: cfg.deadline.or(project.deadline),
            };
            Some(
                run_simulation(&project, matrix, &baseline, &sim_cfg)
                    .map_err(|e| CliError::runtime("simulate", e))?,
            )
        }
        None => None,
    };

    let mitigation = match load_mitigation(cfg, &mut prov)? {
        Some(input) => {
            info!("mitigate: {} strategies", input.strategies.len());
            Some(input.analyze().map_err(|e| CliError::runtime("mitigate", e))?)
        }
        None => None,
    };

    Ok(AnalysisBundle {
        provenance: prov,
        validation,
        risk_ranking,
        baseline: Some(baseline),
        chain_plan: Some(plan),
        buffered,
        simulation,
        mitigation,
    })
}
