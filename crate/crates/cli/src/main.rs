//! Command-line front end: each analysis stage is independently invokable,
//! `run` executes the whole pipeline. Exit codes: 0 ok, 2 validation
//! failure, 3 parse failure, 4 runtime failure. Diagnostics honor the
//! CHAIN_LOG environment variable (error, warn, info, debug).

mod config;
mod error;
mod pipeline;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use ccpm_core::*;
use clap::{Args, Parser, Subcommand};
use log::info;

use config::{ConfigFile, Format, MethodArg, RunConfig};
use error::{CliError, ExitClass};
use pipeline::{
    load_ahp, load_mitigation, load_project, load_register, new_provenance, run_pipeline,
};
use report::{render_report, write_file};

#[derive(Parser)]
#[command(name = "ccpm", version, about = "Critical-chain scheduling and schedule-risk analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON config file; explicit flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Project definition: JSON document, or Patterson text (.rcp)
    #[arg(long, global = true)]
    project: Option<PathBuf>,
    /// Risk register CSV
    #[arg(long, global = true)]
    risks: Option<PathBuf>,
    /// AHP pairwise comparison matrix JSON (3x3 trapezoid quadruples)
    #[arg(long, global = true)]
    ahp: Option<PathBuf>,
    /// Bow-tie document: fault tree plus mitigation strategies
    #[arg(long = "fault-tree", global = true)]
    fault_tree: Option<PathBuf>,
    /// Buffer sizing method
    #[arg(long, global = true, value_parser = clap::value_parser!(MethodArg))]
    method: Option<MethodArg>,
    /// Activity variance assumption for the adaptive method
    #[arg(long, global = true)]
    variance: Option<VarianceAssumption>,
    /// Monte Carlo replications
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Seed for all randomness
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Deadline for the completion-probability estimate
    #[arg(long, global = true)]
    deadline: Option<f64>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report formats (comma separated: json, csv, text)
    #[arg(long, global = true, value_delimiter = ',')]
    format: Option<Vec<Format>>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the project and report every structural violation
    Validate(CommonArgs),
    /// Rank the risk register by fuzzy criticality
    Assess(CommonArgs),
    /// Build the baseline, identify chains, size buffers
    Schedule(CommonArgs),
    /// Monte Carlo completion-time simulation under the risk matrix
    Simulate(CommonArgs),
    /// Fault/event tree mitigation analysis
    Mitigate(CommonArgs),
    /// Full pipeline with all reports
    Run(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Validate(a)
            | Command::Assess(a)
            | Command::Schedule(a)
            | Command::Simulate(a)
            | Command::Mitigate(a)
            | Command::Run(a) => a,
        }
    }
}

fn resolve_config(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::parse("config", format!("cannot read {}: {e}", path.display()))
        })?;
        let file: ConfigFile = serde_json::from_str(&text)
            .map_err(|e| CliError::parse("config", format!("{}: {e}", path.display())))?;
        cfg.apply_file(file)?;
    }
    if args.project.is_some() {
        cfg.project = args.project.clone();
    }
    if args.risks.is_some() {
        cfg.risks = args.risks.clone();
    }
    if args.ahp.is_some() {
        cfg.ahp = args.ahp.clone();
    }
    if args.fault_tree.is_some() {
        cfg.fault_tree = args.fault_tree.clone();
    }
    if let Some(m) = args.method {
        cfg.methods = m.methods();
    }
    if let Some(v) = args.variance {
        cfg.variance = v;
    }
    if let Some(reps) = args.reps {
        cfg.reps = reps;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.deadline.is_some() {
        cfg.deadline = args.deadline;
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    if let Some(formats) = &args.format {
        cfg.formats = formats.iter().copied().collect();
    }
    if cfg.reps == 0 {
        return Err(CliError::parse("config", "--reps must be at least 1"));
    }
    Ok(cfg)
}

fn cmd_validate(cfg: &RunConfig) -> Result<(), CliError> {
    let mut prov = new_provenance(cfg);
    let project = load_project(cfg, &mut prov)?;
    let report = validate_project(&project);
    for finding in &report.errors {
        println!("error {} at {}: {}", finding.code, finding.location, finding.message);
    }
    for finding in &report.warnings {
        println!("warning {} at {}: {}", finding.code, finding.location, finding.message);
    }
    if cfg.formats.contains(&Format::Json) {
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::runtime("report", e))?;
        write_file(&cfg.out, "validation.json", &json)?;
    }
    if report.is_valid() {
        println!(
            "ok: {} tasks, {} arcs, {} warnings",
            project.tasks.len(),
            project.arcs.len(),
            report.warnings.len()
        );
        Ok(())
    } else {
        Err(CliError {
            stage: "validate",
            class: ExitClass::Validation,
            message: format!("{} structural errors", report.errors.len()),
        })
    }
}

fn cmd_assess(cfg: &RunConfig) -> Result<(), CliError> {
    let mut prov = new_provenance(cfg);
    let project = load_project(cfg, &mut prov)?;
    let (events, _) = load_register(cfg, &project, &mut prov)?.ok_or(CliError {
        stage: "assess",
        class: ExitClass::Parse,
        message: "--risks is required for assess".into(),
    })?;
    let matrix = load_ahp(cfg, &mut prov)?;
    let rb = default_rule_base();
    let ranking = rank_register(&events, &matrix, &rb)
        .map_err(|e| CliError::runtime("assess", e))?;
    if cfg.formats.contains(&Format::Csv) {
        write_file(&cfg.out, "risks.csv", &report::risks_csv(&ranking))?;
    }
    if cfg.formats.contains(&Format::Json) {
        let json = serde_json::to_string_pretty(&ranking)
            .map_err(|e| CliError::runtime("report", e))?;
        write_file(&cfg.out, "risks.json", &json)?;
    }
    for row in &ranking {
        println!("#{} {} ai={:.4} rcn={:.4}", row.rank, row.risk_id, row.ai, row.rcn);
    }
    Ok(())
}

fn cmd_schedule(cfg: &RunConfig) -> Result<(), CliError> {
    let mut prov = new_provenance(cfg);
    let project = load_project(cfg, &mut prov)?;
    let baseline = build_baseline(&project).map_err(|e| CliError::runtime("schedule", e))?;
    let plan = identify_critical_chain(&project, &baseline);
    let mut buffered = std::collections::BTreeMap::new();
    for &method in &cfg.methods {
        let b = insert_buffers(&plan, &project, &baseline, method, cfg.variance)
            .map_err(|e| CliError::runtime("buffer", e))?;
        buffered.insert(method.to_string(), b);
    }

    if cfg.formats.contains(&Format::Json) {
        let doc = serde_json::json!({
            "baseline": baseline,
            "chain_plan": plan,
            "buffered": buffered,
        });
        let json = serde_json::to_string_pretty(&doc)
            .map_err(|e| CliError::runtime("report", e))?;
        write_file(&cfg.out, "schedule.json", &json)?;
    }
    if cfg.formats.contains(&Format::Csv) {
        let gantt_buffers = cfg
            .methods
            .first()
            .and_then(|m| buffered.get(&m.to_string()));
        write_file(
            &cfg.out,
            "schedule.csv",
            &report::schedule_csv(&baseline, &plan, gantt_buffers),
        )?;
        write_file(&cfg.out, "buffers.csv", &report::buffers_csv(&cfg.methods, &buffered))?;
    }

    println!("makespan: {}", plan.makespan);
    for &method in &cfg.methods {
        if let Some(b) = buffered.get(&method.to_string()) {
            println!("{}: buffered completion {}", method, b.buffered_completion);
        }
    }
    Ok(())
}

fn cmd_simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let mut prov = new_provenance(cfg);
    let project = load_project(cfg, &mut prov)?;
    let (_, matrix) = load_register(cfg, &project, &mut prov)?.ok_or(CliError {
        stage: "simulate",
        class: ExitClass::Parse,
        message: "--risks is required for simulate".into(),
    })?;
    let baseline = build_baseline(&project).map_err(|e| CliError::runtime("schedule", e))?;
    let sim_cfg = SimConfig {
        replications: cfg.reps,
        seed: cfg.seed,
        deadline: cfg.deadline.or(project.deadline),
    };
    let result = run_simulation(&project, &matrix, &baseline, &sim_cfg)
        .map_err(|e| CliError::runtime("simulate", e))?;

    if cfg.formats.contains(&Format::Json) {
        let json = serde_json::to_string_pretty(&result)
            .map_err(|e| CliError::runtime("report", e))?;
        write_file(&cfg.out, "simulation.json", &json)?;
    }
    if cfg.formats.contains(&Format::Csv) {
        write_file(&cfg.out, "makespan_hist.csv", &report::histogram_csv(&result))?;
    }
    if cfg.formats.contains(&Format::Text) {
        // Full sample, one makespan per line.
        let mut sample = String::with_capacity(result.makespans.len() * 8);
        for m in &result.makespans {
            sample.push_str(&m.to_string());
            sample.push('\n');
        }
        write_file(&cfg.out, "makespans.txt", &sample)?;
    }

    println!(
        "mean {:.4} std {:.4} p50 {:.4} p80 {:.4} p90 {:.4} p95 {:.4}",
        result.mean,
        result.std,
        result.percentiles.p50,
        result.percentiles.p80,
        result.percentiles.p90,
        result.percentiles.p95
    );
    if let (Some(d), Some(p)) = (result.deadline, result.deadline_probability) {
        println!("deadline {d}: probability {p:.4}");
    }
    Ok(())
}

fn cmd_mitigate(cfg: &RunConfig) -> Result<(), CliError> {
    let mut prov = new_provenance(cfg);
    let input = load_mitigation(cfg, &mut prov)?.ok_or(CliError {
        stage: "mitigate",
        class: ExitClass::Parse,
        message: "--fault-tree is required for mitigate".into(),
    })?;
    let report_doc = input.analyze().map_err(|e| CliError::runtime("mitigate", e))?;
    if cfg.formats.contains(&Format::Json) {
        let json = serde_json::to_string_pretty(&report_doc)
            .map_err(|e| CliError::runtime("report", e))?;
        write_file(&cfg.out, "mitigation.json", &json)?;
    }
    if cfg.formats.contains(&Format::Text) {
        write_file(&cfg.out, "mitigation.txt", &report::mitigation_text(&report_doc))?;
    }
    print!("{}", report::mitigation_text(&report_doc));
    Ok(())
}

fn cmd_run(cfg: &RunConfig) -> Result<(), CliError> {
    let bundle = run_pipeline(cfg)?;
    let written = render_report(&bundle, cfg)?;
    for path in &written {
        info!("wrote {}", path.display());
    }
    println!("{}", report::summary_text(&bundle, cfg));
    Ok(())
}

fn dispatch(command: &Command, cfg: &RunConfig) -> Result<(), CliError> {
    match command {
        Command::Validate(_) => cmd_validate(cfg),
        Command::Assess(_) => cmd_assess(cfg),
        Command::Schedule(_) => cmd_schedule(cfg),
        Command::Simulate(_) => cmd_simulate(cfg),
        Command::Mitigate(_) => cmd_mitigate(cfg),
        Command::Run(_) => cmd_run(cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("CHAIN_LOG")).init();
    let cli = Cli::parse();
    let cfg = match resolve_config(cli.command.common()) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("{}", err.to_diagnostic());
            return ExitCode::from(err.class.code() as u8);
        }
    };
    match dispatch(&cli.command, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_diagnostic());
            ExitCode::from(err.class.code() as u8)
        }
    }
}
