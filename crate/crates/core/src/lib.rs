//! Critical-chain scheduling and schedule-risk analysis engine.
//!
//! The crate covers the full planning flow: ingest a project network
//! (Patterson text or JSON) and its risk register, rank risks by fuzzy
//! criticality, build a resource-feasible baseline, identify the critical
//! and feeding chains, size buffers by three competing methods, simulate
//! completion-time distributions under risk, and evaluate mitigation
//! strategies through fault/event trees.
//!
//! With the default `parallel` feature the Monte Carlo engine fans
//! replications out over rayon; disabling it falls back to an identical
//! sequential path (results are bit-equal either way).

pub mod assess;
pub mod buffer;
pub mod fuzzy;
pub mod mitigate;
pub mod model;
pub mod patterson;
pub mod register;
pub mod sched;
pub mod sim;

pub use assess::{
    aggregated_impact, ahp_weights, default_rule_base, rank_register, risk_criticality, AhpMatrix,
    AssessError, CriteriaWeights, RiskAssessment,
};
pub use buffer::{
    activity_variance, apd_buffer, cut_paste_buffer, rsem_buffer, BufferMethod, ChainEstimates,
    FeedingSubnetwork, VarianceAssumption,
};
pub use fuzzy::{
    centroid, graded_mean, mamdani_infer, membership, rule_centroid_blend, FuzzySet,
    LinguisticScale, LinguisticTerm, Rule, RuleBase, TrapezoidalFuzzyNumber,
};
pub use fuzzy::FuzzyError;
pub use mitigate::{
    analyze_mitigation, evaluate_event_tree, evaluate_fault_tree, rank_root_causes, EventTree,
    FaultTree, GateOp, MitigationError, MitigationInput, MitigationReport, PathOutcome, RootCause,
    Strategy,
};
pub use model::{
    cpm_makespan, cpm_pass, validate_project, CpmTimes, Finding, FindingCode, ModelError, Project,
    RiskEvent, RiskFactorMatrix, Task, TaskId, ValidationReport,
};
pub use buffer::BufferError;
pub use patterson::{parse_patterson, write_patterson, PattersonError};
pub use register::{parse_risk_register, RegisterError};
pub use sched::{
    build_baseline, identify_critical_chain, insert_buffers, BaselineSchedule, BufferedSchedule,
    CriticalChainPlan, FeedingChain, SchedError,
};
pub use sim::{
    criticality_indices, deadline_probability, run_simulation, run_simulation_sequential,
    sample_duration, HistogramBin, Percentiles, SimConfig, SimError, SimulationResult,
};
