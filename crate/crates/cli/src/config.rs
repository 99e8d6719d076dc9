//! Run configuration: defaults, optional JSON config file, command-line
//! overrides (flags win over the file, the file wins over defaults).

use std::collections::BTreeSet;
use std::path::PathBuf;

use ccpm_core::{BufferMethod, VarianceAssumption};
use serde::Deserialize;

use crate::error::{CliError, ExitClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(format!("unknown format `{other}` (expected json, csv, or text)")),
        }
    }
}

/// Method selector as written on the command line: a single method or `all`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodArg {
    One(BufferMethod),
    All,
}

impl std::str::FromStr for MethodArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(MethodArg::All);
        }
        s.parse::<BufferMethod>()
            .map(MethodArg::One)
            .map_err(|e| e.to_string())
    }
}

impl MethodArg {
    pub fn methods(self) -> Vec<BufferMethod> {
        match self {
            MethodArg::One(m) => vec![m],
            MethodArg::All => BufferMethod::ALL.to_vec(),
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub project: Option<PathBuf>,
    pub risks: Option<PathBuf>,
    pub ahp: Option<PathBuf>,
    pub fault_tree: Option<PathBuf>,
    pub methods: Vec<BufferMethod>,
    pub variance: VarianceAssumption,
    pub reps: usize,
    pub seed: u64,
    pub deadline: Option<f64>,
    pub out: PathBuf,
    pub formats: BTreeSet<Format>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            project: None,
            risks: None,
            ahp: None,
            fault_tree: None,
            methods: vec![BufferMethod::Rsem],
            variance: VarianceAssumption::RsemHalfU,
            reps: 10_000,
            seed: 0,
            deadline: None,
            out: PathBuf::from("ccpm-out"),
            formats: [Format::Json, Format::Csv, Format::Text].into(),
        }
    }
}

/// JSON config file; keys mirror the flags. Buffer settings may also be
/// spelled as a nested `"buffer": {"method": ..., "variance": ...}` section,
/// which wins over the flat keys within the file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub project: Option<PathBuf>,
    pub risks: Option<PathBuf>,
    pub ahp: Option<PathBuf>,
    #[serde(rename = "fault_tree")]
    pub fault_tree: Option<PathBuf>,
    pub method: Option<String>,
    pub variance: Option<String>,
    pub buffer: Option<BufferSection>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub deadline: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BufferSection {
    pub method: Option<String>,
    pub variance: Option<String>,
}

impl RunConfig {
    pub fn apply_file(&mut self, file: ConfigFile) -> Result<(), CliError> {
        let bad = |detail: String| CliError {
            stage: "config",
            class: ExitClass::Parse,
            message: detail,
        };
        if file.project.is_some() {
            self.project = file.project;
        }
        if file.risks.is_some() {
            self.risks = file.risks;
        }
        if file.ahp.is_some() {
            self.ahp = file.ahp;
        }
        if file.fault_tree.is_some() {
            self.fault_tree = file.fault_tree;
        }
        let method = file
            .buffer
            .as_ref()
            .and_then(|b| b.method.clone())
            .or(file.method);
        let variance = file
            .buffer
            .as_ref()
            .and_then(|b| b.variance.clone())
            .or(file.variance);
        if let Some(m) = method {
            self.methods = m.parse::<MethodArg>().map_err(bad)?.methods();
        }
        if let Some(v) = variance {
            self.variance = v.parse().map_err(|e: ccpm_core::BufferError| bad(e.to_string()))?;
        }
        if let Some(reps) = file.reps {
            self.reps = reps;
        }
        if let Some(seed) = file.seed {
            self.seed = seed;
        }
        if file.deadline.is_some() {
            self.deadline = file.deadline;
        }
        if let Some(out) = file.out {
            self.out = out;
        }
        if let Some(formats) = file.format {
            self.formats = formats
                .iter()
                .map(|f| f.parse::<Format>().map_err(bad))
                .collect::<Result<_, _>>()?;
        }
        Ok(())
    }
}
