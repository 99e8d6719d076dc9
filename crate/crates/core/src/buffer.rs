//! Buffer sizing: cut-and-paste, root-square-error, and the adaptive
//! procedure with density.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Task, TaskId};

#[derive(Debug, Error, PartialEq)]
pub enum BufferError {
    #[error("task {0} has safe estimate below its average estimate")]
    NegativeUncertainty(TaskId),
    #[error("feeding sub-network must contain at least one task")]
    EmptySubnetwork,
    #[error("longest path references task {0} outside the sub-network variances")]
    PathOutsideSubnetwork(TaskId),
    #[error("UNKNOWN_METHOD: `{0}` (expected cpm, rsem, or apd)")]
    UnknownMethod(String),
    #[error("unknown variance assumption `{0}` (expected rsem_half_u or triangular)")]
    UnknownVariance(String),
}

/// Buffer sizing method selector (config key `buffer.method`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BufferMethod {
    /// Cut-and-paste: half the summed safety.
    Cpm,
    /// Root-square-error: two standard deviations.
    Rsem,
    /// Adaptive procedure with density.
    Apd,
}

impl BufferMethod {
    pub const ALL: [BufferMethod; 3] = [BufferMethod::Cpm, BufferMethod::Rsem, BufferMethod::Apd];
}

impl fmt::Display for BufferMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BufferMethod::Cpm => "cpm",
            BufferMethod::Rsem => "rsem",
            BufferMethod::Apd => "apd",
        })
    }
}

impl FromStr for BufferMethod {
    type Err = BufferError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cpm" => Ok(BufferMethod::Cpm),
            "rsem" => Ok(BufferMethod::Rsem),
            "apd" => Ok(BufferMethod::Apd),
            other => Err(BufferError::UnknownMethod(other.to_string())),
        }
    }
}

/// Per-activity variance assumption (config key `buffer.variance`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceAssumption {
    /// Variance ((safe - avg) / 2)^2, matching the RSEM spread.
    #[default]
    RsemHalfU,
    /// Triangular distribution on (min, avg, max).
    Triangular,
}

impl fmt::Display for VarianceAssumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VarianceAssumption::RsemHalfU => "rsem_half_u",
            VarianceAssumption::Triangular => "triangular",
        })
    }
}

impl FromStr for VarianceAssumption {
    type Err = BufferError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rsem_half_u" => Ok(VarianceAssumption::RsemHalfU),
            "triangular" => Ok(VarianceAssumption::Triangular),
            other => Err(BufferError::UnknownVariance(other.to_string())),
        }
    }
}

/// Safe/average estimate pairs along one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainEstimates {
    pairs: Vec<(f64, f64)>,
}

impl ChainEstimates {
    /// Pairs of (safe, average); safe must not fall below average.
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self, BufferError> {
        for (i, &(safe, avg)) in pairs.iter().enumerate() {
            if safe < avg {
                return Err(BufferError::NegativeUncertainty(i + 1));
            }
        }
        Ok(Self { pairs })
    }

    pub fn from_tasks<'a>(tasks: impl IntoIterator<Item = &'a Task>) -> Result<Self, BufferError> {
        let mut pairs = Vec::new();
        for task in tasks {
            if task.est_safe < task.est_avg {
                return Err(BufferError::NegativeUncertainty(task.id));
            }
            pairs.push((task.est_safe, task.est_avg));
        }
        Ok(Self { pairs })
    }

    /// Removed safety u_k = S_k - A_k per task.
    pub fn uncertainties(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|&(s, a)| s - a)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Cut-and-paste buffer: half the summed safety cut from the chain.
pub fn cut_paste_buffer(chain: &ChainEstimates) -> f64 {
    0.5 * chain.uncertainties().sum::<f64>()
}

/// Root-square-error buffer: sqrt of the summed squared safeties, i.e. two
/// standard deviations when each task's sigma is u/2.
pub fn rsem_buffer(chain: &ChainEstimates) -> f64 {
    chain
        .uncertainties()
        .map(|u| u * u)
        .sum::<f64>()
        .sqrt()
}

/// A sub-network feeding the critical chain, reduced to what the adaptive
/// sizing needs: its size, arc count, longest path and per-task variances.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedingSubnetwork {
    task_count: usize,
    arc_count: usize,
    longest_path: Vec<TaskId>,
    variances: BTreeMap<TaskId, f64>,
}

impl FeedingSubnetwork {
    pub fn new(
        task_count: usize,
        arc_count: usize,
        longest_path: Vec<TaskId>,
        variances: BTreeMap<TaskId, f64>,
    ) -> Result<Self, BufferError> {
        if task_count == 0 || longest_path.is_empty() {
            return Err(BufferError::EmptySubnetwork);
        }
        for id in &longest_path {
            if !variances.contains_key(id) {
                return Err(BufferError::PathOutsideSubnetwork(*id));
            }
        }
        Ok(Self {
            task_count,
            arc_count,
            longest_path,
            variances,
        })
    }

    /// Density factor FC = 1 + arcs / tasks.
    pub fn density_factor(&self) -> f64 {
        1.0 + self.arc_count as f64 / self.task_count as f64
    }

    pub fn longest_path(&self) -> &[TaskId] {
        &self.longest_path
    }
}

/// Adaptive buffer: FC * sqrt(sum of variances along the longest path).
pub fn apd_buffer(sub: &FeedingSubnetwork) -> f64 {
    let sum: f64 = sub
        .longest_path
        .iter()
        .map(|id| sub.variances[id])
        .sum();
    sub.density_factor() * sum.sqrt()
}

/// Per-activity variance under the selected distribution assumption.
pub fn activity_variance(task: &Task, assumption: VarianceAssumption) -> f64 {
    match assumption {
        VarianceAssumption::RsemHalfU => {
            let half = (task.est_safe - task.est_avg) / 2.0;
            half * half
        }
        VarianceAssumption::Triangular => {
            let (min, mode, max) = (task.est_min, task.est_avg, task.est_max);
            ((max - min) * (max - min) + (max - mode) * (mode - min)) / 18.0
        }
    }
}
