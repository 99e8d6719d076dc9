//! Bow-tie mitigation math: fault-tree probability of the critical risk
//! event, event-tree paths over mitigation strategies, and root-cause
//! contribution ranking. Basic events are assumed independent; fuzzy leaf
//! probabilities are defuzzified on input and all gate arithmetic is crisp.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::{graded_mean, TrapezoidalFuzzyNumber};

pub const MAX_STRATEGIES: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum MitigationError {
    #[error("EMPTY_GATE: gate `{0}` has no children")]
    EmptyGate(String),
    #[error("TOO_MANY_STRATEGIES: {0} strategies would enumerate 2^{0} paths (limit {MAX_STRATEGIES})")]
    TooManyStrategies(usize),
    #[error("probability {value} of `{name}` outside [0,1]")]
    InvalidProbability { name: String, value: f64 },
    #[error("invalid document: {0}")]
    Document(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateOp {
    And,
    Or,
}

/// Fault tree node: a basic event with a crisp probability, or a gate over
/// child subtrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FaultTree {
    Event {
        name: String,
        probability: f64,
    },
    Gate {
        gate: GateOp,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        children: Vec<FaultTree>,
    },
}

impl FaultTree {
    pub fn event(name: &str, probability: f64) -> Self {
        FaultTree::Event {
            name: name.to_string(),
            probability,
        }
    }

    pub fn gate(op: GateOp, children: Vec<FaultTree>) -> Self {
        FaultTree::Gate {
            gate: op,
            name: None,
            children,
        }
    }

    fn validate(&self) -> Result<(), MitigationError> {
        match self {
            FaultTree::Event { name, probability } => {
                if !(0.0..=1.0).contains(probability) {
                    return Err(MitigationError::InvalidProbability {
                        name: name.clone(),
                        value: *probability,
                    });
                }
                Ok(())
            }
            FaultTree::Gate { gate, name, children } => {
                if children.is_empty() {
                    return Err(MitigationError::EmptyGate(
                        name.clone().unwrap_or_else(|| format!("{gate:?}").to_lowercase()),
                    ));
                }
                children.iter().try_for_each(FaultTree::validate)
            }
        }
    }

    /// Leaves in depth-first order.
    fn leaves(&self) -> Vec<(String, f64)> {
        match self {
            FaultTree::Event { name, probability } => vec![(name.clone(), *probability)],
            FaultTree::Gate { children, .. } => {
                children.iter().flat_map(FaultTree::leaves).collect()
            }
        }
    }

    /// Probability with the `zeroed`-th leaf (depth-first index) forced to 0.
    fn probability_with_zeroed(&self, zeroed: Option<usize>, cursor: &mut usize) -> f64 {
        match self {
            FaultTree::Event { probability, .. } => {
                let idx = *cursor;
                *cursor += 1;
                if zeroed == Some(idx) {
                    0.0
                } else {
                    *probability
                }
            }
            FaultTree::Gate { gate, children, .. } => {
                let child_ps: Vec<f64> = children
                    .iter()
                    .map(|c| c.probability_with_zeroed(zeroed, cursor))
                    .collect();
                match gate {
                    GateOp::And => child_ps.iter().product(),
                    GateOp::Or => 1.0 - child_ps.iter().map(|p| 1.0 - p).product::<f64>(),
                }
            }
        }
    }
}

/// Top-event probability: AND gates multiply children, OR gates complement
/// the product of complements, both valid under independence.
pub fn evaluate_fault_tree(tree: &FaultTree) -> Result<f64, MitigationError> {
    tree.validate()?;
    Ok(tree.probability_with_zeroed(None, &mut 0))
}

/// A mitigation strategy with its probability of failing to work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub name: String,
    pub failure_probability: f64,
}

/// Event tree: an initiating probability and an ordered strategy list; the
/// outcome space is every success/failure signature over the strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTree {
    pub initiating_probability: f64,
    pub strategies: Vec<Strategy>,
}

/// Enumerates all 2^k outcome paths in lexicographic signature order with
/// S before F; each path's probability multiplies the branch probabilities
/// below the initiating event.
pub fn evaluate_event_tree(tree: &EventTree) -> Result<Vec<(String, f64)>, MitigationError> {
    let k = tree.strategies.len();
    if k > MAX_STRATEGIES {
        return Err(MitigationError::TooManyStrategies(k));
    }
    if !(0.0..=1.0).contains(&tree.initiating_probability) {
        return Err(MitigationError::InvalidProbability {
            name: "initiating event".into(),
            value: tree.initiating_probability,
        });
    }
    for s in &tree.strategies {
        if !(0.0..=1.0).contains(&s.failure_probability) {
            return Err(MitigationError::InvalidProbability {
                name: s.name.clone(),
                value: s.failure_probability,
            });
        }
    }

    let mut paths = Vec::with_capacity(1 << k);
    for mask in 0..(1u64 << k) {
        let mut signature = String::with_capacity(k);
        let mut probability = tree.initiating_probability;
        for (i, s) in tree.strategies.iter().enumerate() {
            // Bit 0 of the leading strategy is the most significant digit,
            // so S-signatures come first.
            let failed = mask >> (k - 1 - i) & 1 == 1;
            signature.push(if failed { 'F' } else { 'S' });
            probability *= if failed {
                s.failure_probability
            } else {
                1.0 - s.failure_probability
            };
        }
        paths.push((signature, probability));
    }
    Ok(paths)
}

/// Contribution of each basic event: how much the top-event probability
/// drops when that event is made impossible. Sorted by contribution,
/// largest first, ties on event name.
pub fn rank_root_causes(tree: &FaultTree) -> Result<Vec<(String, f64)>, MitigationError> {
    tree.validate()?;
    let base = tree.probability_with_zeroed(None, &mut 0);
    let leaves = tree.leaves();
    let mut ranked: Vec<(String, f64)> = leaves
        .iter()
        .enumerate()
        .map(|(i, (name, _))| {
            let without = tree.probability_with_zeroed(Some(i), &mut 0);
            (name.clone(), base - without)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootCause {
    pub event: String,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathOutcome {
    pub signature: String,
    pub probability: f64,
}

/// Full bow-tie report: top event probability, root causes, outcome table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigationReport {
    pub top_event_probability: f64,
    pub ranked_root_causes: Vec<RootCause>,
    pub path_table: Vec<PathOutcome>,
}

/// Evaluates the fault tree, ranks root causes, and runs the event tree
/// seeded with the top-event probability (or an explicit override).
pub fn analyze_mitigation(
    tree: &FaultTree,
    strategies: &[Strategy],
    initiating_override: Option<f64>,
) -> Result<MitigationReport, MitigationError> {
    let top = evaluate_fault_tree(tree)?;
    let causes = rank_root_causes(tree)?;
    let event_tree = EventTree {
        initiating_probability: initiating_override.unwrap_or(top),
        strategies: strategies.to_vec(),
    };
    let paths = evaluate_event_tree(&event_tree)?;
    Ok(MitigationReport {
        top_event_probability: top,
        ranked_root_causes: causes
            .into_iter()
            .map(|(event, contribution)| RootCause {
                event,
                contribution,
            })
            .collect(),
        path_table: paths
            .into_iter()
            .map(|(signature, probability)| PathOutcome {
                signature,
                probability,
            })
            .collect(),
    })
}

/// Document form of the bow-tie inputs. Leaf probabilities may be crisp
/// numbers or trapezoid quadruples; quadruples are defuzzified by graded
/// mean while loading.
#[derive(Debug, Deserialize)]
struct RawMitigationDoc {
    fault_tree: RawNode,
    #[serde(default)]
    strategies: Vec<RawStrategy>,
    #[serde(default)]
    initiating_probability: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct RawStrategy {
    name: String,
    failure_probability: RawProbability,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawProbability {
    Crisp(f64),
    Fuzzy([f64; 4]),
}

impl RawProbability {
    fn resolve(self, name: &str) -> Result<f64, MitigationError> {
        let p = match self {
            RawProbability::Crisp(p) => p,
            RawProbability::Fuzzy(q) => {
                let tfn = TrapezoidalFuzzyNumber::try_from(q)
                    .map_err(|e| MitigationError::Document(e.to_string()))?;
                graded_mean(tfn)
            }
        };
        if !(0.0..=1.0).contains(&p) {
            return Err(MitigationError::InvalidProbability {
                name: name.to_string(),
                value: p,
            });
        }
        Ok(p)
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawNode {
    Event {
        name: String,
        probability: RawProbability,
    },
    Gate {
        gate: GateOp,
        #[serde(default)]
        name: Option<String>,
        children: Vec<RawNode>,
    },
}

impl RawNode {
    fn resolve(self) -> Result<FaultTree, MitigationError> {
        match self {
            RawNode::Event { name, probability } => {
                let p = probability.resolve(&name)?;
                Ok(FaultTree::Event {
                    name,
                    probability: p,
                })
            }
            RawNode::Gate { gate, name, children } => Ok(FaultTree::Gate {
                gate,
                name,
                children: children
                    .into_iter()
                    .map(RawNode::resolve)
                    .collect::<Result<_, _>>()?,
            }),
        }
    }
}

/// Parsed bow-tie inputs ready for [`analyze_mitigation`].
#[derive(Debug, Clone, PartialEq)]
pub struct MitigationInput {
    pub fault_tree: FaultTree,
    pub strategies: Vec<Strategy>,
    pub initiating_probability: Option<f64>,
}

impl MitigationInput {
    pub fn from_json(text: &str) -> Result<Self, MitigationError> {
        let raw: RawMitigationDoc =
            serde_json::from_str(text).map_err(|e| MitigationError::Document(e.to_string()))?;
        let fault_tree = raw.fault_tree.resolve()?;
        fault_tree.validate()?;
        let strategies = raw
            .strategies
            .into_iter()
            .map(|s| {
                let p = s.failure_probability.resolve(&s.name)?;
                Ok(Strategy {
                    name: s.name,
                    failure_probability: p,
                })
            })
            .collect::<Result<Vec<_>, MitigationError>>()?;
        Ok(Self {
            fault_tree,
            strategies,
            initiating_probability: raw.initiating_probability,
        })
    }

    pub fn analyze(&self) -> Result<MitigationReport, MitigationError> {
        analyze_mitigation(
            &self.fault_tree,
            &self.strategies,
            self.initiating_probability,
        )
    }
}
