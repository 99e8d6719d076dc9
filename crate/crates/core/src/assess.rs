//! Fuzzy FMEA pipeline: AHP-weighted aggregated impact, risk criticality
//! numbers from Mamdani inference, and register ranking.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::{
    graded_mean, rule_centroid_blend, FuzzyError, LinguisticScale, Rule, RuleBase,
    TrapezoidalFuzzyNumber,
};
use crate::model::RiskEvent;

#[derive(Debug, Error)]
pub enum AssessError {
    #[error("DEGENERATE: all criterion priorities are zero")]
    Degenerate,
    #[error("risk register is empty")]
    EmptyRegister,
    #[error("AHP matrix diagonal must be crisp 1")]
    BadDiagonal,
    #[error("invalid AHP matrix: {0}")]
    BadMatrix(String),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
}

/// 3x3 pairwise comparison matrix over the impact criteria, in the fixed
/// order cost, time, quality. Entry (k, l) is the importance of criterion k
/// over criterion l as a trapezoidal fuzzy number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "[[TrapezoidalFuzzyNumber; 3]; 3]", try_from = "[[TrapezoidalFuzzyNumber; 3]; 3]")]
pub struct AhpMatrix {
    pub entries: [[TrapezoidalFuzzyNumber; 3]; 3],
}

impl AhpMatrix {
    pub fn new(entries: [[TrapezoidalFuzzyNumber; 3]; 3]) -> Result<Self, AssessError> {
        let one = TrapezoidalFuzzyNumber::crisp(1.0);
        for (k, row) in entries.iter().enumerate() {
            if row[k] != one {
                return Err(AssessError::BadDiagonal);
            }
        }
        Ok(Self { entries })
    }

    /// Identity comparison: every criterion equally important.
    pub fn neutral() -> Self {
        let one = TrapezoidalFuzzyNumber::crisp(1.0);
        Self { entries: [[one; 3]; 3] }
    }

    pub fn from_json(text: &str) -> Result<Self, AssessError> {
        serde_json::from_str(text).map_err(|e| AssessError::BadMatrix(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serializes")
    }
}

impl From<AhpMatrix> for [[TrapezoidalFuzzyNumber; 3]; 3] {
    fn from(m: AhpMatrix) -> Self {
        m.entries
    }
}

impl TryFrom<[[TrapezoidalFuzzyNumber; 3]; 3]> for AhpMatrix {
    type Error = AssessError;
    fn try_from(entries: [[TrapezoidalFuzzyNumber; 3]; 3]) -> Result<Self, Self::Error> {
        AhpMatrix::new(entries)
    }
}

/// Normalized criteria priorities (cost, time, quality), summing to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriteriaWeights {
    pub cost: f64,
    pub time: f64,
    pub quality: f64,
}

/// Defuzzifies each comparison by graded mean, takes row means as raw total
/// priorities, then normalizes so the weights sum to 1.
pub fn ahp_weights(matrix: &AhpMatrix) -> Result<CriteriaWeights, AssessError> {
    let mut tp = [0.0_f64; 3];
    for (k, row) in matrix.entries.iter().enumerate() {
        tp[k] = row.iter().map(|&e| graded_mean(e)).sum::<f64>() / 3.0;
    }
    let total: f64 = tp.iter().sum();
    if total <= 0.0 {
        return Err(AssessError::Degenerate);
    }
    Ok(CriteriaWeights {
        cost: tp[0] / total,
        time: tp[1] / total,
        quality: tp[2] / total,
    })
}

/// Weighted sum of the three impact scores; stays within [1,10] because the
/// weights are a convex combination.
pub fn aggregated_impact(w: &CriteriaWeights, r: &RiskEvent) -> f64 {
    w.cost * r.impact_cost + w.time * r.impact_time + w.quality * r.impact_quality
}

/// The default monotone rule base: all inputs and the output use the default
/// five-term layout, and each rule's output index is the rounded mean of its
/// input indices. Detection is oriented risk-wise (10 = least detectable).
pub fn default_rule_base() -> RuleBase {
    let scale = LinguisticScale::default_five_term;
    let mut rules = Vec::with_capacity(125);
    for p in 0..5usize {
        for ai in 0..5usize {
            for d in 0..5usize {
                let consequent = ((p + ai + d) as f64 / 3.0).round() as usize;
                rules.push(Rule {
                    antecedent: [p, ai, d],
                    consequent,
                });
            }
        }
    }
    RuleBase::new([scale(), scale(), scale()], scale(), rules)
        .expect("default rule base is complete")
}

/// Risk criticality number for (occurrence, aggregated impact, detection):
/// the product-strength blend of output-term centroids, which agrees with
/// centroid-of-Mamdani whenever a single rule fires and stays monotone in
/// each input everywhere else.
pub fn risk_criticality(p: f64, ai: f64, d: f64, rb: &RuleBase) -> Result<f64, FuzzyError> {
    rule_centroid_blend(rb, p, ai, d)
}

/// Per-risk assessment with its rank in the register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskAssessment {
    pub risk_id: String,
    pub ai: f64,
    pub rcn: f64,
    pub rank: usize,
}

/// Assesses every risk and ranks by criticality, highest first; ties break
/// on ascending risk id.
pub fn rank_register(
    register: &[RiskEvent],
    matrix: &AhpMatrix,
    rb: &RuleBase,
) -> Result<Vec<RiskAssessment>, AssessError> {
    if register.is_empty() {
        return Err(AssessError::EmptyRegister);
    }
    let weights = ahp_weights(matrix)?;
    let mut rows: Vec<RiskAssessment> = register
        .iter()
        .map(|risk| {
            let ai = aggregated_impact(&weights, risk);
            let rcn = risk_criticality(risk.p, ai, risk.d, rb)?;
            Ok(RiskAssessment {
                risk_id: risk.id.clone(),
                ai,
                rcn,
                rank: 0,
            })
        })
        .collect::<Result<_, FuzzyError>>()?;
    rows.sort_by(|a, b| {
        b.rcn
            .total_cmp(&a.rcn)
            .then_with(|| a.risk_id.cmp(&b.risk_id))
    });
    for (i, row) in rows.iter_mut().enumerate() {
        row.rank = i + 1;
    }
    Ok(rows)
}
