//! Risk-register CSV ingestion.
//!
//! Expected header: `risk_id,description,p,ic,ti,iq,d,rf:<task-id>,...`.
//! Scores live on [1,10]; the wide `rf:` columns hold the percent effect of
//! the risk on that task as a fraction in [0,1] (blank = no effect).

use thiserror::Error;

use crate::model::{Project, RiskEvent, RiskFactorMatrix, TaskId};

#[derive(Debug, Error)]
pub enum RegisterError {
    #[error("MALFORMED at row {row}, column {column}: {detail}")]
    Malformed {
        row: usize,
        column: String,
        detail: String,
    },
    #[error("RANGE at row {row}, column {column}: {detail}")]
    Range {
        row: usize,
        column: String,
        detail: String,
    },
    #[error("UNKNOWN_TASK: column rf:{task} references a task not in the project")]
    UnknownTask { task: TaskId },
    #[error("MALFORMED header: {0}")]
    Header(String),
}

const FIXED_COLUMNS: [&str; 7] = ["risk_id", "description", "p", "ic", "ti", "iq", "d"];

/// Parses the register against a project (needed to check `rf:` task ids).
pub fn parse_risk_register(
    text: &str,
    project: &Project,
) -> Result<(Vec<RiskEvent>, RiskFactorMatrix), RegisterError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| RegisterError::Header(e.to_string()))?
        .clone();
    if headers.len() < FIXED_COLUMNS.len() {
        return Err(RegisterError::Header(format!(
            "expected at least {} columns, got {}",
            FIXED_COLUMNS.len(),
            headers.len()
        )));
    }
    for (i, expected) in FIXED_COLUMNS.iter().enumerate() {
        let got = headers.get(i).unwrap_or("").trim();
        if got != *expected {
            return Err(RegisterError::Header(format!(
                "column {} must be `{expected}`, got `{got}`",
                i + 1
            )));
        }
    }

    let mut rf_tasks: Vec<TaskId> = Vec::new();
    for i in FIXED_COLUMNS.len()..headers.len() {
        let raw = headers.get(i).unwrap_or("").trim();
        let id_text = raw.strip_prefix("rf:").ok_or_else(|| {
            RegisterError::Header(format!("column {} must look like `rf:<task-id>`, got `{raw}`", i + 1))
        })?;
        let task: TaskId = id_text
            .trim()
            .parse()
            .map_err(|_| RegisterError::Header(format!("`{raw}` has a non-integer task id")))?;
        if project.task(task).is_none() {
            return Err(RegisterError::UnknownTask { task });
        }
        rf_tasks.push(task);
    }

    let mut events = Vec::new();
    let mut matrix = RiskFactorMatrix::new();
    let mut seen_ids = std::collections::BTreeSet::new();

    for (idx, record) in reader.records().enumerate() {
        let row = idx + 2; // 1-based, after the header line
        let record = record.map_err(|e| RegisterError::Malformed {
            row,
            column: "-".into(),
            detail: e.to_string(),
        })?;

        let field = |i: usize| record.get(i).unwrap_or("").trim();
        let risk_id = field(0).to_string();
        if risk_id.is_empty() {
            return Err(RegisterError::Malformed {
                row,
                column: "risk_id".into(),
                detail: "empty risk id".into(),
            });
        }
        if !seen_ids.insert(risk_id.clone()) {
            return Err(RegisterError::Malformed {
                row,
                column: "risk_id".into(),
                detail: format!("duplicate risk id `{risk_id}`"),
            });
        }

        let mut scores = [0.0_f64; 5];
        for (slot, col) in (2..7).enumerate() {
            let name = FIXED_COLUMNS[col];
            let raw = field(col);
            let value: f64 = raw.parse().map_err(|_| RegisterError::Malformed {
                row,
                column: name.into(),
                detail: format!("expected a number, got `{raw}`"),
            })?;
            if !(1.0..=10.0).contains(&value) {
                return Err(RegisterError::Range {
                    row,
                    column: name.into(),
                    detail: format!("score {value} outside [1,10]"),
                });
            }
            scores[slot] = value;
        }

        for (k, &task) in rf_tasks.iter().enumerate() {
            let col = FIXED_COLUMNS.len() + k;
            let raw = field(col);
            if raw.is_empty() {
                continue;
            }
            let rf: f64 = raw.parse().map_err(|_| RegisterError::Malformed {
                row,
                column: format!("rf:{task}"),
                detail: format!("expected a fraction, got `{raw}`"),
            })?;
            if !(0.0..=1.0).contains(&rf) {
                return Err(RegisterError::Range {
                    row,
                    column: format!("rf:{task}"),
                    detail: format!("risk factor {rf} outside [0,1]"),
                });
            }
            matrix.insert(task, &risk_id, rf);
        }

        events.push(RiskEvent {
            id: risk_id,
            description: field(1).to_string(),
            p: scores[0],
            impact_cost: scores[1],
            impact_time: scores[2],
            impact_quality: scores[3],
            d: scores[4],
        });
    }

    Ok((events, matrix))
}
