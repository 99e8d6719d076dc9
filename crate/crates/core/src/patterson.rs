//! Patterson-format instance parser and writer.
//!
//! The format is a stream of whitespace-separated integers: a header
//! `n m` (job count including the dummy source and sink, resource count),
//! one line of `m` capacities, then one record per job holding its
//! duration, `m` resource demands, a successor count and the successor ids.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{Project, Task, TaskId};

#[derive(Debug, Error, PartialEq)]
pub enum PattersonError {
    #[error("MALFORMED at line {line}: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("RANGE at line {line}: {detail}")]
    Range { line: usize, detail: String },
    #[error("project not representable in Patterson format: {detail}")]
    NotRepresentable { detail: String },
}

struct TokenStream<'a> {
    tokens: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> TokenStream<'a> {
    fn new(text: &'a str) -> Self {
        let mut tokens = Vec::new();
        for (i, line) in text.lines().enumerate() {
            for tok in line.split_whitespace() {
                tokens.push((i + 1, tok));
            }
        }
        TokenStream { tokens, pos: 0 }
    }

    fn last_line(&self) -> usize {
        self.tokens.last().map(|&(l, _)| l).unwrap_or(1)
    }

    fn next_int(&mut self, what: &str) -> Result<(usize, i64), PattersonError> {
        match self.tokens.get(self.pos) {
            None => Err(PattersonError::Malformed {
                line: self.last_line(),
                detail: format!("unexpected end of input, expected {what}"),
            }),
            Some(&(line, tok)) => {
                self.pos += 1;
                let value = tok.parse::<i64>().map_err(|_| PattersonError::Malformed {
                    line,
                    detail: format!("expected integer {what}, got `{tok}`"),
                })?;
                Ok((line, value))
            }
        }
    }

    fn next_nonneg(&mut self, what: &str) -> Result<(usize, i64), PattersonError> {
        let (line, v) = self.next_int(what)?;
        if v < 0 {
            return Err(PattersonError::Range {
                line,
                detail: format!("{what} must be nonnegative, got {v}"),
            });
        }
        Ok((line, v))
    }
}

/// Parses a Patterson instance. The single duration per job is copied into
/// all four estimates; safety data comes from elsewhere.
pub fn parse_patterson(text: &str) -> Result<Project, PattersonError> {
    let mut ts = TokenStream::new(text);
    let (line, n) = ts.next_nonneg("job count")?;
    if n == 0 {
        return Err(PattersonError::Range {
            line,
            detail: "job count must be positive".into(),
        });
    }
    let (_, m) = ts.next_nonneg("resource count")?;
    let n = n as usize;
    let m = m as usize;

    let mut resources = BTreeMap::new();
    for r in 1..=m {
        let (_, cap) = ts.next_nonneg(&format!("capacity of resource {r}"))?;
        resources.insert(format!("R{r}"), cap as f64);
    }

    let mut tasks = Vec::with_capacity(n);
    let mut arcs = Vec::new();
    for id in 1..=n {
        let (_, duration) = ts.next_nonneg(&format!("duration of job {id}"))?;
        let mut demand = BTreeMap::new();
        for r in 1..=m {
            let (_, units) = ts.next_nonneg(&format!("demand of job {id} on resource {r}"))?;
            if units > 0 {
                demand.insert(format!("R{r}"), units as f64);
            }
        }
        let (_, succ_count) = ts.next_nonneg(&format!("successor count of job {id}"))?;
        for s in 0..succ_count {
            let (line, succ) = ts.next_int(&format!("successor {} of job {id}", s + 1))?;
            if succ < 1 || succ as usize > n {
                return Err(PattersonError::Range {
                    line,
                    detail: format!("successor {succ} of job {id} is outside [1,{n}]"),
                });
            }
            arcs.push((id, succ as usize));
        }
        let d = duration as f64;
        tasks.push(Task {
            id,
            name: format!("T{id}"),
            est_min: d,
            est_avg: d,
            est_safe: d,
            est_max: d,
            demand,
        });
    }

    if let Some(&(line, tok)) = ts.tokens.get(ts.pos) {
        return Err(PattersonError::Malformed {
            line,
            detail: format!("trailing input starting at `{tok}`"),
        });
    }

    Ok(Project {
        tasks,
        arcs,
        resources,
        deadline: None,
    })
}

/// Renders a project back to Patterson text. Durations are taken from
/// `est_avg`; every value must be a nonnegative integer.
pub fn write_patterson(project: &Project) -> Result<String, PattersonError> {
    let as_int = |v: f64, what: &str| -> Result<i64, PattersonError> {
        if v < 0.0 || v.fract() != 0.0 {
            return Err(PattersonError::NotRepresentable {
                detail: format!("{what} = {v} is not a nonnegative integer"),
            });
        }
        Ok(v as i64)
    };

    // Column order: shorter names first, then lexicographic, so R2 < R10.
    let mut res_names: Vec<&String> = project.resources.keys().collect();
    res_names.sort_by_key(|k| (k.len(), k.as_str()));

    let mut out = String::new();
    out.push_str(&format!("{} {}\n", project.tasks.len(), res_names.len()));
    let caps: Vec<String> = res_names
        .iter()
        .map(|r| as_int(project.resources[*r], &format!("capacity of {r}")).map(|v| v.to_string()))
        .collect::<Result<_, _>>()?;
    if !caps.is_empty() {
        out.push_str(&caps.join(" "));
        out.push('\n');
    }

    let mut succs: BTreeMap<TaskId, Vec<TaskId>> = BTreeMap::new();
    for &(u, v) in &project.arcs {
        succs.entry(u).or_default().push(v);
    }

    for task in &project.tasks {
        let mut fields = vec![as_int(task.est_avg, &format!("duration of job {}", task.id))?];
        for r in &res_names {
            let units = task.demand.get(*r).copied().unwrap_or(0.0);
            fields.push(as_int(units, &format!("demand of job {}", task.id))?);
        }
        let empty = Vec::new();
        let s = succs.get(&task.id).unwrap_or(&empty);
        fields.push(s.len() as i64);
        fields.extend(s.iter().map(|&v| v as i64));
        let rendered: Vec<String> = fields.iter().map(|v| v.to_string()).collect();
        out.push_str(&rendered.join(" "));
        out.push('\n');
    }
    Ok(out)
}
