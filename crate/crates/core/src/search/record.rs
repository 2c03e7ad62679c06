//! JSONL result files: one [`ResultRecord`] per dataset item.

use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Method, SearchResult, Settings};
use crate::seq::{SeqError, Vocabulary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypRecord {
    pub tokens: Vec<String>,
    pub logprob: f64,
}

impl HypRecord {
    pub fn prob(&self) -> f64 {
        self.logprob.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub id: String,
    pub method: Method,
    pub settings: Settings,
    pub terminated: bool,
    pub explored_states: u64,
    pub hypotheses: Vec<HypRecord>,
}

impl ResultRecord {
    pub fn from_search(
        id: impl Into<String>,
        result: &SearchResult,
        vocab: &Vocabulary,
    ) -> Result<Self, SeqError> {
        let hypotheses = result
            .hypotheses
            .iter()
            .map(|h| {
                Ok(HypRecord {
                    tokens: vocab.decode(h.sequence.ids())?,
                    logprob: h.logprob,
                })
            })
            .collect::<Result<_, SeqError>>()?;
        Ok(Self {
            id: id.into(),
            method: result.method,
            settings: result.settings.clone(),
            terminated: result.terminated,
            explored_states: result.explored_states,
            hypotheses,
        })
    }

    pub fn best(&self) -> Option<&HypRecord> {
        self.hypotheses.first()
    }
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: malformed result record: {message}")]
    Malformed { line: usize, message: String },
}

pub fn read_results<R: BufRead>(reader: R) -> Result<Vec<ResultRecord>, RecordError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| RecordError::Malformed {
            line: idx + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| RecordError::Malformed {
                line: idx + 1,
                message: e.to_string(),
            })?,
        );
    }
    Ok(out)
}

pub fn load_results(path: &Path) -> Result<Vec<ResultRecord>, RecordError> {
    let file = std::fs::File::open(path).map_err(|source| RecordError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_results(std::io::BufReader::new(file))
}

pub fn results_to_jsonl(records: &[ResultRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}
