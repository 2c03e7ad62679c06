//! Mode-seeking decoders.
//!
//! * [`greedy`] and [`beam`] are the usual approximate decoders, scored by
//!   raw log-probability with no length normalization.
//! * [`dfs`] is exact single-best depth-first search.
//! * [`NbestDfs`] is exact n-best depth-first search with a priority queue
//!   of the n best complete hypotheses and a running lower bound.
//! * [`enumerate_all`] walks the whole (finite) output space and is the
//!   test oracle for the exact searches.
//!
//! All searches rank hypotheses with [`crate::seq::rank_cmp`] and expand
//! children in descending step probability, lowest token id first on ties.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelError;
use crate::seq::{Hypothesis, TokenId};

mod beam;
mod dfs;
mod enumerate;
mod greedy;
mod nbest;
mod record;

pub use beam::beam;
pub use dfs::dfs;
pub use enumerate::{enumerate_all, enumerate_counted, Enumeration, MAX_ENUM_LEN, MAX_ENUM_VOCAB};
pub use greedy::greedy;
pub use nbest::{nbest_dfs, NbestDfs, NbestTrace};
pub use record::{
    load_results, read_results, results_to_jsonl, HypRecord, RecordError, ResultRecord,
};

/// Default cap on explored states for exact search.
pub const DEFAULT_MAX_STATES: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("beam size must be at least 1")]
    ZeroBeam,
    #[error("n must be at least 1")]
    ZeroN,
    #[error("state budget must be positive")]
    ZeroBudget,
    #[error("seed {index} is invalid: {reason}")]
    InvalidSeed { index: usize, reason: String },
    #[error("space too large to enumerate: vocabulary {vocab} (max {max_vocab}), max_len {max_len} (max {max_len_limit})",
        max_vocab = MAX_ENUM_VOCAB, max_len_limit = MAX_ENUM_LEN)]
    SpaceTooLarge { vocab: usize, max_len: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Greedy,
    Beam,
    Dfs,
    NbestDfs,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Greedy => "greedy",
            Method::Beam => "beam",
            Method::Dfs => "dfs",
            Method::NbestDfs => "nbest_dfs",
        })
    }
}

/// Parameters a search ran with; unset fields do not apply to the method.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Settings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beam_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_states: Option<u64>,
    /// Beam size of the seeding run, when exact search was seeded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_beam: Option<usize>,
}

/// Cap on explored states. `None` means unlimited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    max_states: Option<u64>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_states: Some(DEFAULT_MAX_STATES),
        }
    }
}

impl SearchBudget {
    pub fn unlimited() -> Self {
        Self { max_states: None }
    }

    pub fn states(max_states: u64) -> Result<Self, SearchError> {
        if max_states == 0 {
            return Err(SearchError::ZeroBudget);
        }
        Ok(Self {
            max_states: Some(max_states),
        })
    }

    pub fn max_states(&self) -> Option<u64> {
        self.max_states
    }

    fn allows(&self, used: u64) -> bool {
        self.max_states.is_none_or(|m| used < m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Complete hypotheses, best first.
    pub hypotheses: Vec<Hypothesis>,
    pub explored_states: u64,
    /// False iff the state budget ran out before the search finished.
    pub terminated: bool,
    pub method: Method,
    pub settings: Settings,
}

impl SearchResult {
    pub fn best(&self) -> Option<&Hypothesis> {
        self.hypotheses.first()
    }
}

/// Continuations of a scored row worth visiting, best first. Zero-probability
/// tokens are dropped.
pub(crate) fn ordered_children(row: &[f64]) -> Vec<(TokenId, f64)> {
    let mut children: Vec<(TokenId, f64)> = row
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, lp)| *lp > f64::NEG_INFINITY)
        .collect();
    children.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    children
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn children_order() {
        let row = [0.2f64.ln(), 0.4f64.ln(), f64::NEG_INFINITY, 0.4f64.ln()];
        let ids: Vec<TokenId> = ordered_children(&row).into_iter().map(|c| c.0).collect();
        assert_eq!(ids, vec![1, 3, 0]);
    }

    #[test]
    fn budget() {
        assert_eq!(SearchBudget::default().max_states(), Some(1_000_000));
        assert_eq!(SearchBudget::states(0), Err(SearchError::ZeroBudget));
        let b = SearchBudget::states(2).unwrap();
        assert!(b.allows(1) && !b.allows(2));
        assert!(SearchBudget::unlimited().allows(u64::MAX - 1));
    }

    #[test]
    fn settings_json_omits_unset() {
        let s = Settings {
            n: Some(3),
            max_states: Some(10),
            ..Default::default()
        };
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"n":3,"max_states":10}"#
        );
        assert_eq!(
            serde_json::to_string(&Method::NbestDfs).unwrap(),
            "\"nbest_dfs\""
        );
    }
}
