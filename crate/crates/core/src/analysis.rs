//! Batch analyses over result files: search errors, n-best probability
//! mass, the gap between beam and exact n-best mass, explored-state
//! distributions and correlations with reference uncertainty.
//!
//! All inputs are [`ResultRecord`] lists aligned by position. Exact runs
//! that ran out of budget cannot vouch for their answer, so error and gap
//! reports leave those items out and count them in
//! `skipped_unterminated`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{spearman_rho, MetricError, UncertaintyRecord};
use crate::report::csv_string;
use crate::search::ResultRecord;

/// Slack for floating-point noise when checking exact-vs-approximate bounds.
pub const BOUND_SLACK: f64 = 1e-12;

/// Number of equal-width coverage bands in [`MassReport::histogram`].
pub const MASS_BANDS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("result lists differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("id mismatch at position {position}: {left:?} vs {right:?}")]
    IdMismatch {
        position: usize,
        left: String,
        right: String,
    },
    #[error("no exact result terminated within its budget")]
    UnterminatedExact,
    #[error("item {0:?} has no hypotheses")]
    EmptyResult(String),
    #[error("item {id:?}: exact result is worse than the approximation ({detail})")]
    InconsistentExact { id: String, detail: String },
    #[error("n must be at least 1")]
    ZeroN,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

fn check_aligned(left: &[ResultRecord], right: &[ResultRecord]) -> Result<(), AnalysisError> {
    if let Some((position, (l, r))) = left
        .iter()
        .zip(right)
        .enumerate()
        .find(|(_, (l, r))| l.id != r.id)
    {
        return Err(AnalysisError::IdMismatch {
            position,
            left: l.id.clone(),
            right: r.id.clone(),
        });
    }
    if left.len() != right.len() {
        return Err(AnalysisError::LengthMismatch(left.len(), right.len()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorItem {
    pub id: String,
    pub is_error: bool,
    pub approx_logprob: f64,
    pub exact_logprob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub total_items: usize,
    pub search_errors: usize,
    pub error_rate: f64,
    pub skipped_unterminated: usize,
    pub per_item: Vec<ErrorItem>,
}

impl ErrorReport {
    pub fn to_csv(&self) -> String {
        csv_string(
            &["id", "is_error", "approx_logprob", "exact_logprob"],
            &self.per_item,
        )
    }

    /// `(id, 1.0 if search error else 0.0)` per item.
    pub fn indicators(&self) -> Vec<(String, f64)> {
        self.per_item
            .iter()
            .map(|i| (i.id.clone(), if i.is_error { 1.0 } else { 0.0 }))
            .collect()
    }
}

/// An item is a search error when the approximate top-1 sequence differs
/// from the exact one.
pub fn count_search_errors(
    approx: &[ResultRecord],
    exact: &[ResultRecord],
) -> Result<ErrorReport, AnalysisError> {
    check_aligned(approx, exact)?;
    let mut per_item = Vec::new();
    let mut skipped = 0;
    for (a, e) in approx.iter().zip(exact) {
        if !e.terminated {
            skipped += 1;
            continue;
        }
        let a_best = a
            .best()
            .ok_or_else(|| AnalysisError::EmptyResult(a.id.clone()))?;
        let e_best = e
            .best()
            .ok_or_else(|| AnalysisError::EmptyResult(e.id.clone()))?;
        if a_best.logprob > e_best.logprob + BOUND_SLACK {
            return Err(AnalysisError::InconsistentExact {
                id: e.id.clone(),
                detail: format!("approx {} > exact {}", a_best.logprob, e_best.logprob),
            });
        }
        per_item.push(ErrorItem {
            id: a.id.clone(),
            is_error: a_best.tokens != e_best.tokens,
            approx_logprob: a_best.logprob,
            exact_logprob: e_best.logprob,
        });
    }
    if per_item.is_empty() && skipped > 0 {
        return Err(AnalysisError::UnterminatedExact);
    }
    let total = per_item.len();
    let errors = per_item.iter().filter(|i| i.is_error).count();
    Ok(ErrorReport {
        total_items: total,
        search_errors: errors,
        error_rate: if total == 0 {
            0.0
        } else {
            errors as f64 / total as f64
        },
        skipped_unterminated: skipped,
        per_item,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassItem {
    pub id: String,
    pub n_used: usize,
    pub cumulative_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassReport {
    pub n: usize,
    pub per_item: Vec<MassItem>,
    pub mean_mass: f64,
    /// Items per coverage band `[k/10, (k+1)/10)`; the last band includes 1.
    pub histogram: [usize; MASS_BANDS],
}

impl MassReport {
    pub fn to_csv(&self) -> String {
        csv_string(&["id", "n_used", "cumulative_mass"], &self.per_item)
    }

    /// One row per coverage band: `band_lo, band_hi, count`.
    pub fn histogram_csv(&self) -> String {
        let rows = self.histogram.iter().enumerate().map(|(k, &count)| {
            (
                k as f64 / MASS_BANDS as f64,
                (k + 1) as f64 / MASS_BANDS as f64,
                count,
            )
        });
        csv_string(&["band_lo", "band_hi", "count"], rows)
    }

    pub fn values(&self) -> Vec<(String, f64)> {
        self.per_item
            .iter()
            .map(|i| (i.id.clone(), i.cumulative_mass))
            .collect()
    }
}

fn list_mass(record: &ResultRecord, n: usize) -> f64 {
    record.hypotheses.iter().take(n).map(|h| h.prob()).sum()
}

fn band(mass: f64) -> usize {
    ((mass * MASS_BANDS as f64).floor().max(0.0) as usize).min(MASS_BANDS - 1)
}

/// Linear-domain probability mass of each item's top `min(n, available)`
/// hypotheses.
pub fn mass_coverage(results: &[ResultRecord], n: usize) -> Result<MassReport, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::ZeroN);
    }
    let mut histogram = [0; MASS_BANDS];
    let per_item = results
        .iter()
        .map(|r| {
            if r.hypotheses.is_empty() {
                return Err(AnalysisError::EmptyResult(r.id.clone()));
            }
            let mass = list_mass(r, n);
            histogram[band(mass)] += 1;
            Ok(MassItem {
                id: r.id.clone(),
                n_used: n.min(r.hypotheses.len()),
                cumulative_mass: mass,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mean_mass = mean(per_item.iter().map(|i| i.cumulative_mass));
    Ok(MassReport {
        n,
        per_item,
        mean_mass,
        histogram,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapItem {
    pub id: String,
    pub exact_mass: f64,
    pub beam_mass: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub n: usize,
    pub per_item: Vec<GapItem>,
    pub mean_gap: f64,
    pub skipped_unterminated: usize,
}

impl GapReport {
    pub fn to_csv(&self) -> String {
        csv_string(&["id", "exact_mass", "beam_mass", "gap"], &self.per_item)
    }
}

/// Exact n-best mass minus beam n-best mass per item. The exact n-best
/// list bounds the mass of any n hypotheses, so gaps are non-negative.
pub fn mass_gap(
    beam: &[ResultRecord],
    exact: &[ResultRecord],
    n: usize,
) -> Result<GapReport, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::ZeroN);
    }
    check_aligned(beam, exact)?;
    let mut per_item = Vec::new();
    let mut skipped = 0;
    for (b, e) in beam.iter().zip(exact) {
        if !e.terminated {
            skipped += 1;
            continue;
        }
        let exact_mass = list_mass(e, n);
        let beam_mass = list_mass(b, n);
        let gap = exact_mass - beam_mass;
        if gap < -BOUND_SLACK {
            return Err(AnalysisError::InconsistentExact {
                id: e.id.clone(),
                detail: format!("exact mass {exact_mass} < beam mass {beam_mass}"),
            });
        }
        per_item.push(GapItem {
            id: e.id.clone(),
            exact_mass,
            beam_mass,
            gap,
        });
    }
    if per_item.is_empty() && skipped > 0 {
        return Err(AnalysisError::UnterminatedExact);
    }
    let mean_gap = mean(per_item.iter().map(|i| i.gap));
    Ok(GapReport {
        n,
        per_item,
        mean_gap,
        skipped_unterminated: skipped,
    })
}

/// `(id, explored_states)` per record.
pub fn explored_states(results: &[ResultRecord]) -> Vec<(String, f64)> {
    results
        .iter()
        .map(|r| (r.id.clone(), r.explored_states as f64))
        .collect()
}

/// Fraction of items whose search terminated within each state threshold.
pub fn explored_state_cdf(results: &[ResultRecord], thresholds: &[u64]) -> Vec<(u64, f64)> {
    thresholds
        .iter()
        .map(|&t| {
            let hit = results
                .iter()
                .filter(|r| r.terminated && r.explored_states <= t)
                .count();
            let frac = if results.is_empty() {
                0.0
            } else {
                hit as f64 / results.len() as f64
            };
            (t, frac)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Errors,
    States,
    Mass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPair {
    pub item_id: String,
    pub u: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub which: Quantity,
    pub rho: f64,
    pub pairs: Vec<CorrelationPair>,
}

impl CorrelationReport {
    /// The joined pairs, ready for plotting.
    pub fn to_csv(&self) -> String {
        csv_string(&["item_id", "u", "value"], &self.pairs)
    }
}

/// Joins uncertainty records with per-item values by id (in uncertainty
/// record order) and computes Spearman's rho.
pub fn correlate(
    u_records: &[UncertaintyRecord],
    values: &[(String, f64)],
    which: Quantity,
) -> Result<CorrelationReport, AnalysisError> {
    let lookup: HashMap<&str, f64> = values.iter().map(|(id, v)| (id.as_str(), *v)).collect();
    let pairs: Vec<CorrelationPair> = u_records
        .iter()
        .filter_map(|r| {
            lookup
                .get(r.item_id.as_str())
                .map(|&value| CorrelationPair {
                    item_id: r.item_id.clone(),
                    u: r.u,
                    value,
                })
        })
        .collect();
    if pairs.len() < 2 {
        return Err(MetricError::DegenerateInput(format!(
            "only {} items matched by id",
            pairs.len()
        ))
        .into());
    }
    let us: Vec<f64> = pairs.iter().map(|p| p.u).collect();
    let vs: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    let rho = spearman_rho(&us, &vs)?;
    Ok(CorrelationReport { which, rho, pairs })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}
