use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ConditionalModel;
use crate::seq::{Source, TokenId, Vocabulary};

/// Rows must sum to one within this bound (linear domain).
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// A context (target-side suffix) and its linear-domain row.
pub(crate) type RawRow = (Vec<TokenId>, Vec<f64>);

/// On-disk model. Probabilities are linear-domain; a context key is the
/// last `<= context_order` target tokens joined by single spaces, `""` for
/// the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub vocab: Vec<String>,
    pub eos: String,
    pub context_order: usize,
    pub max_len: usize,
    pub fallback: BTreeMap<String, f64>,
    pub sources: BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>>,
}

/// One problem found while checking a [`ModelFile`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    BadVocabulary(String),
    ZeroMaxLen,
    /// Row sum outside tolerance. `source` is `None` for the fallback row.
    Unnormalized {
        source: Option<String>,
        context: String,
        sum: f64,
    },
    UnknownToken {
        source: Option<String>,
        context: String,
        token: String,
    },
    BadProbability {
        source: Option<String>,
        context: String,
        token: String,
        value: f64,
    },
    BadContext {
        source: String,
        context: String,
        reason: String,
    },
}

fn location(source: &Option<String>, context: &str) -> String {
    match source {
        Some(s) => format!("source {s:?} context {context:?}"),
        None => "fallback row".to_string(),
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadVocabulary(msg) => write!(f, "bad vocabulary: {msg}"),
            Violation::ZeroMaxLen => write!(f, "max_len must be positive"),
            Violation::Unnormalized {
                source,
                context,
                sum,
            } => {
                write!(f, "{}: row sums to {sum}", location(source, context))
            }
            Violation::UnknownToken {
                source,
                context,
                token,
            } => {
                write!(f, "{}: unknown token {token:?}", location(source, context))
            }
            Violation::BadProbability {
                source,
                context,
                token,
                value,
            } => {
                write!(
                    f,
                    "{}: token {token:?} has invalid probability {value}",
                    location(source, context)
                )
            }
            Violation::BadContext {
                source,
                context,
                reason,
            } => {
                write!(f, "source {source:?} context {context:?}: {reason}")
            }
        }
    }
}

impl Violation {
    /// True when renormalizing the row would fix the problem.
    fn is_fixable(&self) -> bool {
        matches!(self, Violation::Unnormalized { sum, .. } if *sum > 0.0 && sum.is_finite())
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed model file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("model failed validation:\n{}", .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Violation>),
}

/// Checks every row of a model file; an empty list means it loads as is.
pub fn validate_model(file: &ModelFile) -> Vec<Violation> {
    let mut out = Vec::new();
    let vocab = match Vocabulary::new(file.vocab.clone(), &file.eos) {
        Ok(v) => v,
        Err(e) => {
            out.push(Violation::BadVocabulary(e.to_string()));
            return out;
        }
    };
    if file.max_len == 0 {
        out.push(Violation::ZeroMaxLen);
    }
    check_row(&vocab, None, "", &file.fallback, &mut out);
    for (source, contexts) in &file.sources {
        for (context, row) in contexts {
            if let Err(reason) = parse_context(&vocab, context, file.context_order) {
                out.push(Violation::BadContext {
                    source: source.clone(),
                    context: context.clone(),
                    reason,
                });
            }
            check_row(&vocab, Some(source), context, row, &mut out);
        }
    }
    out
}

fn check_row(
    vocab: &Vocabulary,
    source: Option<&String>,
    context: &str,
    row: &BTreeMap<String, f64>,
    out: &mut Vec<Violation>,
) {
    let mut sum = 0.0;
    for (token, &p) in row {
        if vocab.id(token).is_none() {
            out.push(Violation::UnknownToken {
                source: source.cloned(),
                context: context.to_string(),
                token: token.clone(),
            });
        }
        if !(p.is_finite() && p >= 0.0) {
            out.push(Violation::BadProbability {
                source: source.cloned(),
                context: context.to_string(),
                token: token.clone(),
                value: p,
            });
        } else {
            sum += p;
        }
    }
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        out.push(Violation::Unnormalized {
            source: source.cloned(),
            context: context.to_string(),
            sum,
        });
    }
}

fn parse_context(vocab: &Vocabulary, key: &str, order: usize) -> Result<Vec<TokenId>, String> {
    if key.is_empty() {
        return Ok(Vec::new());
    }
    let ids = key
        .split(' ')
        .map(|t| match vocab.id(t) {
            Some(id) if id == vocab.eos() => Err("context contains eos".to_string()),
            Some(id) => Ok(id),
            None => Err(format!("unknown token {t:?}")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if ids.len() > order {
        return Err(format!("{} tokens exceed context order {order}", ids.len()));
    }
    Ok(ids)
}

#[derive(Debug, Clone, PartialEq)]
struct Row {
    probs: Vec<f64>,
    logs: Vec<f64>,
}

impl Row {
    fn from_probs(probs: Vec<f64>) -> Self {
        let logs = probs.iter().map(|p| p.ln()).collect();
        Self { probs, logs }
    }

    fn from_map(vocab: &Vocabulary, map: &BTreeMap<String, f64>, renormalize: bool) -> Self {
        let mut probs = vec![0.0; vocab.len()];
        for (tok, &p) in map {
            probs[vocab.id(tok).expect("validated")] = p;
        }
        if renormalize {
            let sum: f64 = probs.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
                probs.iter_mut().for_each(|p| *p /= sum);
            }
        }
        Self::from_probs(probs)
    }

    fn to_map(&self, vocab: &Vocabulary) -> BTreeMap<String, f64> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(id, &p)| (vocab.token(id).expect("in range").to_string(), p))
            .collect()
    }
}

/// Context-table model with longest-suffix backoff.
///
/// Lookup for a prefix tries the last `min(context_order, |prefix|)` tokens,
/// then successively shorter suffixes down to the root context, then the
/// fallback row. Sources missing from the table use the fallback row only.
#[derive(Debug, Clone, PartialEq)]
pub struct TableModel {
    vocab: Vocabulary,
    max_len: usize,
    context_order: usize,
    fallback: Row,
    sources: BTreeMap<String, HashMap<Vec<TokenId>, Row>>,
}

impl TableModel {
    /// Builds a model from a parsed file. Rows outside tolerance are an
    /// error unless `renormalize` is set, in which case they are rescaled.
    pub fn from_file(file: &ModelFile, renormalize: bool) -> Result<Self, LoadError> {
        let violations = validate_model(file);
        let fatal: Vec<Violation> = violations
            .into_iter()
            .filter(|v| !(renormalize && v.is_fixable()))
            .collect();
        if !fatal.is_empty() {
            return Err(LoadError::Invalid(fatal));
        }
        let vocab = Vocabulary::new(file.vocab.clone(), &file.eos).expect("validated");
        let fallback = Row::from_map(&vocab, &file.fallback, renormalize);
        let sources = file
            .sources
            .iter()
            .map(|(src, contexts)| {
                let table = contexts
                    .iter()
                    .map(|(ctx, row)| {
                        let key =
                            parse_context(&vocab, ctx, file.context_order).expect("validated");
                        (key, Row::from_map(&vocab, row, renormalize))
                    })
                    .collect();
                (src.clone(), table)
            })
            .collect();
        Ok(Self {
            vocab,
            max_len: file.max_len,
            context_order: file.context_order,
            fallback,
            sources,
        })
    }

    pub fn from_json(text: &str, renormalize: bool) -> Result<Self, LoadError> {
        let file: ModelFile = serde_json::from_str(text)?;
        Self::from_file(&file, renormalize)
    }

    pub fn load(path: &Path, renormalize: bool) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text, renormalize)
    }

    /// Builds a model straight from linear-domain rows in vocabulary order.
    /// Rows are assumed normalized.
    pub(crate) fn from_rows(
        vocab: Vocabulary,
        max_len: usize,
        context_order: usize,
        fallback: Vec<f64>,
        sources: BTreeMap<String, Vec<RawRow>>,
    ) -> Self {
        let sources = sources
            .into_iter()
            .map(|(src, rows)| {
                (
                    src,
                    rows.into_iter()
                        .map(|(k, r)| (k, Row::from_probs(r)))
                        .collect(),
                )
            })
            .collect();
        Self {
            vocab,
            max_len,
            context_order,
            fallback: Row::from_probs(fallback),
            sources,
        }
    }

    pub fn context_order(&self) -> usize {
        self.context_order
    }

    pub fn source_keys(&self) -> impl Iterator<Item = &str> {
        self.sources.keys().map(String::as_str)
    }

    pub fn num_rows(&self) -> usize {
        self.sources.values().map(HashMap::len).sum::<usize>() + 1
    }

    /// Linear-domain row used for `prefix`, ignoring forced termination.
    pub fn probs(&self, source: &Source, prefix: &[TokenId]) -> &[f64] {
        &self.row(source, prefix).probs
    }

    fn row(&self, source: &Source, prefix: &[TokenId]) -> &Row {
        if let Some(table) = self.sources.get(source.key()) {
            let longest = self.context_order.min(prefix.len());
            for len in (0..=longest).rev() {
                if let Some(row) = table.get(&prefix[prefix.len() - len..]) {
                    return row;
                }
            }
        }
        &self.fallback
    }

    pub fn to_file(&self) -> ModelFile {
        let sources = self
            .sources
            .iter()
            .map(|(src, table)| {
                let rows = table
                    .iter()
                    .map(|(ctx, row)| {
                        let key = self.vocab.decode(ctx).expect("in range").join(" ");
                        (key, row.to_map(&self.vocab))
                    })
                    .collect();
                (src.clone(), rows)
            })
            .collect();
        ModelFile {
            vocab: self.vocab.tokens().to_vec(),
            eos: self.vocab.eos_token().to_string(),
            context_order: self.context_order,
            max_len: self.max_len,
            fallback: self.fallback.to_map(&self.vocab),
            sources,
        }
    }

    /// Pretty-printed JSON; identical models give identical bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("model serializes");
        s.push('\n');
        s
    }
}

impl ConditionalModel for TableModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn max_len(&self) -> usize {
        self.max_len
    }

    fn next_logprobs(&self, source: &Source, prefix: &[TokenId]) -> Cow<'_, [f64]> {
        Cow::Borrowed(&self.row(source, prefix).logs)
    }
}
