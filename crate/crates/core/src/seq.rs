//! Tokens, vocabularies, sequences and scored hypotheses.
//!
//! Token ids are indices into a [`Vocabulary`] and never change once the
//! vocabulary is built. Sequences are plain id lists; the empty sequence is
//! a valid (incomplete) prefix and is the root of every search tree.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a token within its vocabulary.
pub type TokenId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeqError {
    #[error("unknown token {0:?} at position {1}")]
    UnknownToken(String, usize),
    #[error("token id {0} out of range for vocabulary of size {1}")]
    IdOutOfRange(TokenId, usize),
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),
}

/// Ordered token inventory with a distinguished end-of-sentence symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
    eos: TokenId,
}

impl Vocabulary {
    /// Builds a vocabulary. `eos` must be one of `tokens`.
    pub fn new<S: Into<String>>(tokens: Vec<S>, eos: &str) -> Result<Self, SeqError> {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(tokens.len());
        for (id, tok) in tokens.iter().enumerate() {
            if tok.is_empty() {
                return Err(SeqError::InvalidVocabulary("empty token string".into()));
            }
            if tok.chars().any(char::is_whitespace) {
                return Err(SeqError::InvalidVocabulary(format!(
                    "token {tok:?} contains whitespace"
                )));
            }
            if index.insert(tok.clone(), id).is_some() {
                return Err(SeqError::InvalidVocabulary(format!(
                    "duplicate token {tok:?}"
                )));
            }
        }
        let eos = *index.get(eos).ok_or_else(|| {
            SeqError::InvalidVocabulary(format!("eos token {eos:?} not in vocabulary"))
        })?;
        Ok(Self { tokens, index, eos })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn eos(&self) -> TokenId {
        self.eos
    }

    pub fn eos_token(&self) -> &str {
        &self.tokens[self.eos]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    /// Maps token strings to ids.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Sequence, SeqError> {
        tokens
            .iter()
            .enumerate()
            .map(|(pos, t)| {
                self.id(t.as_ref())
                    .ok_or_else(|| SeqError::UnknownToken(t.as_ref().to_string(), pos))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Sequence::from)
    }

    /// Maps ids back to token strings.
    pub fn decode(&self, seq: &[TokenId]) -> Result<Vec<String>, SeqError> {
        seq.iter()
            .map(|&id| {
                self.token(id)
                    .map(str::to_string)
                    .ok_or(SeqError::IdOutOfRange(id, self.len()))
            })
            .collect()
    }
}

/// Splits on runs of whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

/// A (possibly empty) list of token ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequence(Vec<TokenId>);

impl Sequence {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn ids(&self) -> &[TokenId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Complete iff the last id is eos and eos occurs nowhere else.
    pub fn is_complete(&self, eos: TokenId) -> bool {
        is_complete(&self.0, eos)
    }

    pub fn push(&mut self, id: TokenId) {
        self.0.push(id);
    }

    pub fn into_ids(self) -> Vec<TokenId> {
        self.0
    }
}

impl From<Vec<TokenId>> for Sequence {
    fn from(v: Vec<TokenId>) -> Self {
        Self(v)
    }
}

impl AsRef<[TokenId]> for Sequence {
    fn as_ref(&self) -> &[TokenId] {
        &self.0
    }
}

pub fn is_complete(ids: &[TokenId], eos: TokenId) -> bool {
    match ids.split_last() {
        Some((&last, rest)) => last == eos && !rest.contains(&eos),
        None => false,
    }
}

/// A sequence together with its natural-log probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub sequence: Sequence,
    pub logprob: f64,
}

impl Hypothesis {
    pub fn new(sequence: impl Into<Sequence>, logprob: f64) -> Self {
        Self {
            sequence: sequence.into(),
            logprob,
        }
    }

    pub fn prob(&self) -> f64 {
        self.logprob.exp()
    }

    /// Position of `self` relative to `other` in the ranking order:
    /// `Less` means `self` ranks better.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        rank_cmp(
            self.logprob,
            self.sequence.ids(),
            other.logprob,
            other.sequence.ids(),
        )
    }
}

/// Total ranking order on scored sequences: higher log-probability first,
/// then shorter sequences, then lexicographically smaller token ids.
pub fn rank_cmp<T: Ord>(lp_a: f64, a: &[T], lp_b: f64, b: &[T]) -> Ordering {
    lp_b.total_cmp(&lp_a)
        .then_with(|| a.len().cmp(&b.len()))
        .then_with(|| a.cmp(b))
}

/// Sorts hypotheses best-first under [`rank_cmp`].
pub fn sort_ranked(hyps: &mut [Hypothesis]) {
    hyps.sort_by(Hypothesis::rank_cmp);
}

/// Source side of a search job: raw whitespace tokens, not tied to the
/// target vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Source {
    tokens: Vec<String>,
    key: String,
}

impl Source {
    pub fn new(tokens: Vec<String>) -> Self {
        let key = tokens.join(" ");
        Self { tokens, key }
    }

    pub fn parse(text: &str) -> Self {
        Self::new(tokenize(text))
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Tokens joined by single spaces; the key models use for lookup.
    pub fn key(&self) -> &str {
        &self.key
    }
}

/// One dataset line: a source and its reference outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetItem {
    pub id: String,
    pub source: Source,
    pub references: Vec<Vec<String>>,
}

/// On-disk shape of a dataset line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetLine {
    pub id: String,
    pub source: String,
    #[serde(default)]
    pub references: Vec<String>,
}

impl From<DatasetLine> for DatasetItem {
    fn from(line: DatasetLine) -> Self {
        Self {
            id: line.id,
            source: Source::parse(&line.source),
            references: line.references.iter().map(|r| tokenize(r)).collect(),
        }
    }
}

impl From<&DatasetItem> for DatasetLine {
    fn from(item: &DatasetItem) -> Self {
        Self {
            id: item.id.clone(),
            source: item.source.key().to_string(),
            references: item.references.iter().map(|r| r.join(" ")).collect(),
        }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: malformed dataset entry: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
}

/// Reads a JSONL dataset. Blank lines are ignored; line numbers are 1-based.
pub fn read_dataset<R: BufRead>(reader: R) -> Result<Vec<DatasetItem>, DatasetError> {
    let mut items = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| DatasetError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: DatasetLine =
            serde_json::from_str(&line).map_err(|e| DatasetError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
        if !seen.insert(parsed.id.clone()) {
            return Err(DatasetError::DuplicateId {
                line: line_no,
                id: parsed.id,
            });
        }
        items.push(parsed.into());
    }
    Ok(items)
}

pub fn load_dataset(path: &Path) -> Result<Vec<DatasetItem>, DatasetError> {
    let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_dataset(std::io::BufReader::new(file))
}

/// Serializes items as JSONL, one line each, in order.
pub fn dataset_to_jsonl(items: &[DatasetItem]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(
            &serde_json::to_string(&DatasetLine::from(item)).expect("dataset line serializes"),
        );
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn abc() -> Vocabulary {
        Vocabulary::new(vec!["a", "b", "</s>"], "</s>").unwrap()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("the cat sat"), vec!["the", "cat", "sat"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("  a  b "), vec!["a", "b"]);
    }

    #[test]
    fn encode_examples() {
        let v = abc();
        assert_eq!(v.encode(&["a", "</s>"]).unwrap().ids(), &[0, 2]);
        assert!(v.encode::<&str>(&[]).unwrap().is_empty());
        assert_eq!(v.encode(&["c"]), Err(SeqError::UnknownToken("c".into(), 0)));
        assert_eq!(
            v.encode(&["a", "c"]),
            Err(SeqError::UnknownToken("c".into(), 1))
        );
    }

    #[test]
    fn vocabulary_rejects_bad_input() {
        assert!(Vocabulary::new(vec!["a", "a", "</s>"], "</s>").is_err());
        assert!(Vocabulary::new(vec!["a", "", "</s>"], "</s>").is_err());
        assert!(Vocabulary::new(vec!["a", "b"], "</s>").is_err());
    }

    #[test]
    fn completeness() {
        let eos = 2;
        assert!(!is_complete(&[], eos));
        assert!(!is_complete(&[0, 1], eos));
        assert!(is_complete(&[0, 2], eos));
        assert!(is_complete(&[2], eos));
        assert!(!is_complete(&[2, 2], eos));
        assert!(!is_complete(&[2, 0], eos));
        let mut s = Sequence::from(vec![0, 1]);
        s.push(eos);
        assert!(s.is_complete(eos));
    }

    #[test]
    fn ranking_order() {
        let better = Hypothesis::new(vec![1, 2], -1.0);
        let worse = Hypothesis::new(vec![0, 2], -2.0);
        assert_eq!(better.rank_cmp(&worse), Ordering::Less);
        // Equal scores: shorter first, then lexicographic.
        let short = Hypothesis::new(vec![2], -1.0);
        assert_eq!(short.rank_cmp(&better), Ordering::Less);
        let ab = Hypothesis::new(vec![0, 1, 2], -1.0);
        let ba = Hypothesis::new(vec![1, 0, 2], -1.0);
        assert_eq!(ab.rank_cmp(&ba), Ordering::Less);
    }

    #[test]
    fn dataset_reading() {
        let text = "{\"id\":\"x\",\"source\":\"s  t\",\"references\":[\"a b\",\" c \"]}\n\n{\"id\":\"y\",\"source\":\"\"}\n";
        let items = read_dataset(text.as_bytes()).unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[0].source.key(), "s t");
        assert_eq!(items[0].references, vec![vec!["a", "b"], vec!["c"]]);
        assert!(items[1].references.is_empty());

        let bad = "{\"id\":\"x\",\"source\":\"s\"}\n{not json\n";
        match read_dataset(bad.as_bytes()) {
            Err(DatasetError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let dup = "{\"id\":\"x\",\"source\":\"s\"}\n{\"id\":\"x\",\"source\":\"t\"}\n";
        assert!(matches!(
            read_dataset(dup.as_bytes()),
            Err(DatasetError::DuplicateId { line: 2, .. })
        ));
    }

    proptest! {
        #[test]
        fn encode_decode_roundtrip(idx in proptest::collection::vec(0usize..3, 0..20)) {
            let v = abc();
            let toks: Vec<String> = idx.iter().map(|&i| v.token(i).unwrap().to_string()).collect();
            let enc = v.encode(&toks).unwrap();
            prop_assert_eq!(v.decode(enc.ids()).unwrap(), toks);
        }
    }
}
