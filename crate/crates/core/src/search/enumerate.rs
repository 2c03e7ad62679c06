use super::{ordered_children, SearchError};
use crate::model::ConditionalModel;
use crate::seq::{sort_ranked, Hypothesis, Source, TokenId};

/// Largest vocabulary (eos included) [`enumerate_all`] accepts.
pub const MAX_ENUM_VOCAB: usize = 6;
/// Largest `max_len` [`enumerate_all`] accepts.
pub const MAX_ENUM_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    /// Every complete sequence of non-zero probability, best first.
    pub hypotheses: Vec<Hypothesis>,
    /// Nodes of the non-zero-probability prefix tree, root and leaves
    /// included.
    pub explored_states: u64,
}

impl Enumeration {
    pub fn total_mass(&self) -> f64 {
        self.hypotheses.iter().map(Hypothesis::prob).sum()
    }
}

/// Lists the whole output space. Scores are accumulated left to right from
/// zero, the same way the searches accumulate them.
pub fn enumerate_counted<M: ConditionalModel + ?Sized>(
    model: &M,
    source: &Source,
) -> Result<Enumeration, SearchError> {
    let vocab = model.vocab().len();
    if vocab > MAX_ENUM_VOCAB || model.max_len() > MAX_ENUM_LEN {
        return Err(SearchError::SpaceTooLarge {
            vocab,
            max_len: model.max_len(),
        });
    }
    let eos = model.vocab().eos();
    let mut out = Vec::new();
    let mut states = 0;
    let mut pending: Vec<(Vec<TokenId>, f64)> = vec![(Vec::new(), 0.0)];
    while let Some((prefix, lp)) = pending.pop() {
        states += 1;
        if prefix.last() == Some(&eos) {
            out.push(Hypothesis::new(prefix, lp));
            continue;
        }
        let row = model.score_step(source, &prefix)?;
        for (tok, step) in ordered_children(&row) {
            let mut child = prefix.clone();
            child.push(tok);
            pending.push((child, lp + step));
        }
    }
    sort_ranked(&mut out);
    Ok(Enumeration {
        hypotheses: out,
        explored_states: states,
    })
}

/// Every complete sequence with its exact log-probability, best first.
/// Zero-probability sequences are left out.
pub fn enumerate_all<M: ConditionalModel + ?Sized>(
    model: &M,
    source: &Source,
) -> Result<Vec<Hypothesis>, SearchError> {
    enumerate_counted(model, source).map(|e| e.hypotheses)
}
