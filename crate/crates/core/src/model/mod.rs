//! Locally-normalized conditional models.
//!
//! A model maps `(source, prefix)` to a log-probability row over the whole
//! target vocabulary. Every model forces termination: once a prefix holds
//! `max_len` tokens the only continuation is end-of-sentence, so the set of
//! complete outputs is finite and can be enumerated.

use std::borrow::Cow;

use thiserror::Error;

use crate::seq::{is_complete, Source, TokenId, Vocabulary};

mod synth;
mod table;

pub use synth::{gen_synthetic, sample_sequence, synth_dataset, SynthError, SynthSpec, SYNTH_EOS};
pub use table::{
    validate_model, LoadError, ModelFile, TableModel, Violation, NORMALIZATION_TOLERANCE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("prefix is already complete")]
    PrefixComplete,
    #[error("sequence is not complete")]
    IncompleteSequence,
    #[error("sequence of length {len} exceeds the maximum of {max}")]
    TooLong { len: usize, max: usize },
    #[error("token id {0} out of range")]
    BadToken(TokenId),
}

/// Next-token distribution `P(. | prefix, source)`.
pub trait ConditionalModel: Sync {
    fn vocab(&self) -> &Vocabulary;

    /// Number of non-eos tokens after which eos is forced.
    fn max_len(&self) -> usize;

    /// Log-probability row for an incomplete prefix strictly shorter than
    /// [`max_len`](Self::max_len). Callers go through
    /// [`score_step`](Self::score_step), which handles the other cases.
    fn next_logprobs(&self, source: &Source, prefix: &[TokenId]) -> Cow<'_, [f64]>;

    /// Scores every continuation of `prefix`.
    fn score_step(
        &self,
        source: &Source,
        prefix: &[TokenId],
    ) -> Result<Cow<'_, [f64]>, ModelError> {
        let eos = self.vocab().eos();
        if prefix.last() == Some(&eos) {
            return Err(ModelError::PrefixComplete);
        }
        if prefix.len() >= self.max_len() {
            return Ok(Cow::Owned(forced_eos_row(self.vocab().len(), eos)));
        }
        Ok(self.next_logprobs(source, prefix))
    }
}

/// Row with all mass on eos.
pub fn forced_eos_row(size: usize, eos: TokenId) -> Vec<f64> {
    let mut row = vec![f64::NEG_INFINITY; size];
    row[eos] = 0.0;
    row
}

/// Sum of step log-probabilities along a complete sequence, accumulated
/// left to right starting from 0.
pub fn logprob_sequence<M: ConditionalModel + ?Sized>(
    model: &M,
    source: &Source,
    y: &[TokenId],
) -> Result<f64, ModelError> {
    let vocab = model.vocab();
    if let Some(&bad) = y.iter().find(|&&id| id >= vocab.len()) {
        return Err(ModelError::BadToken(bad));
    }
    if !is_complete(y, vocab.eos()) {
        return Err(ModelError::IncompleteSequence);
    }
    if y.len() > model.max_len() + 1 {
        return Err(ModelError::TooLong {
            len: y.len(),
            max: model.max_len() + 1,
        });
    }
    let mut total = 0.0;
    for j in 0..y.len() {
        let row = model.score_step(source, &y[..j])?;
        total += row[y[j]];
    }
    Ok(total)
}
