//! Seeded synthetic models with a tunable entropy knob.
//!
//! Every row is an independent Dirichlet(`alpha`) draw over the vocabulary
//! plus eos. Small `alpha` concentrates each row on one token (a "certain"
//! task), large `alpha` flattens rows towards uniform (an "uncertain" task).
//!
//! Randomness comes from PCG-XSH-RR 64/32 (`rand_pcg::Pcg32`, 64-bit state)
//! constructed as `Pcg32::new(seed, stream)`: stream [`MODEL_STREAM`] draws
//! model rows, stream [`REFERENCE_STREAM`] draws dataset references. Gamma
//! variates are taken in log space as
//! `ln G(alpha) = ln G(alpha + 1) + ln(U) / alpha` so rows stay well defined
//! for tiny `alpha`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rand_pcg::Pcg32;
use thiserror::Error;

use super::{ConditionalModel, TableModel};
use crate::seq::{DatasetItem, Source, TokenId, Vocabulary};

pub const SYNTH_EOS: &str = "</s>";
pub const MODEL_STREAM: u64 = 0x6d6f_6465_6c00_0001;
pub const REFERENCE_STREAM: u64 = 0x7265_6673_0000_0002;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    /// Number of ordinary tokens; eos comes on top.
    pub vocab_size: usize,
    pub max_len: usize,
    pub context_order: usize,
    pub alpha: f64,
    pub seed: u64,
    pub num_sources: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("vocab_size must be at least 2, got {0}")]
    VocabTooSmall(usize),
    #[error("max_len must be positive")]
    ZeroMaxLen,
    #[error("alpha must be finite and positive, got {0}")]
    BadAlpha(f64),
    #[error("num_sources must be positive")]
    NoSources,
    #[error("{rows} rows per source is too many (limit {limit})")]
    TooManyRows { rows: u128, limit: u128 },
}

const MAX_ROWS_PER_SOURCE: u128 = 1 << 20;

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.vocab_size < 2 {
            return Err(SynthError::VocabTooSmall(self.vocab_size));
        }
        if self.max_len == 0 {
            return Err(SynthError::ZeroMaxLen);
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(SynthError::BadAlpha(self.alpha));
        }
        if self.num_sources == 0 {
            return Err(SynthError::NoSources);
        }
        let rows = (0..=self.deepest_context())
            .map(|l| (self.vocab_size as u128).pow(l as u32))
            .sum::<u128>();
        if rows > MAX_ROWS_PER_SOURCE {
            return Err(SynthError::TooManyRows {
                rows,
                limit: MAX_ROWS_PER_SOURCE,
            });
        }
        Ok(())
    }

    /// Longest context that is ever looked up: prefixes of length
    /// `max_len` are forced to eos and never reach the table.
    fn deepest_context(&self) -> usize {
        self.context_order.min(self.max_len - 1)
    }

    pub fn vocabulary(&self) -> Vocabulary {
        let mut tokens: Vec<String> = (0..self.vocab_size).map(|i| format!("w{i}")).collect();
        tokens.push(SYNTH_EOS.to_string());
        Vocabulary::new(tokens, SYNTH_EOS).expect("synthetic tokens are distinct")
    }

    pub fn source_key(index: usize) -> String {
        format!("src{index}")
    }
}

/// Draws one Dirichlet row of `size` components.
fn dirichlet_row(rng: &mut Pcg32, alpha: f64, size: usize) -> Vec<f64> {
    let boosted = Gamma::new(alpha + 1.0, 1.0).expect("positive shape");
    let log_gammas: Vec<f64> = (0..size)
        .map(|_| {
            let g: f64 = boosted.sample(rng);
            // U in (0, 1]
            let u: f64 = 1.0 - rng.random::<f64>();
            g.ln() + u.ln() / alpha
        })
        .collect();
    let max = log_gammas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_gammas.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// All token sequences of exactly `len` ordinary tokens, lexicographic.
fn contexts_of_len(vocab_size: usize, len: usize) -> Vec<Vec<TokenId>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|ctx| {
                (0..vocab_size).map(move |t| {
                    let mut next = ctx.clone();
                    next.push(t);
                    next
                })
            })
            .collect();
    }
    out
}

/// Generates a synthetic model: one Dirichlet row per source and per
/// target context reachable before forced termination.
pub fn gen_synthetic(spec: &SynthSpec) -> Result<TableModel, SynthError> {
    spec.validate()?;
    let vocab = spec.vocabulary();
    let mut rng = Pcg32::new(spec.seed, MODEL_STREAM);
    let contexts: Vec<Vec<TokenId>> = (0..=spec.deepest_context())
        .flat_map(|l| contexts_of_len(spec.vocab_size, l))
        .collect();
    let mut sources = BTreeMap::new();
    for s in 0..spec.num_sources {
        let rows = contexts
            .iter()
            .map(|ctx| {
                (
                    ctx.clone(),
                    dirichlet_row(&mut rng, spec.alpha, vocab.len()),
                )
            })
            .collect();
        sources.insert(SynthSpec::source_key(s), rows);
    }
    let mut fallback = vec![0.0; vocab.len()];
    fallback[vocab.eos()] = 1.0;
    Ok(TableModel::from_rows(
        vocab,
        spec.max_len,
        spec.context_order,
        fallback,
        sources,
    ))
}

/// Ancestral sample of one complete sequence.
pub fn sample_sequence<M, R>(model: &M, source: &Source, rng: &mut R) -> Vec<TokenId>
where
    M: ConditionalModel + ?Sized,
    R: Rng + ?Sized,
{
    let eos = model.vocab().eos();
    let mut prefix = Vec::new();
    loop {
        let row = model
            .score_step(source, &prefix)
            .expect("prefix is incomplete");
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = None;
        let mut last_nonzero = eos;
        for (id, lp) in row.iter().enumerate() {
            let p = lp.exp();
            if p > 0.0 {
                last_nonzero = id;
            }
            acc += p;
            if u < acc {
                pick = Some(id);
                break;
            }
        }
        // Rounding can leave the cumulative sum just under u.
        let next = pick.unwrap_or(last_nonzero);
        prefix.push(next);
        if next == eos {
            return prefix;
        }
    }
}

/// Companion dataset for a synthetic model: item `i` uses source `src{i}`
/// and carries `refs_per_source` references sampled from the model.
pub fn synth_dataset(
    model: &TableModel,
    spec: &SynthSpec,
    refs_per_source: usize,
) -> Vec<DatasetItem> {
    let mut rng = Pcg32::new(spec.seed, REFERENCE_STREAM);
    let eos = model.vocab().eos();
    (0..spec.num_sources)
        .map(|i| {
            let source = Source::parse(&SynthSpec::source_key(i));
            let references = (0..refs_per_source)
                .map(|_| {
                    let ids = sample_sequence(model, &source, &mut rng);
                    let body: Vec<TokenId> = ids.into_iter().filter(|&t| t != eos).collect();
                    model
                        .vocab()
                        .decode(&body)
                        .expect("ids come from the model")
                })
                .collect();
            DatasetItem {
                id: format!("item{i:05}"),
                source,
                references,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_model;

    fn spec(alpha: f64) -> SynthSpec {
        SynthSpec {
            vocab_size: 5,
            max_len: 4,
            context_order: 1,
            alpha,
            seed: 7,
            num_sources: 3,
        }
    }

    fn rows(alpha: f64, count: usize) -> Vec<Vec<f64>> {
        let mut rng = Pcg32::new(11, MODEL_STREAM);
        (0..count)
            .map(|_| dirichlet_row(&mut rng, alpha, 6))
            .collect()
    }

    #[test]
    fn spec_bounds() {
        assert_eq!(
            SynthSpec {
                vocab_size: 1,
                ..spec(1.0)
            }
            .validate(),
            Err(SynthError::VocabTooSmall(1))
        );
        assert_eq!(
            SynthSpec {
                max_len: 0,
                ..spec(1.0)
            }
            .validate(),
            Err(SynthError::ZeroMaxLen)
        );
        assert!(matches!(spec(0.0).validate(), Err(SynthError::BadAlpha(_))));
        assert!(matches!(
            spec(f64::NAN).validate(),
            Err(SynthError::BadAlpha(_))
        ));
        assert_eq!(
            SynthSpec {
                num_sources: 0,
                ..spec(1.0)
            }
            .validate(),
            Err(SynthError::NoSources)
        );
        assert!(matches!(
            SynthSpec {
                vocab_size: 50,
                context_order: 6,
                max_len: 10,
                ..spec(1.0)
            }
            .validate(),
            Err(SynthError::TooManyRows { .. })
        ));
    }

    #[test]
    fn small_alpha_concentrates_mass() {
        let sample = rows(0.01, 1000);
        let mean_max = sample
            .iter()
            .map(|r| r.iter().copied().fold(0.0, f64::max))
            .sum::<f64>()
            / 1000.0;
        assert!(mean_max > 0.9, "mean max prob {mean_max}");
    }

    #[test]
    fn large_alpha_entropy_matches_dirichlet_expectation() {
        let sample = rows(5.0, 1000);
        let entropy = |r: &Vec<f64>| {
            -r.iter()
                .filter(|&&p| p > 0.0)
                .map(|p| p * p.ln())
                .sum::<f64>()
        };
        let mean = sample.iter().map(entropy).sum::<f64>() / 1000.0;
        // E[H] for Dirichlet(a,...,a) with K components is
        // digamma(K a + 1) - digamma(a + 1); for integer arguments the
        // difference is a harmonic partial sum: sum_{k=6}^{30} 1/k.
        let analytic: f64 = (6..=30).map(|k| 1.0 / k as f64).sum();
        let uniform = 6f64.ln();
        assert!(
            (mean - uniform).abs() / uniform < 0.10,
            "mean entropy {mean}"
        );
        assert!(
            (mean - analytic).abs() / analytic < 0.02,
            "mean {mean} vs analytic {analytic}"
        );
    }

    #[test]
    fn rows_are_normalized_and_cover_contexts() {
        let m = gen_synthetic(&spec(0.05)).unwrap();
        assert!(validate_model(&m.to_file()).is_empty());
        // root + 5 one-token contexts, for each of 3 sources, plus fallback
        assert_eq!(m.num_rows(), 3 * 6 + 1);
        let src = Source::parse("src1");
        let p = m.probs(&src, &[3, 2]);
        assert_eq!(p, m.probs(&src, &[2]));
    }

    #[test]
    fn deterministic_bytes() {
        let a = gen_synthetic(&spec(0.5)).unwrap().to_json();
        let b = gen_synthetic(&spec(0.5)).unwrap().to_json();
        assert_eq!(a, b);
        let c = gen_synthetic(&SynthSpec {
            seed: 8,
            ..spec(0.5)
        })
        .unwrap()
        .to_json();
        assert_ne!(a, c);
    }

    #[test]
    fn file_roundtrip_preserves_scores() {
        let m = gen_synthetic(&spec(0.05)).unwrap();
        let loaded = TableModel::from_json(&m.to_json(), false).unwrap();
        assert_eq!(m, loaded);
    }

    #[test]
    fn sampled_references() {
        let s = spec(0.5);
        let m = gen_synthetic(&s).unwrap();
        let items = synth_dataset(&m, &s, 4);
        assert_eq!(items.len(), 3);
        for item in &items {
            assert_eq!(item.references.len(), 4);
            for r in &item.references {
                assert!(r.len() <= s.max_len);
                assert!(r.iter().all(|t| t != SYNTH_EOS));
            }
        }
        assert_eq!(items, synth_dataset(&m, &s, 4));
    }
}
