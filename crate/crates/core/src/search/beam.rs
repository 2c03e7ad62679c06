use super::{Method, SearchError, SearchResult, Settings};
use crate::model::ConditionalModel;
use crate::seq::{rank_cmp, sort_ranked, Hypothesis, Source, TokenId};

/// Beam search without length normalization.
///
/// Each step scores every live prefix, ranks all continuations and keeps
/// the `beam_size` best. Kept continuations ending in eos leave the beam
/// and are collected. The search stops when the beam is empty, or once
/// `beam_size` hypotheses are collected and every live prefix scores below
/// the worst of them (no live prefix can then improve the collected list).
pub fn beam<M: ConditionalModel + ?Sized>(
    model: &M,
    source: &Source,
    beam_size: usize,
) -> Result<SearchResult, SearchError> {
    if beam_size == 0 {
        return Err(SearchError::ZeroBeam);
    }
    let eos = model.vocab().eos();
    let mut live: Vec<(Vec<TokenId>, f64)> = vec![(Vec::new(), 0.0)];
    let mut finished: Vec<Hypothesis> = Vec::new();
    let mut states = 0;

    while !live.is_empty() {
        if finished.len() >= beam_size {
            sort_ranked(&mut finished);
            let threshold = finished[beam_size - 1].logprob;
            if live.iter().all(|(_, lp)| *lp < threshold) {
                break;
            }
        }
        let mut candidates: Vec<(Vec<TokenId>, f64)> = Vec::new();
        for (prefix, lp) in &live {
            let row = model.score_step(source, prefix)?;
            states += 1;
            for (tok, step) in row.iter().enumerate() {
                if *step == f64::NEG_INFINITY {
                    continue;
                }
                let mut next = prefix.clone();
                next.push(tok);
                candidates.push((next, lp + step));
            }
        }
        candidates.sort_by(|a, b| rank_cmp(a.1, &a.0, b.1, &b.0));
        candidates.truncate(beam_size);
        live = Vec::with_capacity(candidates.len());
        for (seq, lp) in candidates {
            if seq.last() == Some(&eos) {
                finished.push(Hypothesis::new(seq, lp));
            } else {
                live.push((seq, lp));
            }
        }
    }

    sort_ranked(&mut finished);
    finished.truncate(beam_size);
    Ok(SearchResult {
        hypotheses: finished,
        explored_states: states,
        terminated: true,
        method: Method::Beam,
        settings: Settings {
            beam_size: Some(beam_size),
            ..Default::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::search::{enumerate_all, greedy};

    #[test]
    fn beam_two_finds_garden_path_mode() {
        let r = beam(&fixtures::garden_path(), &fixtures::source(), 2).unwrap();
        let best = r.best().unwrap();
        assert_eq!(best.sequence.ids(), &[1, 4]);
        assert!((best.logprob - 0.4f64.ln()).abs() < 1e-12);
        assert_eq!(r.hypotheses.len(), 2);
    }

    #[test]
    fn beam_one_is_greedy() {
        for m in [
            fixtures::garden_path(),
            fixtures::five_three_two(),
            fixtures::uniform_abc(3),
        ] {
            let b = beam(&m, &fixtures::source(), 1).unwrap();
            let g = greedy(&m, &fixtures::source()).unwrap();
            assert_eq!(b.hypotheses, g.hypotheses);
        }
    }

    #[test]
    fn wide_beam_is_exhaustive() {
        // vocab of 3 and max_len 2: 1 + 2 + 4 = 7 incomplete prefixes, 13 nodes.
        let m = fixtures::five_three_two();
        let all = enumerate_all(&m, &fixtures::source()).unwrap();
        let r = beam(&m, &fixtures::source(), 13).unwrap();
        assert_eq!(r.hypotheses.len(), 7);
        for (a, b) in r.hypotheses.iter().zip(&all) {
            assert_eq!(a.sequence, b.sequence);
            assert!((a.logprob - b.logprob).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_beam_rejected() {
        assert_eq!(
            beam(&fixtures::chain(), &fixtures::source(), 0),
            Err(SearchError::ZeroBeam)
        );
    }
}
