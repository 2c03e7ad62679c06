use super::{Method, SearchError, SearchResult, Settings};
use crate::model::ConditionalModel;
use crate::seq::{Hypothesis, Source};

/// Picks the most likely token at every step (lowest id on ties).
pub fn greedy<M: ConditionalModel + ?Sized>(
    model: &M,
    source: &Source,
) -> Result<SearchResult, SearchError> {
    let eos = model.vocab().eos();
    let mut prefix = Vec::new();
    let mut logprob = 0.0;
    let mut states = 0;
    loop {
        let row = model.score_step(source, &prefix)?;
        states += 1;
        let (best, step) =
            row.iter()
                .copied()
                .enumerate()
                .fold((eos, f64::NEG_INFINITY), |acc, (id, lp)| {
                    if lp > acc.1 {
                        (id, lp)
                    } else {
                        acc
                    }
                });
        logprob += step;
        prefix.push(best);
        if best == eos {
            break;
        }
    }
    Ok(SearchResult {
        hypotheses: vec![Hypothesis::new(prefix, logprob)],
        explored_states: states,
        terminated: true,
        method: Method::Greedy,
        settings: Settings {
            beam_size: Some(1),
            ..Default::default()
        },
    })
}
