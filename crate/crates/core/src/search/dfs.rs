use super::{ordered_children, Method, SearchBudget, SearchError, SearchResult, Settings};
use crate::model::ConditionalModel;
use crate::seq::{rank_cmp, Hypothesis, Source, TokenId};

type Frame = (Vec<TokenId>, f64, Vec<(TokenId, f64)>, usize);

/// Exact single-best depth-first search.
///
/// Tracks the best complete hypothesis found so far and skips any prefix
/// scoring strictly below it. Prefixes tying the incumbent are still
/// explored so the result is the best sequence under the full ranking
/// order, tie-breaks included.
pub fn dfs<M: ConditionalModel + ?Sized>(
    model: &M,
    source: &Source,
    budget: SearchBudget,
) -> Result<SearchResult, SearchError> {
    let eos = model.vocab().eos();
    let mut best: Option<(Vec<TokenId>, f64)> = None;
    let mut states: u64 = 1;
    let mut terminated = true;

    let root = model.score_step(source, &[])?;
    // (prefix, score, ordered children, next child to visit)
    let mut stack: Vec<Frame> = vec![(Vec::new(), 0.0, ordered_children(&root), 0)];

    'search: while let Some((prefix, lp, children, next)) = stack.last_mut() {
        while *next < children.len() {
            let (tok, step) = children[*next];
            *next += 1;
            let score = *lp + step;
            let bound = best.as_ref().map_or(f64::NEG_INFINITY, |b| b.1);
            if score < bound || score == f64::NEG_INFINITY {
                *next = children.len();
                break;
            }
            if !budget.allows(states) {
                terminated = false;
                break 'search;
            }
            states += 1;
            let mut child = prefix.clone();
            child.push(tok);
            if tok == eos {
                let better = best
                    .as_ref()
                    .is_none_or(|(ids, b)| rank_cmp(score, &child, *b, ids).is_lt());
                if better {
                    best = Some((child, score));
                }
            } else {
                let row = model.score_step(source, &child)?;
                let grandchildren = ordered_children(&row);
                stack.push((child, score, grandchildren, 0));
                continue 'search;
            }
        }
        stack.pop();
    }

    Ok(SearchResult {
        hypotheses: best
            .map(|(ids, lp)| Hypothesis::new(ids, lp))
            .into_iter()
            .collect(),
        explored_states: states,
        terminated,
        method: Method::Dfs,
        settings: Settings {
            n: Some(1),
            max_states: budget.max_states(),
            ..Default::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn finds_garden_path_mode() {
        let r = dfs(
            &fixtures::garden_path(),
            &fixtures::source(),
            SearchBudget::unlimited(),
        )
        .unwrap();
        assert!(r.terminated);
        assert_eq!(r.best().unwrap().sequence.ids(), &[1, 4]);
    }

    #[test]
    fn ties_resolved_by_ranking() {
        // Every sequence of length k has probability 3^-(k+1); the empty
        // output </s> is the unique mode.
        let r = dfs(
            &fixtures::uniform_abc(3),
            &fixtures::source(),
            SearchBudget::unlimited(),
        )
        .unwrap();
        assert_eq!(r.best().unwrap().sequence.ids(), &[2]);
    }

    #[test]
    fn budget_cuts_search() {
        let r = dfs(
            &fixtures::five_three_two(),
            &fixtures::source(),
            SearchBudget::states(1).unwrap(),
        )
        .unwrap();
        assert!(!r.terminated);
        assert!(r.hypotheses.is_empty());
        assert_eq!(r.explored_states, 1);
    }
}
