use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use super::{ordered_children, Method, SearchBudget, SearchError, SearchResult, Settings};
use crate::model::{logprob_sequence, ConditionalModel};
use crate::seq::{is_complete, rank_cmp, Hypothesis, Source, TokenId};

/// Seeds must re-score to their stated log-probability within this bound.
const SEED_TOLERANCE: f64 = 1e-9;

/// Heap entry ordered so that the worst hypothesis is the maximum.
#[derive(Debug)]
struct Ranked {
    logprob: f64,
    ids: Vec<TokenId>,
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        rank_cmp(self.logprob, &self.ids, other.logprob, &other.ids)
    }
}

/// The n best complete hypotheses seen so far plus the pruning bound.
///
/// `gamma` starts at minus infinity and becomes the score of the
/// hypothesis displaced whenever the queue overflows past `n`.
struct NbestQueue {
    n: usize,
    heap: BinaryHeap<Ranked>,
    members: HashSet<Vec<TokenId>>,
    gamma: f64,
    trace: Vec<f64>,
}

impl NbestQueue {
    fn new(n: usize) -> Self {
        Self {
            n,
            heap: BinaryHeap::with_capacity(n + 1),
            members: HashSet::new(),
            gamma: f64::NEG_INFINITY,
            trace: vec![f64::NEG_INFINITY],
        }
    }

    fn push(&mut self, ids: Vec<TokenId>, logprob: f64) {
        // A seed may be rediscovered by the search.
        if !self.members.insert(ids.clone()) {
            return;
        }
        self.heap.push(Ranked { logprob, ids });
        if self.heap.len() > self.n {
            let worst = self.heap.pop().expect("non-empty");
            self.members.remove(&worst.ids);
            self.gamma = worst.logprob;
            self.trace.push(self.gamma);
        }
    }

    fn into_sorted(self) -> Vec<Hypothesis> {
        self.heap
            .into_sorted_vec()
            .into_iter()
            .map(|r| Hypothesis::new(r.ids, r.logprob))
            .collect()
    }
}

struct Frame {
    logprob: f64,
    children: Vec<(TokenId, f64)>,
    next: usize,
}

/// Lower-bound trajectory recorded by [`NbestDfs::run_traced`]: the initial
/// minus infinity followed by every update.
pub type NbestTrace = Vec<f64>;

/// Exact n-best depth-first search.
///
/// The search walks the prefix tree depth first and keeps the `n` best
/// complete hypotheses found so far in a priority queue. A child prefix is
/// visited only if its score is strictly greater than the current bound;
/// since extending a prefix can only lower its score, everything below a
/// rejected child is skipped. With an unlimited budget the result is the
/// exact top `n` under [`rank_cmp`], except that a candidate scoring
/// exactly the bound is pruned, which can swap members of an exact score
/// tie at rank `n`.
///
/// `explored_states` counts visited nodes of the prefix tree, root and
/// complete leaves included.
#[derive(Debug, Clone)]
pub struct NbestDfs {
    n: usize,
    budget: SearchBudget,
    seeds: Vec<Hypothesis>,
}

impl NbestDfs {
    pub fn new(n: usize) -> Result<Self, SearchError> {
        if n == 0 {
            return Err(SearchError::ZeroN);
        }
        Ok(Self {
            n,
            budget: SearchBudget::default(),
            seeds: Vec::new(),
        })
    }

    pub fn budget(mut self, budget: SearchBudget) -> Self {
        self.budget = budget;
        self
    }

    /// Complete hypotheses (e.g. a beam search n-best list) used to fill the
    /// queue before searching. They can only tighten the bound earlier.
    pub fn seeds(mut self, seeds: Vec<Hypothesis>) -> Self {
        self.seeds = seeds;
        self
    }

    pub fn run<M: ConditionalModel + ?Sized>(
        &self,
        model: &M,
        source: &Source,
    ) -> Result<SearchResult, SearchError> {
        self.run_traced(model, source).map(|(r, _)| r)
    }

    pub fn run_traced<M: ConditionalModel + ?Sized>(
        &self,
        model: &M,
        source: &Source,
    ) -> Result<(SearchResult, NbestTrace), SearchError> {
        let eos = model.vocab().eos();
        let mut queue = NbestQueue::new(self.n);
        for (index, seed) in self.seeds.iter().enumerate() {
            let ids = seed.sequence.ids();
            if !is_complete(ids, eos) {
                return Err(SearchError::InvalidSeed {
                    index,
                    reason: "not a complete sequence".into(),
                });
            }
            let rescored =
                logprob_sequence(model, source, ids).map_err(|e| SearchError::InvalidSeed {
                    index,
                    reason: e.to_string(),
                })?;
            let diff = (rescored - seed.logprob).abs();
            if rescored == f64::NEG_INFINITY || diff.is_nan() || diff > SEED_TOLERANCE {
                return Err(SearchError::InvalidSeed {
                    index,
                    reason: format!(
                        "stated log-probability {} but model gives {rescored}",
                        seed.logprob
                    ),
                });
            }
            queue.push(ids.to_vec(), rescored);
        }

        let mut states: u64 = 1;
        let mut terminated = true;
        let mut prefix: Vec<TokenId> = Vec::new();
        let root = model.score_step(source, &prefix)?;
        let mut stack = vec![Frame {
            logprob: 0.0,
            children: ordered_children(&root),
            next: 0,
        }];

        while let Some(frame) = stack.last_mut() {
            let Some(&(tok, step)) = frame.children.get(frame.next) else {
                stack.pop();
                prefix.pop();
                continue;
            };
            frame.next += 1;
            let logprob = frame.logprob + step;
            if logprob <= queue.gamma {
                // Children are sorted, so every later sibling fails too.
                frame.next = frame.children.len();
                continue;
            }
            if !self.budget.allows(states) {
                terminated = false;
                break;
            }
            states += 1;
            prefix.push(tok);
            if tok == eos {
                queue.push(prefix.clone(), logprob);
                prefix.pop();
            } else {
                let row = model.score_step(source, &prefix)?;
                stack.push(Frame {
                    logprob,
                    children: ordered_children(&row),
                    next: 0,
                });
            }
        }

        let settings = Settings {
            n: Some(self.n),
            max_states: self.budget.max_states(),
            ..Default::default()
        };
        let trace = std::mem::take(&mut queue.trace);
        let result = SearchResult {
            hypotheses: queue.into_sorted(),
            explored_states: states,
            terminated,
            method: Method::NbestDfs,
            settings,
        };
        Ok((result, trace))
    }
}

/// Exact n-best search with the given budget and optional seeds.
pub fn nbest_dfs<M: ConditionalModel + ?Sized>(
    model: &M,
    source: &Source,
    n: usize,
    budget: SearchBudget,
    seeds: Option<Vec<Hypothesis>>,
) -> Result<SearchResult, SearchError> {
    NbestDfs::new(n)?
        .budget(budget)
        .seeds(seeds.unwrap_or_default())
        .run(model, source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::search::{beam, dfs, enumerate_counted};

    fn ids(r: &SearchResult) -> Vec<Vec<TokenId>> {
        r.hypotheses
            .iter()
            .map(|h| h.sequence.ids().to_vec())
            .collect()
    }

    #[test]
    fn top_three_of_seven() {
        let m = fixtures::five_three_two();
        let r = nbest_dfs(&m, &fixtures::source(), 3, SearchBudget::unlimited(), None).unwrap();
        assert!(r.terminated);
        assert_eq!(ids(&r), vec![vec![0, 0, 2], vec![2], vec![0, 1, 2]]);
        let probs: Vec<f64> = r.hypotheses.iter().map(Hypothesis::prob).collect();
        for (p, want) in probs.iter().zip([0.25, 0.2, 0.15]) {
            assert!((p - want).abs() < 1e-12);
        }
    }

    #[test]
    fn n_one_matches_single_best() {
        for m in [
            fixtures::garden_path(),
            fixtures::five_three_two(),
            fixtures::chain(),
            fixtures::uniform_abc(3),
        ] {
            let a = nbest_dfs(&m, &fixtures::source(), 1, SearchBudget::unlimited(), None).unwrap();
            let b = dfs(&m, &fixtures::source(), SearchBudget::unlimited()).unwrap();
            assert_eq!(a.hypotheses, b.hypotheses);
        }
    }

    #[test]
    fn tiny_budget_stops_early() {
        let m = fixtures::five_three_two();
        let r = nbest_dfs(
            &m,
            &fixtures::source(),
            3,
            SearchBudget::states(2).unwrap(),
            None,
        )
        .unwrap();
        assert!(!r.terminated);
        assert_eq!(r.explored_states, 2);
        assert!(r.hypotheses.is_empty());

        let r = nbest_dfs(
            &m,
            &fixtures::source(),
            3,
            SearchBudget::states(4).unwrap(),
            None,
        )
        .unwrap();
        assert!(!r.terminated);
        // root, a, a a, a a </s>
        assert_eq!(ids(&r), vec![vec![0, 0, 2]]);
    }

    #[test]
    fn budget_equal_to_need_terminates() {
        let m = fixtures::five_three_two();
        let full = nbest_dfs(&m, &fixtures::source(), 3, SearchBudget::unlimited(), None).unwrap();
        let exact = SearchBudget::states(full.explored_states).unwrap();
        let r = nbest_dfs(&m, &fixtures::source(), 3, exact, None).unwrap();
        assert!(r.terminated);
        assert_eq!(r.hypotheses, full.hypotheses);
    }

    #[test]
    fn seeding_is_neutral() {
        let m = fixtures::garden_path();
        let src = fixtures::source();
        let seeds = beam(&m, &src, 2).unwrap().hypotheses;
        for n in 1..=3 {
            let plain = nbest_dfs(&m, &src, n, SearchBudget::unlimited(), None).unwrap();
            let seeded =
                nbest_dfs(&m, &src, n, SearchBudget::unlimited(), Some(seeds.clone())).unwrap();
            assert_eq!(plain.hypotheses, seeded.hypotheses);
            assert!(seeded.explored_states <= plain.explored_states);
        }
    }

    #[test]
    fn bad_seeds_rejected() {
        let m = fixtures::garden_path();
        let src = fixtures::source();
        let incomplete = Hypothesis::new(vec![0, 2], 0.3f64.ln());
        let wrong_score = Hypothesis::new(vec![1, 4], -0.1);
        let impossible = Hypothesis::new(vec![2, 4], f64::NEG_INFINITY);
        for seed in [incomplete, wrong_score, impossible] {
            let err =
                nbest_dfs(&m, &src, 1, SearchBudget::unlimited(), Some(vec![seed])).unwrap_err();
            assert!(
                matches!(err, SearchError::InvalidSeed { index: 0, .. }),
                "{err:?}"
            );
        }
    }

    #[test]
    fn gamma_trace_is_monotone() {
        let m = fixtures::five_three_two();
        let (r, trace) = NbestDfs::new(3)
            .unwrap()
            .budget(SearchBudget::unlimited())
            .run_traced(&m, &fixtures::source())
            .unwrap();
        assert!(trace.windows(2).all(|w| w[0] <= w[1]));
        assert!(*trace.last().unwrap() <= r.hypotheses[2].logprob);
    }

    #[test]
    fn visits_no_more_than_enumeration() {
        let m = fixtures::five_three_two();
        let all = enumerate_counted(&m, &fixtures::source()).unwrap();
        for n in 1..=8 {
            let r = nbest_dfs(&m, &fixtures::source(), n, SearchBudget::unlimited(), None).unwrap();
            assert!(r.explored_states <= all.explored_states);
        }
        let r = nbest_dfs(&m, &fixtures::source(), 7, SearchBudget::unlimited(), None).unwrap();
        assert_eq!(r.explored_states, all.explored_states);
    }

    #[test]
    fn zero_n_rejected() {
        assert_eq!(NbestDfs::new(0).unwrap_err(), SearchError::ZeroN);
    }
}
