//! Reference-overlap uncertainty, edit distance, length buckets and rank
//! correlation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::{csv_string, read_csv};
use crate::seq::DatasetItem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("need at least 2 references, got {0}")]
    TooFewReferences(usize),
    #[error("all references are empty")]
    AllEmptyReferences,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("bucket boundaries must be strictly increasing and positive")]
    BadBoundaries,
}

/// Token-level Levenshtein distance (unit cost insert, delete, substitute).
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.len() < b.len() {
        return levenshtein(b, a);
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Average pairwise edit distance between references, relative to the
/// average reference length:
///
/// `u = 2 / ((n - 1) * sum_i |y_i|) * sum_{i<j} d(y_i, y_j)`
pub fn uncertainty_u<T: PartialEq>(references: &[Vec<T>]) -> Result<f64, MetricError> {
    let n = references.len();
    if n < 2 {
        return Err(MetricError::TooFewReferences(n));
    }
    let total_len: usize = references.iter().map(Vec::len).sum();
    if total_len == 0 {
        return Err(MetricError::AllEmptyReferences);
    }
    let mut dist_sum = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            dist_sum += levenshtein(&references[i], &references[j]);
        }
    }
    Ok(2.0 * dist_sum as f64 / ((n - 1) as f64 * total_len as f64))
}

/// Per-item uncertainty. One CSV row of the uncertainty report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyRecord {
    pub item_id: String,
    pub n_refs: usize,
    /// Mean reference length in tokens.
    pub avg_ref_len: f64,
    pub u: f64,
}

impl UncertaintyRecord {
    pub fn from_item(item: &DatasetItem) -> Result<Self, MetricError> {
        let u = uncertainty_u(&item.references)?;
        let n = item.references.len();
        let total: usize = item.references.iter().map(Vec::len).sum();
        Ok(Self {
            item_id: item.id.clone(),
            n_refs: n,
            avg_ref_len: total as f64 / n as f64,
            u,
        })
    }
}

pub const UNCERTAINTY_HEADER: [&str; 4] = ["item_id", "n_refs", "avg_ref_len", "u"];
pub const BUCKET_HEADER: [&str; 5] = ["bucket_lo", "bucket_hi", "count", "mean", "sem"];

pub fn uncertainty_csv(records: &[UncertaintyRecord]) -> String {
    csv_string(&UNCERTAINTY_HEADER, records)
}

pub fn read_uncertainty_csv<R: std::io::Read>(
    reader: R,
) -> Result<Vec<UncertaintyRecord>, csv::Error> {
    read_csv(reader)
}

/// The open-ended last bucket has an empty `bucket_hi` field.
pub fn buckets_csv(stats: &[BucketStat]) -> String {
    csv_string(&BUCKET_HEADER, stats)
}

/// Default length bucket boundaries: [0,10), [10,20), [20,30), [30,40), [40,inf).
pub const DEFAULT_BUCKETS: [u64; 4] = [10, 20, 30, 40];

/// Mean and standard error of the values whose length falls in
/// `[lo, hi)`; `hi` is `None` for the open-ended last bucket. Empty buckets
/// report zero mean and zero SEM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketStat {
    pub bucket_lo: u64,
    pub bucket_hi: Option<u64>,
    pub count: usize,
    pub mean: f64,
    pub sem: f64,
}

/// Groups `(length, value)` pairs by length and summarizes each group.
/// SEM uses the n-1 sample standard deviation and is zero for one value.
pub fn bucketize(
    values: &[(f64, f64)],
    boundaries: &[u64],
) -> Result<Vec<BucketStat>, MetricError> {
    if boundaries.first() == Some(&0) || boundaries.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MetricError::BadBoundaries);
    }
    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); boundaries.len() + 1];
    for &(len, v) in values {
        let idx = boundaries.partition_point(|&b| b as f64 <= len);
        groups[idx].push(v);
    }
    Ok(groups
        .into_iter()
        .enumerate()
        .map(|(i, g)| {
            let lo = if i == 0 { 0 } else { boundaries[i - 1] };
            let hi = boundaries.get(i).copied();
            let count = g.len();
            let (mean, sem) = mean_sem(&g);
            BucketStat {
                bucket_lo: lo,
                bucket_hi: hi,
                count,
                mean,
                sem,
            }
        })
        .collect())
}

fn mean_sem(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt() / (n as f64).sqrt())
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
    if x.len() != y.len() {
        return Err(MetricError::DegenerateInput(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(MetricError::DegenerateInput("need at least 2 pairs".into()));
    }
    if x.iter().any(|v| v.is_nan()) || y.iter().any(|v| v.is_nan()) {
        return Err(MetricError::DegenerateInput("NaN value".into()));
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(MetricError::DegenerateInput(
            "first variable is constant".into(),
        ));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(MetricError::DegenerateInput(
            "second variable is constant".into(),
        ));
    }
    Ok(pearson(&average_ranks(x), &average_ranks(y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        crate::seq::tokenize(s)
    }

    /// Full-table DP, kept separate from the two-row version under test.
    fn levenshtein_table(a: &[u8], b: &[u8]) -> usize {
        let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in d.iter_mut().enumerate() {
            row[0] = i;
        }
        for (j, cell) in d[0].iter_mut().enumerate() {
            *cell = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let cost = if a[i - 1] == b[j - 1] { 0 } else { 1 };
                d[i][j] = (d[i - 1][j] + 1)
                    .min(d[i][j - 1] + 1)
                    .min(d[i - 1][j - 1] + cost);
            }
        }
        d[a.len()][b.len()]
    }

    /// First form of the definition: (pairwise mean distance) / (mean length).
    fn u_direct(refs: &[Vec<u8>]) -> f64 {
        let n = refs.len() as f64;
        let avg_len = refs.iter().map(|r| r.len() as f64).sum::<f64>() / n;
        let mut total = 0.0;
        for i in 0..refs.len() {
            for j in i + 1..refs.len() {
                total += levenshtein_table(&refs[i], &refs[j]) as f64;
            }
        }
        (total / (n * (n - 1.0) / 2.0)) / avg_len
    }

    #[test]
    fn levenshtein_examples() {
        let a = toks("k i t t e n");
        let b = toks("s i t t i n g");
        assert_eq!(levenshtein_table(b"kitten", b"sitting"), 3);
        assert_eq!(levenshtein(&a, &b), 3);
        assert_eq!(levenshtein(&a, &a), 0);
        assert_eq!(levenshtein(&[] as &[String], &b), 7);
    }

    #[test]
    fn uncertainty_examples() {
        assert_eq!(uncertainty_u(&[toks("a b"), toks("a b")]).unwrap(), 0.0);
        let u = uncertainty_u(&[toks("a b c"), toks("a b d")]).unwrap();
        assert!((u - 1.0 / 3.0).abs() < 1e-12);
        let u = uncertainty_u(&[toks("a"), toks("b"), toks("a b")]).unwrap();
        assert!((u - 0.75).abs() < 1e-12);
    }

    #[test]
    fn uncertainty_errors() {
        assert_eq!(
            uncertainty_u(&[toks("a")]),
            Err(MetricError::TooFewReferences(1))
        );
        assert_eq!(
            uncertainty_u::<String>(&[vec![], vec![]]),
            Err(MetricError::AllEmptyReferences)
        );
        // one empty reference is fine
        assert_eq!(uncertainty_u(&[toks("a b"), vec![]]).unwrap(), 2.0);
    }

    #[test]
    fn csv_reports() {
        let recs = vec![UncertaintyRecord {
            item_id: "a".into(),
            n_refs: 2,
            avg_ref_len: 3.0,
            u: 1.0 / 3.0,
        }];
        let text = uncertainty_csv(&recs);
        assert_eq!(
            text,
            "item_id,n_refs,avg_ref_len,u\na,2,3.0,0.3333333333333333\n"
        );
        assert_eq!(read_uncertainty_csv(text.as_bytes()).unwrap(), recs);
        assert_eq!(uncertainty_csv(&[]), "item_id,n_refs,avg_ref_len,u\n");
        let b = bucketize(&[(5.0, 1.0), (5.0, 3.0)], &[10]).unwrap();
        assert_eq!(
            buckets_csv(&b),
            "bucket_lo,bucket_hi,count,mean,sem\n0,10,2,2.0,1.0\n10,,0,0.0,0.0\n"
        );
    }

    #[test]
    fn bucket_examples() {
        let b = bucketize(&[(5.0, 1.0), (5.0, 3.0)], &[10]).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(
            (b[0].bucket_lo, b[0].bucket_hi, b[0].count),
            (0, Some(10), 2)
        );
        assert!((b[0].mean - 2.0).abs() < 1e-12 && (b[0].sem - 1.0).abs() < 1e-12);
        assert_eq!((b[1].bucket_lo, b[1].bucket_hi, b[1].count), (10, None, 0));

        let b = bucketize(&[(12.0, 4.0)], &DEFAULT_BUCKETS).unwrap();
        assert_eq!(b.len(), 5);
        assert_eq!((b[1].count, b[1].mean, b[1].sem), (1, 4.0, 0.0));

        let b = bucketize(&[], &DEFAULT_BUCKETS).unwrap();
        assert!(b.iter().all(|s| s.count == 0));

        // boundary value belongs to the upper bucket
        let b = bucketize(&[(10.0, 1.0), (9.99, 1.0), (100.0, 1.0)], &[10, 20]).unwrap();
        assert_eq!(b.iter().map(|s| s.count).collect::<Vec<_>>(), vec![1, 1, 1]);

        assert_eq!(bucketize(&[], &[10, 10]), Err(MetricError::BadBoundaries));
        assert_eq!(bucketize(&[], &[0, 10]), Err(MetricError::BadBoundaries));
    }

    /// Rank oracle: ranks by counting smaller and equal elements.
    fn brute_ranks(v: &[f64]) -> Vec<f64> {
        v.iter()
            .map(|x| {
                let less = v.iter().filter(|y| *y < x).count() as f64;
                let eq = v.iter().filter(|y| *y == x).count() as f64;
                less + (eq + 1.0) / 2.0
            })
            .collect()
    }

    #[test]
    fn spearman_examples() {
        assert!((spearman_rho(&[1., 2., 3.], &[10., 20., 30.]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman_rho(&[1., 2., 3.], &[3., 2., 1.]).unwrap() + 1.0).abs() < 1e-12);
        // ranks equal values here; 1 - 6*sum(d^2)/(n(n^2-1)) = 1 - 6*4/60 = 0.6
        let x = [1., 2., 3., 4.];
        let y = [2., 1., 4., 3.];
        assert_eq!(brute_ranks(&y), vec![2., 1., 4., 3.]);
        assert!((spearman_rho(&x, &y).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn spearman_degenerate() {
        assert!(matches!(
            spearman_rho(&[1., 1.], &[1., 2.]),
            Err(MetricError::DegenerateInput(_))
        ));
        assert!(matches!(
            spearman_rho(&[1., 2.], &[5., 5.]),
            Err(MetricError::DegenerateInput(_))
        ));
        assert!(matches!(
            spearman_rho(&[1.], &[1.]),
            Err(MetricError::DegenerateInput(_))
        ));
        assert!(matches!(
            spearman_rho(&[1., 2.], &[1.]),
            Err(MetricError::DegenerateInput(_))
        ));
    }

    proptest! {
        #[test]
        fn levenshtein_axioms(
            a in proptest::collection::vec(0u8..4, 0..8),
            b in proptest::collection::vec(0u8..4, 0..8),
            c in proptest::collection::vec(0u8..4, 0..8),
        ) {
            let ab = levenshtein(&a, &b);
            prop_assert_eq!(ab, levenshtein_table(&a, &b));
            prop_assert_eq!(ab, levenshtein(&b, &a));
            prop_assert_eq!(ab == 0, a == b);
            prop_assert!(levenshtein(&a, &c) <= ab + levenshtein(&b, &c));
        }

        #[test]
        fn u_matches_direct_definition(
            refs in proptest::collection::vec(proptest::collection::vec(0u8..4, 1..7), 2..6),
        ) {
            let u = uncertainty_u(&refs).unwrap();
            prop_assert!((u - u_direct(&refs)).abs() < 1e-12);
            prop_assert!(u >= 0.0);
            prop_assert_eq!(u == 0.0, refs.iter().all(|r| r == &refs[0]));
            let mut rev = refs.clone();
            rev.reverse();
            rev.rotate_left(1);
            prop_assert!((uncertainty_u(&rev).unwrap() - u).abs() < 1e-12);
        }

        #[test]
        fn u_of_expanded_tokens_matches_direct(
            refs in proptest::collection::vec(proptest::collection::vec(0u8..4, 1..5), 2..5),
            k in 1usize..4,
        ) {
            // Each token becomes k distinct position-tagged tokens.
            let expanded: Vec<Vec<u8>> = refs
                .iter()
                .map(|r| r.iter().flat_map(|&t| (0..k as u8).map(move |p| t * 4 + p)).collect())
                .collect();
            prop_assert!((uncertainty_u(&expanded).unwrap() - u_direct(&expanded)).abs() < 1e-12);
        }

        #[test]
        fn ranks_match_brute_force(v in proptest::collection::vec(0i32..6, 1..12)) {
            let v: Vec<f64> = v.into_iter().map(f64::from).collect();
            prop_assert_eq!(average_ranks(&v), brute_ranks(&v));
        }

        #[test]
        fn spearman_invariant_under_monotone_maps(
            pairs in proptest::collection::vec((0i32..20, 0i32..20), 3..15),
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
            let y: Vec<f64> = pairs.iter().map(|p| f64::from(p.1)).collect();
            if let Ok(rho) = spearman_rho(&x, &y) {
                prop_assert!((-1.0..=1.0).contains(&rho));
                let fx: Vec<f64> = x.iter().map(|v| v.powi(3) + 2.0 * v).collect();
                let gy: Vec<f64> = y.iter().map(|v| (v + 1.0).ln()).collect();
                prop_assert!((spearman_rho(&fx, &gy).unwrap() - rho).abs() < 1e-12);
            }
        }
    }
}
