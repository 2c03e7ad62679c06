//! Intrinsic uncertainty of reference sets and length-bucketed summaries.

use modeseek::metrics::{bucketize, buckets_csv, levenshtein, uncertainty_u, DEFAULT_BUCKETS};
use modeseek::seq::tokenize;

pub fn run_example() -> anyhow::Result<()> {
    let d = levenshtein(&tokenize("the cat sat down"), &tokenize("a cat sat"));
    println!("token edit distance: {d}");

    let sets: [&[&str]; 3] = [
        &["the cat sat", "the cat sat"],
        &["the cat sat", "the cat sat down"],
        &["the cat sat", "dogs run fast", "a bird"],
    ];
    let mut by_len = Vec::new();
    for refs in sets {
        let toks: Vec<Vec<String>> = refs.iter().map(|r| tokenize(r)).collect();
        let u = uncertainty_u(&toks)?;
        let avg_len = toks.iter().map(Vec::len).sum::<usize>() as f64 / toks.len() as f64;
        println!("u={u:.4} avg_len={avg_len:.2} refs={refs:?}");
        by_len.push((avg_len * 5.0, u));
    }

    let stats = bucketize(&by_len, &DEFAULT_BUCKETS)?;
    print!("{}", buckets_csv(&stats));
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
