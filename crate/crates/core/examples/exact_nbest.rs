//! Exact n-best search on a seeded synthetic model, checked against full
//! enumeration, with the lower-bound trajectory.

use modeseek::model::{gen_synthetic, SynthSpec};
use modeseek::search::{enumerate_counted, NbestDfs, SearchBudget};
use modeseek::seq::Source;

pub fn run_example() -> anyhow::Result<()> {
    let spec = SynthSpec {
        vocab_size: 4,
        max_len: 5,
        context_order: 2,
        alpha: 0.3,
        seed: 42,
        num_sources: 1,
    };
    let model = gen_synthetic(&spec)?;
    let src = Source::parse(&SynthSpec::source_key(0));

    let all = enumerate_counted(&model, &src)?;
    println!(
        "{} complete sequences, {} nodes, total mass {:.6}",
        all.hypotheses.len(),
        all.explored_states,
        all.total_mass()
    );

    let n = 5;
    let (result, gammas) = NbestDfs::new(n)?
        .budget(SearchBudget::unlimited())
        .run_traced(&model, &src)?;
    println!(
        "n={n}: {} recursive calls (terminated: {})",
        result.explored_states, result.terminated
    );
    for (exact, found) in all.hypotheses.iter().zip(&result.hypotheses) {
        println!("  {:>10.6}  {:?}", found.logprob, found.sequence.ids());
        anyhow::ensure!(
            exact.sequence == found.sequence,
            "mismatch with enumeration"
        );
    }

    let finite: Vec<String> = gammas
        .iter()
        .filter(|g| g.is_finite())
        .map(|g| format!("{g:.3}"))
        .collect();
    println!(
        "gamma raised {} times: {}",
        finite.len(),
        finite.join(" -> ")
    );
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
