//! State budgets and beam seeding for exact search.

use modeseek::model::{gen_synthetic, SynthSpec};
use modeseek::search::{beam, NbestDfs, SearchBudget};
use modeseek::seq::Source;

pub fn run_example() -> anyhow::Result<()> {
    let spec = SynthSpec {
        vocab_size: 8,
        max_len: 8,
        context_order: 2,
        alpha: 2.0,
        seed: 1,
        num_sources: 1,
    };
    let model = gen_synthetic(&spec)?;
    let src = Source::parse(&SynthSpec::source_key(0));
    let search = NbestDfs::new(3)?;

    let full = search
        .clone()
        .budget(SearchBudget::unlimited())
        .run(&model, &src)?;
    println!("unlimited: {} states", full.explored_states);

    for cap in [10, 100, full.explored_states] {
        let r = search
            .clone()
            .budget(SearchBudget::states(cap)?)
            .run(&model, &src)?;
        println!(
            "cap {cap:>6}: terminated={} kept {} hypotheses",
            r.terminated,
            r.hypotheses.len()
        );
    }

    let seeds = beam(&model, &src, 3)?.hypotheses;
    let seeded = search
        .clone()
        .budget(SearchBudget::unlimited())
        .seeds(seeds)
        .run(&model, &src)?;
    println!(
        "beam-seeded: {} states, same list: {}",
        seeded.explored_states,
        seeded.hypotheses == full.hypotheses
    );
    anyhow::ensure!(seeded.hypotheses == full.hypotheses);
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
