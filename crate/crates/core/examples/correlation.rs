//! Spearman correlation between reference uncertainty and search behaviour
//! over sources drawn at several concentrations.

use modeseek::analysis::{correlate, count_search_errors, explored_states, Quantity};
use modeseek::metrics::UncertaintyRecord;
use modeseek::model::{gen_synthetic, synth_dataset, ConditionalModel, SynthSpec};
use modeseek::search::{greedy, nbest_dfs, ResultRecord, SearchBudget};

pub fn run_example() -> anyhow::Result<()> {
    let (mut us, mut approx, mut exact) = (Vec::new(), Vec::new(), Vec::new());
    for (j, alpha) in [0.05, 0.3, 1.0, 5.0].into_iter().enumerate() {
        let spec = SynthSpec {
            vocab_size: 4,
            max_len: 6,
            context_order: 1,
            alpha,
            seed: 5 + j as u64,
            num_sources: 25,
        };
        let model = gen_synthetic(&spec)?;
        for mut item in synth_dataset(&model, &spec, 5) {
            item.id = format!("{alpha}/{}", item.id);
            let Ok(u) = UncertaintyRecord::from_item(&item) else {
                continue;
            };
            us.push(u);
            let g = greedy(&model, &item.source)?;
            let e = nbest_dfs(&model, &item.source, 1, SearchBudget::default(), None)?;
            approx.push(ResultRecord::from_search(&item.id, &g, model.vocab())?);
            exact.push(ResultRecord::from_search(&item.id, &e, model.vocab())?);
        }
    }
    let errors = count_search_errors(&approx, &exact)?;
    let rho_err = correlate(&us, &errors.indicators(), Quantity::Errors)?.rho;
    let rho_states = correlate(&us, &explored_states(&exact), Quantity::States)?.rho;
    println!(
        "{} items, greedy error rate {:.2}",
        us.len(),
        errors.error_rate
    );
    println!("rho(u, greedy error)    = {rho_err:+.3}");
    println!("rho(u, explored states) = {rho_states:+.3}");
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
