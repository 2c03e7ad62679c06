//! How much probability the exact and beam n-best lists cover on a peaked
//! and a flat model.

use modeseek::model::{gen_synthetic, ConditionalModel, SynthSpec};
use modeseek::search::{beam, nbest_dfs, SearchBudget};
use modeseek::seq::Source;

pub fn run_example() -> anyhow::Result<()> {
    for alpha in [0.05, 5.0] {
        let spec = SynthSpec {
            vocab_size: 5,
            max_len: 6,
            context_order: 1,
            alpha,
            seed: 8,
            num_sources: 30,
        };
        let model = gen_synthetic(&spec)?;
        let (mut exact_sum, mut beam_sum) = (0.0, 0.0);
        let n = 10;
        for i in 0..spec.num_sources {
            let src = Source::parse(&SynthSpec::source_key(i));
            let e = nbest_dfs(&model, &src, n, SearchBudget::default(), None)?;
            let b = beam(&model, &src, n)?;
            exact_sum += e.hypotheses.iter().map(|h| h.prob()).sum::<f64>();
            beam_sum += b.hypotheses.iter().take(n).map(|h| h.prob()).sum::<f64>();
        }
        let k = spec.num_sources as f64;
        println!(
            "alpha={alpha:<5} |V|={} mean {n}-best mass: exact {:.4}, beam {:.4}",
            model.vocab().len(),
            exact_sum / k,
            beam_sum / k
        );
        anyhow::ensure!(exact_sum >= beam_sum - 1e-9);
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
