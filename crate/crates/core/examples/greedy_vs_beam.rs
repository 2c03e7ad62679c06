//! Greedy and beam search on a model where the locally best first step
//! leads away from the mode.

use modeseek::fixtures;
use modeseek::model::ConditionalModel;
use modeseek::search::{beam, enumerate_all, greedy};

pub fn run_example() -> anyhow::Result<()> {
    let model = fixtures::garden_path();
    let src = fixtures::source();
    let show = |ids: &[usize]| model.vocab().decode(ids).unwrap().join(" ");

    for h in enumerate_all(&model, &src)? {
        println!("p={:.2}  {}", h.prob(), show(h.sequence.ids()));
    }

    let g = greedy(&model, &src)?;
    let g_best = g.best().expect("greedy always finishes");
    println!(
        "greedy:  {} (p={:.2}, {} scoring calls)",
        show(g_best.sequence.ids()),
        g_best.prob(),
        g.explored_states
    );

    for b in [1, 2] {
        let r = beam(&model, &src, b)?;
        let best = r.best().expect("non-empty beam");
        println!(
            "beam {b}:  {} (p={:.2})",
            show(best.sequence.ids()),
            best.prob()
        );
    }

    anyhow::ensure!(show(g_best.sequence.ids()) == "a c </s>");
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
