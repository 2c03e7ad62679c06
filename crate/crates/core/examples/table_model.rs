//! Writing a conditional probability table by hand: validation, backoff
//! and renormalization.

use modeseek::model::{logprob_sequence, validate_model, ConditionalModel, ModelFile, TableModel};
use modeseek::seq::Source;

const MODEL: &str = r#"{
  "vocab": ["yes", "no", "</s>"],
  "eos": "</s>",
  "context_order": 1,
  "max_len": 3,
  "fallback": {"</s>": 1.0},
  "sources": {
    "question": {
      "": {"yes": 0.7, "no": 0.2, "</s>": 0.1},
      "no": {"no": 0.5, "</s>": 0.4}
    }
  }
}"#;

pub fn run_example() -> anyhow::Result<()> {
    let file: ModelFile = serde_json::from_str(MODEL)?;
    for v in validate_model(&file) {
        println!("violation: {v}");
    }
    anyhow::ensure!(TableModel::from_file(&file, false).is_err());

    let model = TableModel::from_file(&file, true)?;
    let src = Source::parse("question");
    for text in ["yes </s>", "no no </s>", "no </s>"] {
        let ids = model.vocab().encode(&text.split(' ').collect::<Vec<_>>())?;
        println!(
            "P({text}) = {:.4}",
            logprob_sequence(&model, &src, ids.ids())?.exp()
        );
    }
    // "yes" has no row of its own and backs off to the empty context.
    println!("after 'yes': {:?}", model.probs(&src, &[0]));
    // Unknown sources only see the fallback row.
    println!(
        "unknown source: {:?}",
        model.probs(&Source::parse("other"), &[])
    );
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
