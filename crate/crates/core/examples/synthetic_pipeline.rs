//! End-to-end run of the command-line pipeline from a single seed:
//! synth, uncertainty, decode, exact and analyze, in a scratch directory.

use modeseek::cli::main_with_args;

pub fn run_example() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let (model, data) = (p("model.json"), p("data.jsonl"));

    let steps: Vec<Vec<String>> = vec![
        vec![
            "synth",
            "--model",
            &model,
            "--dataset",
            &data,
            "--alpha",
            "0.2",
            "--seed",
            "3",
            "--num-sources",
            "20",
        ],
        vec!["uncertainty", "--dataset", &data, "--out", &p("u.csv")],
        vec![
            "decode",
            "--model",
            &model,
            "--dataset",
            &data,
            "--method",
            "greedy",
            "--out",
            &p("greedy.jsonl"),
        ],
        vec![
            "exact",
            "--model",
            &model,
            "--dataset",
            &data,
            "--nbest",
            "10",
            "--jobs",
            "4",
            "--out",
            &p("exact.jsonl"),
        ],
        vec![
            "analyze",
            "errors",
            "--approx",
            &p("greedy.jsonl"),
            "--exact",
            &p("exact.jsonl"),
            "--out",
            &p("errors.csv"),
        ],
        vec![
            "analyze",
            "mass",
            "--results",
            &p("exact.jsonl"),
            "--nbest",
            "10",
            "--out",
            &p("mass.csv"),
        ],
        vec![
            "analyze",
            "correlate",
            "--uncertainty",
            &p("u.csv"),
            "--which",
            "mass",
            "--results",
            &p("exact.jsonl"),
            "--nbest",
            "10",
            "--out",
            &p("corr.csv"),
        ],
    ]
    .into_iter()
    .map(|s| s.into_iter().map(str::to_owned).collect())
    .collect();

    for step in steps {
        let args = std::iter::once("modeseek".to_owned()).chain(step.iter().cloned());
        let code = main_with_args(args);
        anyhow::ensure!(code == 0, "{} exited with {code}", step[0]);
    }
    print!(
        "{}",
        std::fs::read_to_string(p("errors.csv"))?
            .lines()
            .take(4)
            .collect::<Vec<_>>()
            .join("\n")
    );
    println!();
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
