//! Every crate example runs to completion.

#[allow(dead_code)]
#[path = "../examples/correlation.rs"]
mod correlation;
#[allow(dead_code)]
#[path = "../examples/exact_nbest.rs"]
mod exact_nbest;
#[allow(dead_code)]
#[path = "../examples/greedy_vs_beam.rs"]
mod greedy_vs_beam;
#[allow(dead_code)]
#[path = "../examples/mass_coverage.rs"]
mod mass_coverage;
#[allow(dead_code)]
#[path = "../examples/search_budget.rs"]
mod search_budget;
#[allow(dead_code)]
#[path = "../examples/synthetic_pipeline.rs"]
mod synthetic_pipeline;
#[allow(dead_code)]
#[path = "../examples/table_model.rs"]
mod table_model;
#[allow(dead_code)]
#[path = "../examples/uncertainty.rs"]
mod uncertainty;

#[test]
fn all_examples_run() {
    greedy_vs_beam::run_example().unwrap();
    exact_nbest::run_example().unwrap();
    uncertainty::run_example().unwrap();
    synthetic_pipeline::run_example().unwrap();
    mass_coverage::run_example().unwrap();
    correlation::run_example().unwrap();
    search_budget::run_example().unwrap();
    table_model::run_example().unwrap();
}
