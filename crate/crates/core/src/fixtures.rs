//! Small hand-built models with known answers, used by tests and examples.
//!
//! All fixtures answer for the source `"x"`; the prefix-independent ones
//! answer for any source through their fallback row.

use crate::model::TableModel;
use crate::seq::Source;

pub const SOURCE: &str = "x";

pub fn source() -> Source {
    Source::parse(SOURCE)
}

fn build(json: &str) -> TableModel {
    TableModel::from_json(json, false).expect("fixture model is valid")
}

/// Every row uniform over `a`, `b`, `</s>`.
pub fn uniform_abc(max_len: usize) -> TableModel {
    let third = 1.0 / 3.0;
    build(&format!(
        r#"{{"vocab":["a","b","</s>"],"eos":"</s>","context_order":0,"max_len":{max_len},
            "fallback":{{"a":{third},"b":{third},"</s>":{third}}},"sources":{{}}}}"#
    ))
}

/// Prefix-independent row `{a: 0.5, b: 0.3, </s>: 0.2}` with `max_len = 2`.
/// Seven complete sequences; the top three are `a a </s>` (0.25),
/// `</s>` (0.2) and `a b </s>` (0.15, tied with `b a </s>`).
pub fn five_three_two() -> TableModel {
    build(
        r#"{"vocab":["a","b","</s>"],"eos":"</s>","context_order":0,"max_len":2,
            "fallback":{"a":0.5,"b":0.3,"</s>":0.2},"sources":{}}"#,
    )
}

/// Greedy is lured into `a` (0.6) but the mode is `b </s>` (0.4):
/// after `a` the mass splits evenly between `c` and `d`.
pub fn garden_path() -> TableModel {
    build(
        r#"{"vocab":["a","b","c","d","</s>"],"eos":"</s>","context_order":1,"max_len":2,
            "fallback":{"</s>":1.0},
            "sources":{"x":{"":{"a":0.6,"b":0.4},"a":{"c":0.5,"d":0.5},"b":{"</s>":1.0}}}}"#,
    )
}

/// Deterministic chain `a b </s>` with probability one.
pub fn chain() -> TableModel {
    build(
        r#"{"vocab":["a","b","</s>"],"eos":"</s>","context_order":1,"max_len":3,
            "fallback":{"</s>":1.0},
            "sources":{"x":{"":{"a":1.0},"a":{"b":1.0},"b":{"</s>":1.0}}}}"#,
    )
}
