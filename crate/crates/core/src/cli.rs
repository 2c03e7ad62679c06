//! Batch front end: `uncertainty`, `decode`, `exact`, `analyze` and `synth`.
//!
//! Exit codes: 0 on success, 1 on internal failure, 2 on bad input or
//! flags. Outputs are always written in dataset order and are byte-identical
//! across reruns and `--jobs` settings. A one-line summary goes to stdout,
//! diagnostics to stderr.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::analysis::{self, Quantity};
use crate::metrics::{self, UncertaintyRecord};
use crate::model::{gen_synthetic, synth_dataset, ConditionalModel, SynthSpec, TableModel};
use crate::search::{
    self, load_results, results_to_jsonl, NbestDfs, ResultRecord, SearchBudget, SearchResult,
    DEFAULT_MAX_STATES,
};
use crate::seq::{dataset_to_jsonl, load_dataset, DatasetItem};

#[derive(Debug, Parser)]
#[command(
    name = "modeseek",
    version,
    about = "Exact and approximate mode-seeking search toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-item reference uncertainty and length-bucketed summaries
    Uncertainty(UncertaintyArgs),
    /// Greedy or beam decoding
    Decode(DecodeArgs),
    /// Exact n-best depth-first search
    Exact(ExactArgs),
    /// Search errors, n-best mass, mass gap and correlations
    Analyze(AnalyzeArgs),
    /// Seeded synthetic model plus a companion dataset
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct UncertaintyArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Per-item CSV
    #[arg(long)]
    pub out: PathBuf,
    /// Bucket CSV; defaults to the --out path with a `.buckets.csv` suffix
    #[arg(long)]
    pub bucket_out: Option<PathBuf>,
    /// Comma-separated, strictly increasing length boundaries
    #[arg(long, default_value = "10,20,30,40")]
    pub buckets: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecodeMethod {
    Greedy,
    Beam,
}

#[derive(Debug, Args)]
pub struct ModelInput {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub dataset: PathBuf,
    /// Rescale rows that fail the normalization check instead of aborting
    #[arg(long)]
    pub renormalize: bool,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[command(flatten)]
    pub input: ModelInput,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = DecodeMethod::Beam)]
    pub method: DecodeMethod,
    #[arg(long, default_value_t = 4)]
    pub beam_size: usize,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub input: ModelInput,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub nbest: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    pub max_states: u64,
    /// Run beam search with this beam size first and seed the queue with it
    #[arg(long)]
    pub seed_with_beam: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnalyzeMode {
    Errors,
    Mass,
    Gap,
    Correlate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Errors,
    States,
    Mass,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(value_enum)]
    pub mode: AnalyzeMode,
    /// Approximate (greedy or beam) result JSONL
    #[arg(long)]
    pub approx: Option<PathBuf>,
    /// Exact result JSONL
    #[arg(long)]
    pub exact: Option<PathBuf>,
    /// Result JSONL for `mass` and for `correlate --which states|mass`
    #[arg(long)]
    pub results: Option<PathBuf>,
    /// Uncertainty CSV written by the `uncertainty` subcommand
    #[arg(long)]
    pub uncertainty: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub which: Option<Which>,
    #[arg(long, default_value_t = 1)]
    pub nbest: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Coverage-band histogram CSV (`mass` mode)
    #[arg(long)]
    pub histogram_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output model JSON
    #[arg(long)]
    pub model: PathBuf,
    /// Output dataset JSONL
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub vocab_size: usize,
    #[arg(long, default_value_t = 6)]
    pub max_len: usize,
    #[arg(long, default_value_t = 1)]
    pub context_order: usize,
    #[arg(long, default_value_t = 100)]
    pub num_sources: usize,
    #[arg(long, default_value_t = 4)]
    pub refs_per_source: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input files, flags or data.
    #[error("{0}")]
    User(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

fn user(e: impl std::fmt::Display) -> CliError {
    CliError::User(e.to_string())
}

/// What a successful run did, for the stdout summary line.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub command: &'static str,
    pub items: usize,
    pub warnings: usize,
    pub detail: String,
}

fn write_output(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::User(format!("cannot read {}: {e}", path.display())))
}

fn require<'a>(value: &'a Option<PathBuf>, flag: &str, mode: &str) -> Result<&'a Path, CliError> {
    value
        .as_deref()
        .ok_or_else(|| CliError::User(format!("{mode} needs --{flag}")))
}

pub fn parse_buckets(spec: &str) -> Result<Vec<u64>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|e| CliError::User(format!("bad bucket boundary {s:?}: {e}")))
        })
        .collect()
}

pub fn cmd_uncertainty(args: &UncertaintyArgs) -> Result<Summary, CliError> {
    let boundaries = parse_buckets(&args.buckets)?;
    let items = load_dataset(&args.dataset).map_err(user)?;
    let mut records = Vec::new();
    let mut warnings = 0;
    for item in &items {
        match UncertaintyRecord::from_item(item) {
            Ok(r) => records.push(r),
            Err(e) => {
                log::warn!("skipping item {:?}: {e}", item.id);
                warnings += 1;
            }
        }
    }
    let pairs: Vec<(f64, f64)> = records.iter().map(|r| (r.avg_ref_len, r.u)).collect();
    let buckets = metrics::bucketize(&pairs, &boundaries).map_err(user)?;
    let bucket_out = args.bucket_out.clone().unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".buckets.csv");
        PathBuf::from(p)
    });
    write_output(&args.out, &metrics::uncertainty_csv(&records))?;
    write_output(&bucket_out, &metrics::buckets_csv(&buckets))?;
    let mean_u = if records.is_empty() {
        0.0
    } else {
        records.iter().map(|r| r.u).sum::<f64>() / records.len() as f64
    };
    Ok(Summary {
        command: "uncertainty",
        items: items.len(),
        warnings,
        detail: format!("scored={} mean_u={mean_u:.6}", records.len()),
    })
}

fn load_inputs(input: &ModelInput) -> Result<(TableModel, Vec<DatasetItem>), CliError> {
    if input.jobs == 0 {
        return Err(user("--jobs must be at least 1"));
    }
    let model = TableModel::load(&input.model, input.renormalize).map_err(user)?;
    let items = load_dataset(&input.dataset).map_err(user)?;
    Ok((model, items))
}

/// Runs `search` on every item with up to `jobs` workers; output order is
/// dataset order.
fn run_jobs<F>(
    model: &TableModel,
    items: &[DatasetItem],
    jobs: usize,
    search: F,
) -> Result<Vec<ResultRecord>, CliError>
where
    F: Fn(&DatasetItem) -> Result<SearchResult, search::SearchError> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    pool.install(|| {
        items
            .par_iter()
            .map(|item| {
                let result = search(item)
                    .map_err(|e| CliError::Internal(format!("item {:?}: {e}", item.id)))?;
                ResultRecord::from_search(item.id.clone(), &result, model.vocab())
                    .map_err(|e| CliError::Internal(e.to_string()))
            })
            .collect()
    })
}

pub fn cmd_decode(args: &DecodeArgs) -> Result<Summary, CliError> {
    let (model, items) = load_inputs(&args.input)?;
    if args.method == DecodeMethod::Beam && args.beam_size == 0 {
        return Err(user("--beam-size must be at least 1"));
    }
    let records = run_jobs(&model, &items, args.input.jobs, |item| match args.method {
        DecodeMethod::Greedy => search::greedy(&model, &item.source),
        DecodeMethod::Beam => search::beam(&model, &item.source, args.beam_size),
    })?;
    write_output(&args.out, &results_to_jsonl(&records))?;
    let states: u64 = records.iter().map(|r| r.explored_states).sum();
    Ok(Summary {
        command: "decode",
        items: records.len(),
        warnings: 0,
        detail: format!("explored_states={states}"),
    })
}

pub fn cmd_exact(args: &ExactArgs) -> Result<Summary, CliError> {
    let (model, items) = load_inputs(&args.input)?;
    let budget = SearchBudget::states(args.max_states).map_err(user)?;
    let search = NbestDfs::new(args.nbest).map_err(user)?.budget(budget);
    if args.seed_with_beam == Some(0) {
        return Err(user("--seed-with-beam must be at least 1"));
    }
    let records = run_jobs(&model, &items, args.input.jobs, |item| {
        match args.seed_with_beam {
            Some(b) => {
                let seeds = search::beam(&model, &item.source, b)?.hypotheses;
                let mut r = search.clone().seeds(seeds).run(&model, &item.source)?;
                r.settings.seed_beam = Some(b);
                Ok(r)
            }
            None => search.run(&model, &item.source),
        }
    })?;
    write_output(&args.out, &results_to_jsonl(&records))?;
    let unterminated = records.iter().filter(|r| !r.terminated).count();
    let states: u64 = records.iter().map(|r| r.explored_states).sum();
    Ok(Summary {
        command: "exact",
        items: records.len(),
        warnings: unterminated,
        detail: format!("unterminated={unterminated} explored_states={states}"),
    })
}

fn load_records(path: &Path) -> Result<Vec<ResultRecord>, CliError> {
    load_results(path).map_err(user)
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<Summary, CliError> {
    let (items, warnings, detail) = match args.mode {
        AnalyzeMode::Errors => {
            let approx = load_records(require(&args.approx, "approx", "errors")?)?;
            let exact = load_records(require(&args.exact, "exact", "errors")?)?;
            let report = analysis::count_search_errors(&approx, &exact).map_err(user)?;
            write_output(&args.out, &report.to_csv())?;
            let detail = format!(
                "search_errors={}/{} error_rate={:.6} skipped_unterminated={}",
                report.search_errors,
                report.total_items,
                report.error_rate,
                report.skipped_unterminated
            );
            (report.total_items, report.skipped_unterminated, detail)
        }
        AnalyzeMode::Mass => {
            let results = load_records(require(&args.results, "results", "mass")?)?;
            let report = analysis::mass_coverage(&results, args.nbest).map_err(user)?;
            write_output(&args.out, &report.to_csv())?;
            if let Some(path) = &args.histogram_out {
                write_output(path, &report.histogram_csv())?;
            }
            (
                report.per_item.len(),
                0,
                format!("n={} mean_mass={:.6}", report.n, report.mean_mass),
            )
        }
        AnalyzeMode::Gap => {
            let approx = load_records(require(&args.approx, "approx", "gap")?)?;
            let exact = load_records(require(&args.exact, "exact", "gap")?)?;
            let report = analysis::mass_gap(&approx, &exact, args.nbest).map_err(user)?;
            write_output(&args.out, &report.to_csv())?;
            let detail = format!(
                "n={} mean_gap={:.6} skipped_unterminated={}",
                report.n, report.mean_gap, report.skipped_unterminated
            );
            (report.per_item.len(), report.skipped_unterminated, detail)
        }
        AnalyzeMode::Correlate => {
            let u_path = require(&args.uncertainty, "uncertainty", "correlate")?;
            let u_records = metrics::read_uncertainty_csv(read_input(u_path)?.as_bytes())
                .map_err(|e| CliError::User(format!("{}: {e}", u_path.display())))?;
            let which = args.which.ok_or_else(|| user("correlate needs --which"))?;
            let (quantity, values) = match which {
                Which::Errors => {
                    let approx =
                        load_records(require(&args.approx, "approx", "correlate --which errors")?)?;
                    let exact =
                        load_records(require(&args.exact, "exact", "correlate --which errors")?)?;
                    let report = analysis::count_search_errors(&approx, &exact).map_err(user)?;
                    (Quantity::Errors, report.indicators())
                }
                Which::States => {
                    let results = load_records(require(
                        &args.results,
                        "results",
                        "correlate --which states",
                    )?)?;
                    (Quantity::States, analysis::explored_states(&results))
                }
                Which::Mass => {
                    let results =
                        load_records(require(&args.results, "results", "correlate --which mass")?)?;
                    let report = analysis::mass_coverage(&results, args.nbest).map_err(user)?;
                    (Quantity::Mass, report.values())
                }
            };
            let report = analysis::correlate(&u_records, &values, quantity).map_err(user)?;
            write_output(&args.out, &report.to_csv())?;
            (report.pairs.len(), 0, format!("rho={:.6}", report.rho))
        }
    };
    Ok(Summary {
        command: "analyze",
        items,
        warnings,
        detail,
    })
}

pub fn cmd_synth(args: &SynthArgs) -> Result<Summary, CliError> {
    let spec = SynthSpec {
        vocab_size: args.vocab_size,
        max_len: args.max_len,
        context_order: args.context_order,
        alpha: args.alpha,
        seed: args.seed,
        num_sources: args.num_sources,
    };
    let model = gen_synthetic(&spec).map_err(user)?;
    let items = synth_dataset(&model, &spec, args.refs_per_source);
    write_output(&args.model, &model.to_json())?;
    write_output(&args.dataset, &dataset_to_jsonl(&items))?;
    Ok(Summary {
        command: "synth",
        items: items.len(),
        warnings: 0,
        detail: format!("rows={} alpha={}", model.num_rows(), args.alpha),
    })
}

pub fn run(cli: &Cli) -> Result<Summary, CliError> {
    match &cli.command {
        Command::Uncertainty(a) => cmd_uncertainty(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    match run(&cli) {
        Ok(s) => {
            println!(
                "{}: items={} warnings={} {} wall={:.3}s",
                s.command,
                s.items,
                s.warnings,
                s.detail,
                start.elapsed().as_secs_f64()
            );
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
