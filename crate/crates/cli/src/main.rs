//! `phonerr` batch command-line tool.
//!
//! Exit codes: 0 success, 1 some records skipped, 2 usage or input error.

mod commands;
mod jsonl;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "phonerr", version, about = "Phonetic error detection toolkit")]
pub struct Cli {
    /// Feature table TSV overriding the built-in ARPAbet table.
    #[arg(long, global = true)]
    pub inventory: Option<PathBuf>,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for record-parallel commands (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a phoneme similarity matrix and write it as CSV.
    Similarity(SimilarityArgs),
    /// Score reference/hypothesis pairs with PER, WPER and optionally AER.
    Score(ScoreArgs),
    /// Evaluate the soft CTC / soft-mapping objective on probability rows.
    Loss(LossArgs),
    /// Decode frame probabilities into phoneme sequences.
    Decode(DecodeArgs),
    /// Inject common phoneme substitutions into lexicon pronunciations.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Heuristic,
    Embedding,
}

#[derive(Args, Debug)]
pub struct SimilarityArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Per-phoneme reference vectors (TSV), required for `embedding`.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// Eight comma-separated feature weights for `heuristic`.
    #[arg(long, value_delimiter = ',', num_args = 8)]
    pub weights: Option<Vec<f64>>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlignmentArg {
    /// Substitutions cost 1 - S(r, h) when aligning for WPER.
    Weighted,
    /// WPER reuses the unit-cost PER alignment.
    Unit,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    /// JSONL records {id, ref, hyp}.
    #[arg(long)]
    pub input: PathBuf,
    /// Similarity matrix CSV (default: heuristic matrix).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// JSONL records {id, frames, frame_targets} for AER.
    #[arg(long, requires = "refs")]
    pub articulatory: Option<PathBuf>,
    /// Per-phoneme reference vectors (TSV) for AER.
    #[arg(long)]
    pub refs: Option<PathBuf>,
    #[arg(long, default_value_t = phonerr::metrics::DEFAULT_TAU_FACTOR)]
    pub tau_factor: f64,
    #[arg(long, value_enum, default_value_t = AlignmentArg::Weighted)]
    pub alignment: AlignmentArg,
    /// Per-record metrics JSONL (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Corpus-mean summary TSV.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LossArgs {
    /// JSONL records {id, probs|logits, target, indexing}.
    #[arg(long)]
    pub input: PathBuf,
    /// Similarity matrix CSV (default: heuristic matrix).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Use one-hot soft labels (plain CTC, one-hot mapping targets).
    #[arg(long, conflicts_with = "matrix")]
    pub standard: bool,
    /// Weight of the soft CTC term.
    #[arg(long, default_value_t = 0.8)]
    pub lambda_ctc: f64,
    /// Weight of the soft-mapping term.
    #[arg(long, default_value_t = 0.2)]
    pub lambda_map: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    /// JSONL records {id, probs|logits}.
    #[arg(long)]
    pub input: PathBuf,
    /// Best-path decoding (the default).
    #[arg(long, conflicts_with = "beam")]
    pub greedy: bool,
    /// Prefix beam search with this width.
    #[arg(long)]
    pub beam: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    All,
    Vowel,
    Consonant,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// CMUdict-format lexicon.
    #[arg(long)]
    pub lexicon: PathBuf,
    /// Running text; every word occurrence becomes a record (default: each
    /// lexicon word once).
    #[arg(long)]
    pub words: Option<PathBuf>,
    /// Substitution pair TSV (a, b, class) replacing the built-in set.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::All)]
    pub mode: ModeArg,
    /// Per-position substitution probability.
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    /// Maximum substitutions per word, or `inf`.
    #[arg(long, default_value = "1", value_parser = parse_max_subs)]
    pub max_subs: MaxSubs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-pair edit counts TSV.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug)]
pub struct MaxSubs(pub Option<usize>);

fn parse_max_subs(s: &str) -> Result<MaxSubs, String> {
    if s == "inf" {
        return Ok(MaxSubs(None));
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("`{s}` is not a positive integer or `inf`")),
        Ok(n) => Ok(MaxSubs(Some(n))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(commands::Status::Complete) => ExitCode::SUCCESS,
        Ok(commands::Status::Partial) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
