use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use phonerr::ctc::{
    beam_decode, greedy_decode, soft_ctc_loss, soft_mapping_loss, Lambdas, LossPart, Matrix, ProbMatrix, TargetSeq,
};
use phonerr::inventory::parse_lexicon;
use phonerr::metrics::{aer, score_pair, ArticulatoryTrack, WperAlignment};
use phonerr::records::{
    ArticulatoryInput, DecodeInput, DecodeOutput, Indexing, LossInput, LossOutput, OpRecord, ScoreInput, ScoreOutput,
    SimRecordOut,
};
use phonerr::similarity::{self, embedding_similarity, heuristic_similarity, FeatureWeights};
use phonerr::simulate::{default_pairs, parse_pairs_tsv, CorpusSimulator, Mode, Policy};
use phonerr::{load_inventory, EmbeddingTable, FeatureTable, NormalizedSimilarity, PhonemeInventory, SimilarityMatrix};

use crate::jsonl::{self, Tally};
use crate::{AlignmentArg, Cli, Command, DecodeArgs, LossArgs, MethodArg, ModeArg, ScoreArgs, SimilarityArgs, SimulateArgs};

pub enum Status {
    Complete,
    Partial,
}

impl From<Tally> for Status {
    fn from(t: Tally) -> Self {
        if t.failed == 0 {
            Status::Complete
        } else {
            Status::Partial
        }
    }
}

pub fn run(cli: &Cli) -> Result<Status> {
    let table = match &cli.inventory {
        Some(path) => load_inventory(Some(&jsonl::read_to_string(path)?))
            .with_context(|| format!("invalid feature table {}", path.display()))?
            .1,
        None => FeatureTable::default_table().clone(),
    };
    match &cli.command {
        Command::Similarity(a) => similarity_cmd(&table, a),
        Command::Score(a) => score_cmd(&table, a),
        Command::Loss(a) => loss_cmd(&table, a),
        Command::Decode(a) => decode_cmd(table.inventory(), a),
        Command::Simulate(a) => simulate_cmd(&table, a, cli.seed),
    }
}

fn finish(tally: Tally) -> Result<Status> {
    if tally.ok == 0 && tally.failed > 0 {
        bail!("all {} records failed", tally.failed);
    }
    Ok(tally.into())
}

fn load_embeddings(path: &Path, inv: &PhonemeInventory) -> Result<EmbeddingTable> {
    let text = jsonl::read_to_string(path)?;
    EmbeddingTable::parse_tsv(&text, inv).with_context(|| format!("invalid vectors file {}", path.display()))
}

fn load_matrix(path: Option<&Path>, table: &FeatureTable) -> Result<SimilarityMatrix> {
    match path {
        Some(p) => {
            let text = jsonl::read_to_string(p)?;
            SimilarityMatrix::from_csv(&text, table.inventory())
                .with_context(|| format!("invalid similarity matrix {}", p.display()))
        }
        None => Ok(heuristic_similarity(table, &FeatureWeights::DEFAULT)?),
    }
}

fn similarity_cmd(table: &FeatureTable, a: &SimilarityArgs) -> Result<Status> {
    let inv = table.inventory();
    let s = match a.method {
        MethodArg::Heuristic => {
            let weights = match &a.weights {
                Some(w) => FeatureWeights::new(w)?,
                None => FeatureWeights::DEFAULT,
            };
            heuristic_similarity(table, &weights)?
        }
        MethodArg::Embedding => {
            let path = a.vectors.as_deref().ok_or_else(|| anyhow!("--method embedding needs --vectors"))?;
            embedding_similarity(&load_embeddings(path, inv)?)?
        }
    };
    s.save(&a.out).with_context(|| format!("cannot write {}", a.out.display()))?;

    let n = s.n();
    let mut asym = 0.0f64;
    let mut diag = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        diag = diag.max((s.at(i, i) - 1.0).abs());
        for j in 0..n {
            asym = asym.max((s.at(i, j) - s.at(j, i)).abs());
            if i != j {
                lo = lo.min(s.at(i, j));
                hi = hi.max(s.at(i, j));
            }
        }
    }
    println!("method\t{}", s.method().as_str());
    println!("phonemes\t{n}");
    println!("max_asymmetry\t{asym:e}");
    println!("max_diagonal_deviation\t{diag:e}");
    println!("off_diagonal_range\t{lo:.6}\t{hi:.6}");
    Ok(Status::Complete)
}

fn score_cmd(table: &FeatureTable, a: &ScoreArgs) -> Result<Status> {
    let inv = table.inventory();
    let s = load_matrix(a.matrix.as_deref(), table)?;
    let mode = match a.alignment {
        AlignmentArg::Weighted => WperAlignment::Weighted,
        AlignmentArg::Unit => WperAlignment::Unit,
    };
    let articulatory = match (&a.articulatory, &a.refs) {
        (Some(frames), Some(refs)) => Some((load_articulatory(frames)?, load_embeddings(refs, inv)?)),
        (None, Some(_)) => bail!("--refs needs --articulatory"),
        _ => None,
    };
    if !(a.tau_factor > 0.0 && a.tau_factor.is_finite()) {
        bail!("--tau-factor must be positive");
    }

    let score = |r: ScoreInput| -> Result<ScoreOutput> {
        let reference = inv.parse_seq(&r.reference)?;
        let hyp = inv.parse_seq(&r.hyp)?;
        let scores = score_pair(&reference, &hyp, &s, mode)?;
        let aer = match &articulatory {
            Some((tracks, refs)) => {
                let rec = tracks.get(&r.id).ok_or_else(|| anyhow!("no articulatory frames for `{}`", r.id))?;
                let track = ArticulatoryTrack::new(rec.frames.clone(), inv.parse_seq(&rec.frame_targets)?)?;
                Some(aer(&track, refs, a.tau_factor)?)
            }
            None => None,
        };
        Ok(ScoreOutput {
            id: r.id,
            per: scores.per,
            wper: scores.wper,
            aer,
            ops: scores.alignment.ops.iter().map(|op| OpRecord::from_op(op, inv)).collect(),
        })
    };

    let mut sums = [0.0f64; 3];
    let mut aer_count = 0usize;
    let mut out = jsonl::create(a.out.as_deref())?;
    let tally = jsonl::map_records(&a.input, &mut out, score, |o: &ScoreOutput| {
        sums[0] += o.per;
        sums[1] += o.wper;
        if let Some(v) = o.aer {
            sums[2] += v;
            aer_count += 1;
        }
    })?;

    if let Some(path) = &a.summary {
        let mut text = String::from("metric\tmean\trecords\n");
        if tally.ok > 0 {
            let n = tally.ok as f64;
            text.push_str(&format!("per\t{}\t{}\n", sums[0] / n, tally.ok));
            text.push_str(&format!("wper\t{}\t{}\n", sums[1] / n, tally.ok));
        }
        if aer_count > 0 {
            text.push_str(&format!("aer\t{}\t{aer_count}\n", sums[2] / aer_count as f64));
        }
        std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    finish(tally)
}

fn load_articulatory(path: &Path) -> Result<HashMap<String, ArticulatoryInput>> {
    use std::io::BufRead;
    let mut map = HashMap::new();
    for (i, line) in jsonl::open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ArticulatoryInput =
            serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?;
        map.insert(rec.id.clone(), rec);
    }
    Ok(map)
}

/// Probabilities from either `probs` or `logits`; the flag says which.
fn input_probs(
    probs: Option<Vec<Vec<f64>>>,
    logits: Option<Vec<Vec<f64>>>,
    width: usize,
) -> Result<(ProbMatrix, bool)> {
    let (pm, from_logits) = match (probs, logits) {
        (Some(p), None) => (ProbMatrix::from_rows(&p)?, false),
        (None, Some(l)) => (ProbMatrix::softmax(&Matrix::from_rows(&l)?), true),
        _ => bail!("record needs exactly one of `probs` or `logits`"),
    };
    if pm.width() != width {
        bail!("rows have {} columns, expected {width} (phonemes + blank)", pm.width());
    }
    Ok((pm, from_logits))
}

fn loss_cmd(table: &FeatureTable, a: &LossArgs) -> Result<Status> {
    let inv = table.inventory();
    let lambdas = Lambdas::new(a.lambda_ctc, a.lambda_map)?;
    let s_hat = if a.standard {
        NormalizedSimilarity::identity(inv.len())
    } else {
        similarity::normalize(&load_matrix(a.matrix.as_deref(), table)?)
    };

    let eval = |r: LossInput| -> Result<LossOutput> {
        let (probs, from_logits) = input_probs(r.probs, r.logits, inv.width())?;
        let y = TargetSeq::new(inv.parse_seq(&r.target)?)?;
        let (part, weight): (LossPart, f64) = match r.indexing {
            Indexing::Frame => (soft_ctc_loss(&probs, &y, &s_hat)?, lambdas.ctc),
            Indexing::Step => (soft_mapping_loss(&probs, &y, &s_hat)?, lambdas.map),
        };
        let grad = if from_logits { part.logit_grad(&probs) } else { part.grad.clone() };
        let (ctc_part, map_part) = match r.indexing {
            Indexing::Frame => (part.value, 0.0),
            Indexing::Step => (0.0, part.value),
        };
        Ok(LossOutput {
            id: r.id,
            total: lambdas.ctc * ctc_part + lambdas.map * map_part,
            ctc_part,
            map_part,
            grad_norm: weight * grad.norm(),
        })
    };

    let mut out = jsonl::create(a.out.as_deref())?;
    let tally = jsonl::map_records(&a.input, &mut out, eval, |_| {})?;
    finish(tally)
}

fn decode_cmd(inv: &PhonemeInventory, a: &DecodeArgs) -> Result<Status> {
    let beam = a.beam;
    if beam == Some(0) {
        bail!("--beam must be at least 1");
    }
    let decode = |r: DecodeInput| -> Result<DecodeOutput> {
        let (probs, _) = input_probs(r.probs, r.logits, inv.width())?;
        let labels = match beam {
            Some(w) => beam_decode(&probs, w)?,
            None => greedy_decode(&probs),
        };
        Ok(DecodeOutput { id: r.id, hyp: inv.render(&labels) })
    };
    let mut out = jsonl::create(a.out.as_deref())?;
    let tally = jsonl::map_records(&a.input, &mut out, decode, |_| {})?;
    finish(tally)
}

/// Lowercased word tokens with surrounding punctuation removed.
fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'').to_lowercase())
        .filter(|w| !w.is_empty())
}

fn simulate_cmd(table: &FeatureTable, a: &SimulateArgs, seed: u64) -> Result<Status> {
    let inv = table.inventory();
    let lexicon = parse_lexicon(jsonl::open(&a.lexicon)?, inv)
        .with_context(|| format!("invalid lexicon {}", a.lexicon.display()))?;
    let pairs = match &a.pairs {
        Some(p) => parse_pairs_tsv(&jsonl::read_to_string(p)?, table)
            .with_context(|| format!("invalid pairs file {}", p.display()))?,
        None => default_pairs(table)?,
    };
    let mode = match a.mode {
        ModeArg::All => Mode::All,
        ModeArg::Vowel => Mode::Vowel,
        ModeArg::Consonant => Mode::Consonant,
    };
    let policy = Policy { mode, max_subs: a.max_subs.0, rate: a.rate };
    let mut sim = CorpusSimulator::new(&lexicon, &pairs, policy, seed)?;

    let words: Vec<String> = match &a.words {
        Some(p) => tokenize(&jsonl::read_to_string(p)?).collect(),
        None => lexicon.iter().map(|(w, _)| w.to_string()).collect(),
    };
    if words.is_empty() {
        bail!("no input words");
    }

    let mut out = jsonl::create(a.out.as_deref())?;
    for w in &words {
        if let Some(rec) = sim.next_word(w)? {
            serde_json::to_writer(&mut out, &SimRecordOut::from_record(&rec, inv))?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;

    let stats = sim.into_stats();
    if let Some(path) = &a.stats {
        std::fs::write(path, stats.to_tsv(&pairs, inv)).with_context(|| format!("cannot write {}", path.display()))?;
    }
    eprintln!("{} records, {} edits, {} words not in lexicon", stats.records, stats.edits, stats.skipped);
    if stats.records == 0 {
        bail!("no input word was found in the lexicon");
    }
    Ok(Status::Complete)
}
