//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use phonerr::ctc::{
    fit_logits_demo, greedy_decode, soft_ctc_loss, soft_ctc_loss_from_logits, soft_mapping_loss_from_logits,
    standard_ctc_loss, standard_ctc_loss_from_logits, FitConfig, Lambdas, ProbMatrix,
};
use phonerr::inventory::{FeatureTable, Lexicon, PhonemeId, PhonemeInventory};
use phonerr::metrics::{self, aer, align, per, score_pair, wper, ArticulatoryTrack, WperAlignment};
use phonerr::records::SimRecordOut;
use phonerr::similarity::{
    embedding_similarity, heuristic_similarity, normalize, EmbeddingTable, FeatureWeights, SimilarityMatrix,
};
use phonerr::simulate::{apply_edits, default_pairs, generate_corpus, revert_edits, Mode, PairClass, Policy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn check_matrix(s: &SimilarityMatrix) -> Result<(), String> {
    let n = s.n();
    for i in 0..n {
        ensure(s.at(i, i) == 1.0, || format!("diagonal {i} = {}", s.at(i, i)))?;
        for j in 0..n {
            let v = s.at(i, j);
            ensure((0.0..=1.0).contains(&v), || format!("({i},{j}) = {v} out of range"))?;
            ensure(v == s.at(j, i), || format!("asymmetric at ({i},{j})"))?;
        }
    }
    Ok(())
}

fn max_abs_diff(a: &SimilarityMatrix, b: &SimilarityMatrix) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Random orthogonal matrix by Gram-Schmidt on random vectors.
fn random_rotation(rng: &mut ChaCha8Rng, d: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

fn ac1_similarity_invariants() -> Outcome {
    let start = Instant::now();
    let table = FeatureTable::default_table();
    let inv = table.inventory();
    let heur = heuristic_similarity(table, &FeatureWeights::DEFAULT).map_err(|e| e.to_string())?;
    check_matrix(&heur)?;
    let mut worst = 0.0f64;
    for c in [0.5, 2.0, 10.0] {
        let w: Vec<f64> = FeatureWeights::DEFAULT.as_slice().iter().map(|x| x * c).collect();
        let scaled = heuristic_similarity(table, &FeatureWeights::new(&w).unwrap()).unwrap();
        check_matrix(&scaled)?;
        worst = worst.max(max_abs_diff(&heur, &scaled));
    }
    ensure(worst <= 1e-9, || format!("weight scaling changed S by {worst:e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = 4;
    let vectors: Vec<Vec<f64>> = (0..inv.len()).map(|_| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
    let emb = embedding_similarity(&EmbeddingTable::new(inv.clone(), vectors.clone()).unwrap()).unwrap();
    check_matrix(&emb)?;
    let rot = random_rotation(&mut rng, d);
    let mut worst_e = 0.0f64;
    for scale in [0.1, 3.0, 250.0] {
        let moved: Vec<Vec<f64>> = vectors
            .iter()
            .map(|v| rot.iter().map(|r| scale * r.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()).collect())
            .collect();
        let s2 = embedding_similarity(&EmbeddingTable::new(inv.clone(), moved).unwrap()).unwrap();
        check_matrix(&s2)?;
        worst_e = worst_e.max(max_abs_diff(&emb, &s2));
    }
    ensure(worst_e <= 1e-9, || format!("rotation/scaling changed S by {worst_e:e}"))?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("scale drift {worst:.1e}, rotation drift {worst_e:.1e}, {elapsed:.2?}"))
}

fn ac2_metric_oracle() -> Outcome {
    let start = Instant::now();
    let table = FeatureTable::default_table();
    let inv = table.inventory();
    let heur = heuristic_similarity(table, &FeatureWeights::DEFAULT).unwrap();
    let ident = SimilarityMatrix::identity(inv);
    let alphabet: Vec<PhonemeId> = inv.ids().take(5).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..10_000 {
        let rl = rng.random_range(1..=6);
        let hl = rng.random_range(0..=6);
        let r: Vec<PhonemeId> = (0..rl).map(|_| alphabet[rng.random_range(0..5)]).collect();
        let h: Vec<PhonemeId> = (0..hl).map(|_| alphabet[rng.random_range(0..5)]).collect();
        let a = align(&r, &h).unwrap();
        let oracle = brute_force_edit_cost(&r, &h);
        ensure(a.counts.errors() == oracle, || format!("case {case}: DP cost {} vs oracle {oracle}", a.counts.errors()))?;
        ensure(a.replay() == h, || format!("case {case}: ops do not replay"))?;
        let p = per(&a);
        for mode in [WperAlignment::Weighted, WperAlignment::Unit] {
            let sc = score_pair(&r, &h, &heur, mode).unwrap();
            ensure(sc.wper <= p, || format!("case {case}: WPER {} > PER {p}", sc.wper))?;
            let id = score_pair(&r, &h, &ident, mode).unwrap();
            ensure((id.wper - p).abs() <= 1e-12, || format!("case {case}: identity WPER {} != PER {p}", id.wper))?;
        }
        ensure(wper(&a, &heur) <= p, || format!("case {case}: unit-alignment WPER exceeds PER"))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!("10000 pairs, {elapsed:.2?}"))
}

fn ac3_ctc_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let n = rng.random_range(1..=4);
        let frames = rng.random_range(1..=6);
        let y = random_target(&mut rng, n, 3.min(frames), frames);
        let rows: Vec<Vec<f64>> = (0..frames).map(|_| random_simplex_row(&mut rng, n + 1)).collect();
        let sh_rows = random_s_hat(&mut rng, n);
        let probs = ProbMatrix::from_rows(&rows).unwrap();
        let ys = target_seq(&y);
        let got = soft_ctc_loss(&probs, &ys, &s_hat(&sh_rows)).map_err(|e| format!("case {case}: {e}"))?;
        let want = brute_force_soft_ctc(&rows, &y, &sh_rows);
        let diff = (got.value - want).abs();
        worst = worst.max(diff);
        ensure(diff <= 1e-9, || format!("case {case}: {} vs oracle {want}", got.value))?;

        let std = standard_ctc_loss(&probs, &ys).unwrap();
        let soft_id = soft_ctc_loss(&probs, &ys, &phonerr::NormalizedSimilarity::identity(n)).unwrap();
        ensure(std.value.to_bits() == soft_id.value.to_bits(), || format!("case {case}: standard != soft(identity)"))?;
        ensure(
            std.grad.values().iter().zip(soft_id.grad.values()).all(|(a, b)| a.to_bits() == b.to_bits()),
            || format!("case {case}: gradients differ bitwise"),
        )?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!("1000 instances, max |diff| {worst:.1e}, {elapsed:.2?}"))
}

fn ac4_gradient_checks() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let n = rng.random_range(1..=5);
        let frames = rng.random_range(1..=8);
        let y = random_target(&mut rng, n, frames.min(4), frames);
        let ys = target_seq(&y);
        let sh = s_hat(&random_s_hat(&mut rng, n));

        let z = random_logits(&mut rng, frames, n + 1);
        let soft = soft_ctc_loss_from_logits(&z, &ys, &sh).unwrap();
        let c1 = check_gradient(&z, &soft.grad, |m| soft_ctc_loss_from_logits(m, &ys, &sh).unwrap().value);
        let std = standard_ctc_loss_from_logits(&z, &ys).unwrap();
        let c2 = check_gradient(&z, &std.grad, |m| standard_ctc_loss_from_logits(m, &ys).unwrap().value);
        let zs = random_logits(&mut rng, y.len(), n + 1);
        let map = soft_mapping_loss_from_logits(&zs, &ys, &sh).unwrap();
        let c3 = check_gradient(&zs, &map.grad, |m| soft_mapping_loss_from_logits(m, &ys, &sh).unwrap().value);
        for (name, c) in [("soft-CTC", &c1), ("CTC", &c2), ("soft-mapping", &c3)] {
            worst = worst.max(c.max_rel_error);
            ensure(c.failures.is_empty(), || format!("case {case} {name}: {:?}", &c.failures[..1]))?;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(120))?;
    Ok(format!("200 instances x 3 losses, max rel err {worst:.1e}, {elapsed:.2?}"))
}

fn ac5_training_surrogate() -> Outcome {
    let start = Instant::now();
    let table = FeatureTable::default_table();
    let inv = table.inventory();
    let sh = normalize(&heuristic_similarity(table, &FeatureWeights::DEFAULT).unwrap());
    let y_ids = inv.parse_str("TH IH NG K").unwrap();
    let y = phonerr::ctc::TargetSeq::new(y_ids.clone()).unwrap();
    let cfg = FitConfig { frames: 12, steps: 2000, lambdas: Lambdas::new(0.8, 0.2).unwrap(), ..Default::default() };
    let report = fit_logits_demo(&y, &sh, &cfg).map_err(|e| e.to_string())?;
    ensure(report.history.windows(2).all(|w| w[1] <= w[0]), || "loss increased on an accepted step".into())?;
    let decoded = greedy_decode(&ProbMatrix::softmax(&report.frame_logits));
    let p = per(&align(&y_ids, &decoded).unwrap());
    ensure(p == 0.0, || format!("decoded {:?}, PER {p}", inv.render(&decoded)))?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!(
        "loss {:.3} -> {:.4} in {} steps, decode {:?}, {elapsed:.2?}",
        report.initial.total,
        report.final_loss.total,
        report.history.len() - 1,
        inv.render(&decoded).join(" ")
    ))
}

fn ac6_wper_golden() -> Outcome {
    // TH and S are voiceless fricatives differing only in place (dental vs
    // alveolar): matched weight 0.2 + 0.2 + 0.1 over applicable 0.7.
    const S_TH_S: f64 = 5.0 / 7.0;
    let table = FeatureTable::default_table();
    let inv = table.inventory();
    let s = heuristic_similarity(table, &FeatureWeights::DEFAULT).unwrap();
    let got_s = s.get(inv.id("TH").unwrap(), inv.id("S").unwrap());
    ensure((got_s - S_TH_S).abs() < 1e-15, || format!("S(TH,S) = {got_s}"))?;
    let a = align(&inv.parse_str("TH IH NG K").unwrap(), &inv.parse_str("S IH NG K").unwrap()).unwrap();
    let w = wper(&a, &s);
    let expected = (1.0 - S_TH_S) / 4.0;
    ensure((w - expected).abs() < 1e-15, || format!("WPER {w} != {expected}"))?;
    Ok(format!("S(TH,S) = {got_s:.6}, WPER = {w:.6}"))
}

fn ac7_simulation_closure() -> Outcome {
    let start = Instant::now();
    let table = FeatureTable::default_table();
    let inv = table.inventory();
    let pairs = default_pairs(table).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut lex = Lexicon::new();
    let mut words = Vec::new();
    for i in 0..1000 {
        let w = format!("w{i:04}");
        let len = rng.random_range(2..=8);
        let pron: Vec<PhonemeId> = (0..len).map(|_| PhonemeId(rng.random_range(0..inv.len() as u16))).collect();
        lex.insert(&w, pron).unwrap();
        words.push(w);
    }
    let stream: Vec<&str> = (0..10_000).map(|_| words[rng.random_range(0..words.len())].as_str()).collect();

    let serialize = |mode: Mode, seed: u64| -> Result<(String, Vec<phonerr::simulate::SimRecord>), String> {
        let policy = Policy { mode, max_subs: Some(2), rate: 0.6 };
        let (recs, stats) = generate_corpus(&stream, &lex, &pairs, policy, seed).map_err(|e| e.to_string())?;
        ensure(recs.len() == 10_000, || format!("{} records", recs.len()))?;
        ensure(stats.pair_counts.iter().sum::<usize>() == stats.edits, || "pair counts do not sum".into())?;
        let mut out = String::new();
        for r in &recs {
            out.push_str(&serde_json::to_string(&SimRecordOut::from_record(r, inv)).unwrap());
            out.push('\n');
        }
        Ok((out, recs))
    };

    let mut total_edits = 0;
    for mode in [Mode::All, Mode::Vowel, Mode::Consonant] {
        let (text, recs) = serialize(mode, 2024)?;
        let (again, _) = serialize(mode, 2024)?;
        ensure(text == again, || format!("{mode:?}: rerun not byte-identical"))?;
        for (k, r) in recs.iter().enumerate() {
            ensure(apply_edits(&r.reference, &r.edits).as_ref() == Some(&r.modified), || format!("record {k} does not replay"))?;
            ensure(revert_edits(&r.modified, &r.edits).as_ref() == Some(&r.reference), || format!("record {k} does not revert"))?;
            for e in &r.edits {
                let pair = pairs.iter().find(|p| p.covers(e.from, e.to));
                ensure(pair.is_some(), || format!("record {k}: edit outside the pair set"))?;
                let class = pair.unwrap().class;
                let ok = match mode {
                    Mode::All => true,
                    Mode::Vowel => class == PairClass::Vowel,
                    Mode::Consonant => class == PairClass::Consonant,
                };
                ensure(ok, || format!("record {k}: {class} edit under {mode:?}"))?;
                let fv = table.features(e.from).is_vowel;
                ensure(fv == table.features(e.to).is_vowel, || format!("record {k}: cross-class edit"))?;
            }
            total_edits += r.edits.len();
        }
    }
    ensure(total_edits > 0, || "no edits generated".into())?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("3 x 10000 records, {total_edits} edits, {elapsed:.2?}"))
}

fn ac8_aer() -> Outcome {
    let inv = PhonemeInventory::new(["A", "B"]).unwrap();
    let refs = EmbeddingTable::new(inv, vec![vec![0.0], vec![10.0]]).unwrap();
    let a = PhonemeId(0);
    let track = ArticulatoryTrack::new(vec![vec![0.0], vec![6.0], vec![10.0]], vec![a; 3]).unwrap();
    let v = aer(&track, &refs, metrics::DEFAULT_TAU_FACTOR).unwrap();
    ensure(v == 2.0 / 3.0, || format!("hand example gave {v}"))?;

    let on_target = ArticulatoryTrack::new(
        vec![vec![0.0], vec![10.0], vec![0.0]],
        vec![PhonemeId(0), PhonemeId(1), PhonemeId(0)],
    )
    .unwrap();
    ensure(aer(&on_target, &refs, 0.5).unwrap() == 0.0, || "on-target frames not all positive".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let frames: Vec<Vec<f64>> = (0..50).map(|_| vec![rng.random_range(-5.0..15.0)]).collect();
    let targets: Vec<PhonemeId> = (0..50).map(|_| PhonemeId(rng.random_range(0..2))).collect();
    let track = ArticulatoryTrack::new(frames, targets).unwrap();
    let series: Vec<f64> = [1.0, 0.5, 0.25].iter().map(|&f| aer(&track, &refs, f).unwrap()).collect();
    ensure(series.windows(2).all(|w| w[0] <= w[1]), || format!("not monotone: {series:?}"))?;
    Ok(format!("hand example 2/3, tau sweep {series:.3?}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("AC1 similarity invariants", ac1_similarity_invariants),
        ("AC2 metric oracle", ac2_metric_oracle),
        ("AC3 CTC oracle", ac3_ctc_oracle),
        ("AC4 gradient checks", ac4_gradient_checks),
        ("AC5 training surrogate", ac5_training_surrogate),
        ("AC6 WPER golden value", ac6_wper_golden),
        ("AC7 simulation closure", ac7_simulation_closure),
        ("AC8 AER semantics", ac8_aer),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
