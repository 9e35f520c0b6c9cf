//! WebAssembly bindings for the browser demo. Every export takes and returns
//! plain strings (JSON for structured results); the `*_json` functions hold
//! the logic so it can be tested natively.

use phonerr::ctc::{fit_logits_demo, FitConfig, ProbMatrix, TargetSeq};
use phonerr::metrics::{score_pair, WperAlignment};
use phonerr::records::OpRecord;
use phonerr::similarity::{self, heuristic_similarity, FeatureWeights, NormalizedSimilarity};
use phonerr::FeatureTable;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Heatmap<'a> {
    symbols: &'a [String],
    is_vowel: Vec<bool>,
    values: &'a [f64],
}

#[derive(Serialize)]
struct Score {
    per: f64,
    wper: f64,
    ops: Vec<OpRecord>,
}

#[derive(Serialize)]
struct Fit {
    history: Vec<f64>,
    decoded: Vec<String>,
    ctc_part: f64,
    map_part: f64,
    /// Frame posteriors after fitting, `frames x (N+1)`, blank last.
    posteriors: Vec<Vec<f64>>,
}

fn table() -> &'static FeatureTable {
    FeatureTable::default_table()
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Heuristic similarity matrix as `{symbols, is_vowel, values}` (row-major).
pub fn heatmap_json() -> Result<String, String> {
    let t = table();
    let s = heuristic_similarity(t, &FeatureWeights::DEFAULT).map_err(|e| e.to_string())?;
    let inv = t.inventory();
    to_json(&Heatmap {
        symbols: inv.symbols(),
        is_vowel: inv.ids().map(|id| t.features(id).is_vowel).collect(),
        values: s.values(),
    })
}

/// PER, WPER and the edit script for space-separated phoneme strings.
pub fn score_json(reference: &str, hypothesis: &str) -> Result<String, String> {
    let t = table();
    let inv = t.inventory();
    let r = inv.parse_str(&reference.to_uppercase()).map_err(|e| e.to_string())?;
    let h = inv.parse_str(&hypothesis.to_uppercase()).map_err(|e| e.to_string())?;
    let s = heuristic_similarity(t, &FeatureWeights::DEFAULT).map_err(|e| e.to_string())?;
    let scores = score_pair(&r, &h, &s, WperAlignment::Weighted).map_err(|e| e.to_string())?;
    to_json(&Score {
        per: scores.per,
        wper: scores.wper,
        ops: scores.alignment.ops.iter().map(|op| OpRecord::from_op(op, inv)).collect(),
    })
}

/// Fits free logits to `target` and reports the loss curve and decoding.
/// `soft` selects similarity-softened labels instead of one-hot ones.
pub fn fit_json(target: &str, frames: usize, steps: usize, soft: bool) -> Result<String, String> {
    let t = table();
    let inv = t.inventory();
    let y = inv
        .parse_str(&target.to_uppercase())
        .and_then(TargetSeq::new)
        .map_err(|e| e.to_string())?;
    let s_hat = if soft {
        let s = heuristic_similarity(t, &FeatureWeights::DEFAULT).map_err(|e| e.to_string())?;
        similarity::normalize(&s)
    } else {
        NormalizedSimilarity::identity(inv.len())
    };
    let cfg = FitConfig { frames, steps, ..FitConfig::default() };
    let report = fit_logits_demo(&y, &s_hat, &cfg).map_err(|e| e.to_string())?;
    to_json(&Fit {
        history: report.history,
        decoded: inv.render(&report.decoded),
        ctc_part: report.final_loss.ctc_part,
        map_part: report.final_loss.map_part,
        posteriors: ProbMatrix::softmax(&report.frame_logits).matrix().to_rows(),
    })
}

#[wasm_bindgen]
pub fn heatmap() -> Result<String, JsError> {
    heatmap_json().map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn score(reference: &str, hypothesis: &str) -> Result<String, JsError> {
    score_json(reference, hypothesis).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fit(target: &str, frames: usize, steps: usize, soft: bool) -> Result<String, JsError> {
    fit_json(target, frames, steps, soft).map_err(|e| JsError::new(&e))
}
