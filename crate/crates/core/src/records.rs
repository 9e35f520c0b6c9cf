//! JSONL record shapes exchanged with the outside world. Phonemes travel as
//! symbols; conversions take the inventory that gives them meaning.

use serde::{Deserialize, Serialize};

use crate::inventory::PhonemeInventory;
use crate::metrics::{EditOp, OpKind};
use crate::simulate::SimRecord;

/// Scoring input: one utterance's reference and recognized phonemes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreInput {
    pub id: String,
    #[serde(rename = "ref")]
    pub reference: Vec<String>,
    pub hyp: Vec<String>,
}

/// Articulatory frames for AER, joined to [`ScoreInput`] by `id`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArticulatoryInput {
    pub id: String,
    pub frames: Vec<Vec<f64>>,
    pub frame_targets: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpRecord {
    pub op: OpKind,
    #[serde(rename = "ref", default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyp: Option<String>,
}

impl OpRecord {
    pub fn from_op(op: &EditOp, inv: &PhonemeInventory) -> Self {
        Self {
            op: op.kind,
            reference: op.reference.map(|p| inv.symbol(p).to_string()),
            hyp: op.hypothesis.map(|p| inv.symbol(p).to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreOutput {
    pub id: String,
    pub per: f64,
    pub wper: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aer: Option<f64>,
    pub ops: Vec<OpRecord>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Indexing {
    /// One row per acoustic frame (CTC losses).
    #[default]
    Frame,
    /// One row per target phoneme (mapping loss).
    Step,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossInput {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logits: Option<Vec<Vec<f64>>>,
    pub target: Vec<String>,
    #[serde(default)]
    pub indexing: Indexing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossOutput {
    pub id: String,
    pub total: f64,
    pub ctc_part: f64,
    pub map_part: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeInput {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logits: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeOutput {
    pub id: String,
    pub hyp: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EditRecord {
    pub position: usize,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimRecordOut {
    pub word: String,
    pub reference: Vec<String>,
    pub modified: Vec<String>,
    pub edits: Vec<EditRecord>,
    pub seed: u64,
    /// Left empty; filled in by whoever synthesizes the audio.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_path: Option<String>,
}

impl SimRecordOut {
    pub fn from_record(r: &SimRecord, inv: &PhonemeInventory) -> Self {
        Self {
            word: r.word.clone(),
            reference: inv.render(&r.reference),
            modified: inv.render(&r.modified),
            edits: r
                .edits
                .iter()
                .map(|e| EditRecord {
                    position: e.position,
                    from: inv.symbol(e.from).to_string(),
                    to: inv.symbol(e.to).to_string(),
                })
                .collect(),
            seed: r.seed,
            audio_path: None,
        }
    }
}
