//! Pronunciation-difference metrics.
//!
//! PER counts unit-cost edits against the reference length. WPER discounts
//! each substitution by the similarity of the substituted pair. AER is the
//! fraction of articulatory frames lying farther than a threshold from their
//! target phoneme's reference position.

use serde::{Deserialize, Serialize};

use crate::inventory::PhonemeId;
use crate::similarity::{l2, EmbeddingTable, SimilarityMatrix};
use crate::{Error, Result};

pub const DEFAULT_TAU_FACTOR: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Match,
    Substitute,
    Insert,
    Delete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EditOp {
    pub kind: OpKind,
    pub reference: Option<PhonemeId>,
    pub hypothesis: Option<PhonemeId>,
}

impl EditOp {
    fn matched(r: PhonemeId) -> Self {
        Self { kind: OpKind::Match, reference: Some(r), hypothesis: Some(r) }
    }

    fn substitute(r: PhonemeId, h: PhonemeId) -> Self {
        Self { kind: OpKind::Substitute, reference: Some(r), hypothesis: Some(h) }
    }

    fn delete(r: PhonemeId) -> Self {
        Self { kind: OpKind::Delete, reference: Some(r), hypothesis: None }
    }

    fn insert(h: PhonemeId) -> Self {
        Self { kind: OpKind::Insert, reference: None, hypothesis: Some(h) }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    pub matches: usize,
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
}

impl OpCounts {
    pub fn errors(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentResult {
    pub ops: Vec<EditOp>,
    pub counts: OpCounts,
    pub ref_len: usize,
}

impl AlignmentResult {
    /// Hypothesis reconstructed by applying the ops to the reference.
    pub fn replay(&self) -> Vec<PhonemeId> {
        self.ops.iter().filter_map(|op| op.hypothesis).collect()
    }

    pub fn reference(&self) -> Vec<PhonemeId> {
        self.ops.iter().filter_map(|op| op.reference).collect()
    }

    pub fn substitutions(&self) -> impl Iterator<Item = (PhonemeId, PhonemeId)> + '_ {
        self.ops.iter().filter(|op| op.kind == OpKind::Substitute).filter_map(|op| {
            Some((op.reference?, op.hypothesis?))
        })
    }
}

/// Which alignment WPER ranges over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WperAlignment {
    /// DP with substitution cost `1 - S(r, h)`.
    #[default]
    Weighted,
    /// The unit-cost alignment also used for PER.
    Unit,
}

/// Levenshtein alignment with unit substitution, insertion and deletion costs.
///
/// Among minimal alignments the backtrace prefers match, then substitute,
/// then delete, then insert.
pub fn align(reference: &[PhonemeId], hypothesis: &[PhonemeId]) -> Result<AlignmentResult> {
    align_with(reference, hypothesis, |_, _| 1.0)
}

/// Alignment that charges `1 - S(r, h)` per substitution, so it minimizes
/// the WPER numerator directly.
pub fn align_weighted(
    reference: &[PhonemeId],
    hypothesis: &[PhonemeId],
    s: &SimilarityMatrix,
) -> Result<AlignmentResult> {
    let n = s.n();
    if let Some(bad) = reference.iter().chain(hypothesis).find(|p| p.index() >= n) {
        return Err(Error::UnknownPhoneme(bad.to_string()));
    }
    align_with(reference, hypothesis, |r, h| 1.0 - s.get(r, h))
}

fn align_with(
    reference: &[PhonemeId],
    hypothesis: &[PhonemeId],
    sub_cost: impl Fn(PhonemeId, PhonemeId) -> f64,
) -> Result<AlignmentResult> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    let (m, n) = (reference.len(), hypothesis.len());
    let w = n + 1;
    let mut cost = vec![0.0f64; (m + 1) * w];
    for i in 0..=m {
        cost[i * w] = i as f64;
    }
    for (j, c) in cost[..w].iter_mut().enumerate() {
        *c = j as f64;
    }
    let diag = |i: usize, j: usize| {
        let (r, h) = (reference[i - 1], hypothesis[j - 1]);
        if r == h {
            0.0
        } else {
            sub_cost(r, h)
        }
    };
    for i in 1..=m {
        for j in 1..=n {
            let d = cost[(i - 1) * w + j - 1] + diag(i, j);
            let del = cost[(i - 1) * w + j] + 1.0;
            let ins = cost[i * w + j - 1] + 1.0;
            cost[i * w + j] = d.min(del).min(ins);
        }
    }

    let mut ops = Vec::with_capacity(m.max(n));
    let mut counts = OpCounts::default();
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        let here = cost[i * w + j];
        if i > 0 && j > 0 && cost[(i - 1) * w + j - 1] + diag(i, j) == here {
            let (r, h) = (reference[i - 1], hypothesis[j - 1]);
            if r == h {
                ops.push(EditOp::matched(r));
                counts.matches += 1;
            } else {
                ops.push(EditOp::substitute(r, h));
                counts.substitutions += 1;
            }
            i -= 1;
            j -= 1;
        } else if i > 0 && cost[(i - 1) * w + j] + 1.0 == here {
            ops.push(EditOp::delete(reference[i - 1]));
            counts.deletions += 1;
            i -= 1;
        } else {
            ops.push(EditOp::insert(hypothesis[j - 1]));
            counts.insertions += 1;
            j -= 1;
        }
    }
    ops.reverse();
    Ok(AlignmentResult { ops, counts, ref_len: m })
}

/// `(S + I + D) / L`. Not clamped: insertions can push it past 1.
pub fn per(a: &AlignmentResult) -> f64 {
    a.counts.errors() as f64 / a.ref_len as f64
}

/// `(D + sum(1 - S(r, s)) + I) / L` over the alignment's substitutions.
pub fn wper(a: &AlignmentResult, s: &SimilarityMatrix) -> f64 {
    let subs: f64 = a.substitutions().map(|(r, h)| 1.0 - s.get(r, h)).sum();
    (a.counts.deletions as f64 + subs + a.counts.insertions as f64) / a.ref_len as f64
}

/// PER and WPER of one reference/hypothesis pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairScores {
    pub per: f64,
    pub wper: f64,
    /// The unit-cost alignment behind `per`.
    pub alignment: AlignmentResult,
}

pub fn score_pair(
    reference: &[PhonemeId],
    hypothesis: &[PhonemeId],
    s: &SimilarityMatrix,
    mode: WperAlignment,
) -> Result<PairScores> {
    let alignment = align(reference, hypothesis)?;
    let wper = match mode {
        WperAlignment::Unit => wper(&alignment, s),
        WperAlignment::Weighted => wper(&align_weighted(reference, hypothesis, s)?, s),
    };
    Ok(PairScores { per: per(&alignment), wper, alignment })
}

/// Articulatory feature frames with a target phoneme per frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ArticulatoryTrack {
    dim: usize,
    frames: Vec<f64>,
    targets: Vec<PhonemeId>,
}

impl ArticulatoryTrack {
    pub fn new(frames: Vec<Vec<f64>>, targets: Vec<PhonemeId>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::InvalidArgument("articulatory track has no frames".into()));
        }
        if frames.len() != targets.len() {
            return Err(Error::Dimension { expected: frames.len(), got: targets.len() });
        }
        let dim = frames[0].len();
        let mut flat = Vec::with_capacity(dim * frames.len());
        for f in &frames {
            if f.len() != dim {
                return Err(Error::Dimension { expected: dim, got: f.len() });
            }
            if f.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument("non-finite articulatory value".into()));
            }
            flat.extend_from_slice(f);
        }
        Ok(Self { dim, frames: flat, targets })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.frames[t * self.dim..(t + 1) * self.dim]
    }

    pub fn targets(&self) -> &[PhonemeId] {
        &self.targets
    }
}

/// Spreads `frames` frames evenly over `reference`, earlier phonemes taking
/// the remainder.
pub fn uniform_frame_targets(reference: &[PhonemeId], frames: usize) -> Result<Vec<PhonemeId>> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    if frames < reference.len() {
        return Err(Error::Infeasible { frames, required: reference.len() });
    }
    Ok((0..frames).map(|t| reference[t * reference.len() / frames]).collect())
}

/// Fraction of frames farther than `tau_factor * max_pairwise_distance` from
/// their target's reference vector.
pub fn aer(track: &ArticulatoryTrack, refs: &EmbeddingTable, tau_factor: f64) -> Result<f64> {
    if track.dim != refs.dim() {
        return Err(Error::Dimension { expected: refs.dim(), got: track.dim });
    }
    if !(tau_factor > 0.0 && tau_factor.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau factor must be positive, got {tau_factor}")));
    }
    let n = refs.inventory().len();
    if let Some(bad) = track.targets.iter().find(|p| p.index() >= n) {
        return Err(Error::UnknownPhoneme(bad.to_string()));
    }
    let spread = refs.max_pairwise_distance();
    if spread <= 0.0 {
        return Err(Error::DegenerateEmbedding("all reference vectors coincide".into()));
    }
    let tau = tau_factor * spread;
    let negatives = (0..track.len())
        .filter(|&t| l2(track.frame(t), refs.vector(track.targets[t])) > tau)
        .count();
    Ok(negatives as f64 / track.len() as f64)
}
