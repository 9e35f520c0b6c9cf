use std::collections::BTreeMap;

use super::loss::{forward_backward, log_add};
use super::ProbMatrix;
use crate::inventory::PhonemeId;
use crate::{Error, Result};

/// Best-path decoding: per-frame argmax (lowest index wins ties), repeats
/// collapsed, blanks dropped.
pub fn greedy_decode(probs: &ProbMatrix) -> Vec<PhonemeId> {
    let blank = probs.blank();
    let mut out = Vec::new();
    let mut prev = blank;
    for t in 0..probs.frames() {
        let row = probs.row(t);
        let mut best = 0;
        for (k, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = k;
            }
        }
        if best != blank && best != prev {
            out.push(PhonemeId(best as u16));
        }
        prev = best;
    }
    out
}

/// A labeling kept by the beam with its exact CTC log-probability.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    pub labels: Vec<PhonemeId>,
    pub log_prob: f64,
}

#[derive(Clone, Copy)]
struct PrefixScore {
    blank: f64,
    non_blank: f64,
}

impl PrefixScore {
    const EMPTY: PrefixScore = PrefixScore { blank: f64::NEG_INFINITY, non_blank: f64::NEG_INFINITY };

    fn total(self) -> f64 {
        log_add(self.blank, self.non_blank)
    }
}

/// CTC prefix beam search. Returns the surviving hypotheses, best first by
/// exact labeling probability; ties go to the lexicographically smaller
/// labeling.
pub fn beam_search(probs: &ProbMatrix, beam_width: usize) -> Result<Vec<Hypothesis>> {
    if beam_width == 0 {
        return Err(Error::InvalidArgument("beam width must be at least 1".into()));
    }
    let blank = probs.blank();
    let mut beams: Vec<(Vec<usize>, PrefixScore)> =
        vec![(Vec::new(), PrefixScore { blank: 0.0, non_blank: f64::NEG_INFINITY })];

    for t in 0..probs.frames() {
        let lp: Vec<f64> = probs.row(t).iter().map(|p| p.ln()).collect();
        let mut next: BTreeMap<Vec<usize>, PrefixScore> = BTreeMap::new();
        for (prefix, score) in &beams {
            let total = score.total();
            let e = next.entry(prefix.clone()).or_insert(PrefixScore::EMPTY);
            e.blank = log_add(e.blank, total + lp[blank]);

            for (c, &lpc) in lp.iter().enumerate() {
                if c == blank || lpc == f64::NEG_INFINITY {
                    continue;
                }
                let mut extended = prefix.clone();
                extended.push(c);
                if prefix.last() == Some(&c) {
                    let e = next.entry(prefix.clone()).or_insert(PrefixScore::EMPTY);
                    e.non_blank = log_add(e.non_blank, score.non_blank + lpc);
                    let e = next.entry(extended).or_insert(PrefixScore::EMPTY);
                    e.non_blank = log_add(e.non_blank, score.blank + lpc);
                } else {
                    let e = next.entry(extended).or_insert(PrefixScore::EMPTY);
                    e.non_blank = log_add(e.non_blank, total + lpc);
                }
            }
        }
        let mut ranked: Vec<(Vec<usize>, PrefixScore)> =
            next.into_iter().filter(|(_, s)| s.total() > f64::NEG_INFINITY).collect();
        // stable sort keeps BTreeMap (lexicographic) order among equal scores
        ranked.sort_by(|a, b| b.1.total().total_cmp(&a.1.total()));
        ranked.truncate(beam_width);
        beams = ranked;
    }

    // Pruning makes in-beam scores lower bounds; rescore survivors exactly.
    let mut out: Vec<Hypothesis> = beams
        .into_iter()
        .map(|(labels, _)| {
            let labels: Vec<PhonemeId> = labels.into_iter().map(|c| PhonemeId(c as u16)).collect();
            let log_prob = labeling_log_prob(probs, &labels);
            Hypothesis { labels, log_prob }
        })
        .collect();
    out.sort_by(|a, b| b.log_prob.total_cmp(&a.log_prob).then_with(|| a.labels.cmp(&b.labels)));
    Ok(out)
}

/// Best labeling found by [`beam_search`]. `usize::MAX` searches exhaustively.
pub fn beam_decode(probs: &ProbMatrix, beam_width: usize) -> Result<Vec<PhonemeId>> {
    Ok(beam_search(probs, beam_width)?.into_iter().next().map(|h| h.labels).unwrap_or_default())
}

/// Exact CTC log-probability of a labeling (empty allowed).
pub fn labeling_log_prob(probs: &ProbMatrix, labels: &[PhonemeId]) -> f64 {
    let mut log_em = probs.matrix().clone();
    log_em.values_mut().iter_mut().for_each(|v| *v = v.ln());
    let labels: Vec<usize> = labels.iter().map(|p| p.index()).collect();
    match forward_backward(&log_em, &labels, probs.blank()) {
        Ok((nll, _)) => -nll,
        Err(_) => f64::NEG_INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // columns A, B, blank
    fn one_hot(frames: &[usize]) -> ProbMatrix {
        let rows: Vec<Vec<f64>> = frames
            .iter()
            .map(|&k| {
                let mut r = vec![0.0; 3];
                r[k] = 1.0;
                r
            })
            .collect();
        ProbMatrix::from_rows(&rows).unwrap()
    }

    const A: usize = 0;
    const B: usize = 1;
    const BLANK: usize = 2;

    #[test]
    fn greedy_collapse_rules() {
        assert_eq!(greedy_decode(&one_hot(&[A, A, BLANK, B])), [PhonemeId(0), PhonemeId(1)]);
        assert!(greedy_decode(&one_hot(&[BLANK, BLANK])).is_empty());
        assert_eq!(greedy_decode(&one_hot(&[A, BLANK, A])), [PhonemeId(0), PhonemeId(0)]);
    }

    #[test]
    fn greedy_ties_go_to_lowest_index() {
        let p = ProbMatrix::from_rows(&[vec![0.4, 0.4, 0.2]]).unwrap();
        assert_eq!(greedy_decode(&p), [PhonemeId(0)]);
    }

    #[test]
    fn beam_one_matches_greedy_on_peaked_frames() {
        let p = one_hot(&[A, A, BLANK, B, B, A]);
        assert_eq!(beam_decode(&p, 1).unwrap(), greedy_decode(&p));
    }

    #[test]
    fn beam_merges_paths() {
        // greedy picks blank at every frame, but A collects more total mass
        let p = ProbMatrix::from_rows(&[vec![0.4, 0.0, 0.6], vec![0.4, 0.0, 0.6]]).unwrap();
        assert!(greedy_decode(&p).is_empty());
        assert_eq!(beam_decode(&p, 4).unwrap(), [PhonemeId(0)]);
        let h = beam_search(&p, 4).unwrap();
        assert!((h[0].log_prob - (0.16f64 + 0.24 + 0.24).ln()).abs() < 1e-12);
        assert!((labeling_log_prob(&p, &[PhonemeId(0)]) - h[0].log_prob).abs() < 1e-12);
    }

    #[test]
    fn zero_width_rejected() {
        assert!(beam_decode(&one_hot(&[A]), 0).is_err());
    }
}
