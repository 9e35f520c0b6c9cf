//! Independent oracles shared by the integration suites. Nothing here calls
//! the dynamic programs it is used to check.
#![allow(dead_code)]

use phonerr::ctc::{LogitMatrix, Matrix, TargetSeq};
use phonerr::{NormalizedSimilarity, PhonemeId};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Minimal unit edit cost by enumerating every alignment path.
pub fn brute_force_edit_cost(r: &[PhonemeId], h: &[PhonemeId]) -> usize {
    match (r.split_first(), h.split_first()) {
        (None, None) => 0,
        (Some(_), None) => r.len(),
        (None, Some(_)) => h.len(),
        (Some((a, rr)), Some((b, hh))) => {
            let diag = usize::from(a != b) + brute_force_edit_cost(rr, hh);
            let del = 1 + brute_force_edit_cost(rr, h);
            let ins = 1 + brute_force_edit_cost(r, hh);
            diag.min(del).min(ins)
        }
    }
}

/// Collapses a frame path: merge repeats, then drop blanks.
pub fn collapse(path: &[usize], blank: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev = None;
    for &k in path {
        if Some(k) != prev && k != blank {
            out.push(k);
        }
        prev = Some(k);
    }
    out
}

/// Calls `f` with every length-`frames` path over `width` symbols.
pub fn for_each_path(frames: usize, width: usize, mut f: impl FnMut(&[usize])) {
    let mut path = vec![0usize; frames];
    loop {
        f(&path);
        let mut t = 0;
        loop {
            if t == frames {
                return;
            }
            path[t] += 1;
            if path[t] < width {
                break;
            }
            path[t] = 0;
            t += 1;
        }
    }
}

/// `-log sum_{paths collapsing to y} prod_t q_t(path_t)` with
/// `q_t(z) = sum_j s_ext(z, j) p_t(j)` and a one-hot blank row.
pub fn brute_force_soft_ctc(probs: &[Vec<f64>], y: &[usize], s_hat: &[Vec<f64>]) -> f64 {
    let width = probs[0].len();
    let blank = width - 1;
    let q: Vec<Vec<f64>> = probs
        .iter()
        .map(|p| {
            (0..width)
                .map(|z| {
                    if z == blank {
                        p[blank]
                    } else {
                        (0..blank).map(|j| s_hat[z][j] * p[j]).sum()
                    }
                })
                .collect()
        })
        .collect();
    let mut total = 0.0;
    for_each_path(probs.len(), width, |path| {
        if collapse(path, blank) == y {
            total += path.iter().enumerate().map(|(t, &k)| q[t][k]).product::<f64>();
        }
    });
    -total.ln()
}

/// Total CTC probability of every distinct labeling, by path enumeration.
pub fn brute_force_labelings(probs: &[Vec<f64>]) -> Vec<(Vec<usize>, f64)> {
    let width = probs[0].len();
    let mut acc: std::collections::BTreeMap<Vec<usize>, f64> = Default::default();
    for_each_path(probs.len(), width, |path| {
        let p: f64 = path.iter().enumerate().map(|(t, &k)| probs[t][k]).product();
        *acc.entry(collapse(path, width - 1)).or_default() += p;
    });
    acc.into_iter().collect()
}

pub fn random_simplex_row(rng: &mut ChaCha8Rng, width: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..width).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

pub fn random_s_hat(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.6)).collect();
            row[i] = 1.0;
            let s: f64 = row.iter().sum();
            row.into_iter().map(|v| v / s).collect()
        })
        .collect()
}

/// Random target of length `1..=max_len` that fits in `frames` frames.
pub fn random_target(rng: &mut ChaCha8Rng, n: usize, max_len: usize, frames: usize) -> Vec<usize> {
    loop {
        let len = rng.random_range(1..=max_len);
        let y: Vec<usize> = (0..len).map(|_| rng.random_range(0..n)).collect();
        let repeats = y.windows(2).filter(|w| w[0] == w[1]).count();
        if y.len() + repeats <= frames {
            return y;
        }
    }
}

pub fn target_seq(y: &[usize]) -> TargetSeq {
    TargetSeq::new(y.iter().map(|&k| PhonemeId(k as u16)).collect()).unwrap()
}

pub fn s_hat(rows: &[Vec<f64>]) -> NormalizedSimilarity {
    NormalizedSimilarity::from_rows(rows).unwrap()
}

pub fn random_logits(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> LogitMatrix {
    Matrix::from_flat(rows, cols, (0..rows * cols).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
}

/// Per-entry comparison outcome of an analytic gradient against central
/// differences.
#[derive(Debug)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub failures: Vec<(usize, f64, f64)>,
}

pub const FD_STEP: f64 = 1e-5;
pub const FD_REL_TOL: f64 = 1e-4;
/// Entries whose gradient is this small in absolute terms are compared
/// absolutely; central-difference round-off at h = 1e-5 is ~1e-10.
pub const FD_ABS_FLOOR: f64 = 1e-8;

pub fn check_gradient(x: &Matrix, analytic: &Matrix, f: impl Fn(&Matrix) -> f64) -> GradCheck {
    let mut out = GradCheck { max_rel_error: 0.0, failures: Vec::new() };
    for i in 0..x.values().len() {
        let mut plus = x.clone();
        let mut minus = x.clone();
        plus.values_mut()[i] += FD_STEP;
        minus.values_mut()[i] -= FD_STEP;
        let numeric = (f(&plus) - f(&minus)) / (2.0 * FD_STEP);
        let a = analytic.values()[i];
        let err = (a - numeric).abs();
        let scale = a.abs().max(numeric.abs());
        let rel = if scale > 0.0 { err / scale } else { 0.0 };
        out.max_rel_error = out.max_rel_error.max(rel);
        if rel > FD_REL_TOL && err > FD_ABS_FLOOR {
            out.failures.push((i, a, numeric));
        }
    }
    out
}
