use super::{softmax_backward, GradMatrix, Lambdas, LogitMatrix, LossValue, Matrix, ProbMatrix, TargetSeq};
use crate::similarity::NormalizedSimilarity;
use crate::{Error, Result};

/// One loss term and its gradient with respect to the input probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct LossPart {
    pub value: f64,
    pub grad: GradMatrix,
}

impl LossPart {
    /// Gradient with respect to the logits that produced `probs`.
    pub fn logit_grad(&self, probs: &ProbMatrix) -> GradMatrix {
        softmax_backward(probs, &self.grad)
    }
}

#[inline]
pub(super) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// CTC forward-backward over log emission scores `log_em` (`frames x width`).
///
/// Returns the negative log path sum and `d(-log P)/d(emission)` in the
/// linear domain. The gradient is built from pre-emission forward and
/// post-emission backward variables, so it stays finite when an emission
/// is zero. `labels` may be empty (the all-blank path).
pub(super) fn forward_backward(
    log_em: &Matrix,
    labels: &[usize],
    blank: usize,
) -> Result<(f64, GradMatrix)> {
    let frames = log_em.rows();
    let width = log_em.cols();
    let required = labels.len() + labels.windows(2).filter(|w| w[0] == w[1]).count();
    if frames < required {
        return Err(Error::Infeasible { frames, required });
    }

    // extended label sequence: blank, y1, blank, y2, ..., blank
    let s_len = 2 * labels.len() + 1;
    let ext: Vec<usize> = (0..s_len).map(|s| if s % 2 == 0 { blank } else { labels[s / 2] }).collect();
    let can_skip = |s: usize| s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];

    let ninf = f64::NEG_INFINITY;
    let idx = |t: usize, s: usize| t * s_len + s;

    // alpha_pre: mass arriving at (t, s) before emitting at t
    let mut alpha_pre = vec![ninf; frames * s_len];
    let mut alpha = vec![ninf; frames * s_len];
    alpha_pre[idx(0, 0)] = 0.0;
    if s_len > 1 {
        alpha_pre[idx(0, 1)] = 0.0;
    }
    for t in 0..frames {
        if t > 0 {
            for s in 0..s_len {
                let mut a = alpha[idx(t - 1, s)];
                if s >= 1 {
                    a = log_add(a, alpha[idx(t - 1, s - 1)]);
                }
                if can_skip(s) {
                    a = log_add(a, alpha[idx(t - 1, s - 2)]);
                }
                alpha_pre[idx(t, s)] = a;
            }
        }
        for s in 0..s_len {
            alpha[idx(t, s)] = alpha_pre[idx(t, s)] + log_em.get(t, ext[s]);
        }
    }

    let last = frames - 1;
    let mut log_p = alpha[idx(last, s_len - 1)];
    if s_len > 1 {
        log_p = log_add(log_p, alpha[idx(last, s_len - 2)]);
    }
    if log_p == ninf || log_p.is_nan() {
        return Err(Error::ZeroProbability);
    }

    // beta_post: mass from (t, s) to the end, excluding the emission at t
    let mut beta_post = vec![ninf; frames * s_len];
    let mut beta = vec![ninf; frames * s_len];
    beta_post[idx(last, s_len - 1)] = 0.0;
    if s_len > 1 {
        beta_post[idx(last, s_len - 2)] = 0.0;
    }
    for t in (0..frames).rev() {
        if t < last {
            for s in 0..s_len {
                let mut b = beta[idx(t + 1, s)];
                if s + 1 < s_len {
                    b = log_add(b, beta[idx(t + 1, s + 1)]);
                }
                if s + 2 < s_len && can_skip(s + 2) {
                    b = log_add(b, beta[idx(t + 1, s + 2)]);
                }
                beta_post[idx(t, s)] = b;
            }
        }
        for s in 0..s_len {
            beta[idx(t, s)] = beta_post[idx(t, s)] + log_em.get(t, ext[s]);
        }
    }

    // dP/dq_t(k) = sum over s with ext[s] == k of alpha_pre * beta_post
    let mut grad = Matrix::zeros(frames, width);
    let mut occ = vec![ninf; width];
    for t in 0..frames {
        occ.iter_mut().for_each(|v| *v = ninf);
        for s in 0..s_len {
            let k = ext[s];
            occ[k] = log_add(occ[k], alpha_pre[idx(t, s)] + beta_post[idx(t, s)]);
        }
        let row = &mut grad.values_mut()[t * width..(t + 1) * width];
        for (g, &o) in row.iter_mut().zip(&occ) {
            if o != ninf {
                *g = -(o - log_p).exp();
            }
        }
    }
    Ok((-log_p, grad))
}

fn check_width(probs: &ProbMatrix, s_hat: &NormalizedSimilarity) -> Result<()> {
    if probs.width() != s_hat.n() + 1 {
        return Err(Error::Dimension { expected: s_hat.n() + 1, got: probs.width() });
    }
    Ok(())
}

fn labels_of(y: &TargetSeq, width: usize) -> Result<Vec<usize>> {
    let blank = width - 1;
    y.as_slice()
        .iter()
        .map(|p| {
            if p.index() < blank {
                Ok(p.index())
            } else {
                Err(Error::UnknownPhoneme(p.to_string()))
            }
        })
        .collect()
}

fn log_matrix(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    out.values_mut().iter_mut().for_each(|v| *v = v.ln());
    out
}

/// Classical CTC negative log-likelihood.
pub fn standard_ctc_loss(probs: &ProbMatrix, y: &TargetSeq) -> Result<LossPart> {
    let labels = labels_of(y, probs.width())?;
    let (value, grad) = forward_backward(&log_matrix(probs.matrix()), &labels, probs.blank())?;
    Ok(LossPart { value, grad })
}

/// CTC with similarity-weighted emissions `q_t(z) = sum_j S_hat(z, j) p_t(j)`.
/// The blank keeps its own probability.
pub fn soft_ctc_loss(probs: &ProbMatrix, y: &TargetSeq, s_hat: &NormalizedSimilarity) -> Result<LossPart> {
    check_width(probs, s_hat)?;
    let labels = labels_of(y, probs.width())?;
    let w = probs.width();
    let ext = s_hat.with_blank();

    let mut q = Matrix::zeros(probs.frames(), w);
    for t in 0..probs.frames() {
        let p = probs.row(t);
        for k in 0..w {
            let srow = &ext[k * w..(k + 1) * w];
            let mut acc = 0.0;
            for (s, pj) in srow.iter().zip(p) {
                acc += s * pj;
            }
            q.values_mut()[t * w + k] = acc;
        }
    }
    let (value, gq) = forward_backward(&log_matrix(&q), &labels, probs.blank())?;

    // dL/dp_t(j) = sum_k dL/dq_t(k) S_ext(k, j)
    let mut grad = Matrix::zeros(probs.frames(), w);
    for t in 0..probs.frames() {
        let g = gq.row(t);
        for j in 0..w {
            let mut acc = 0.0;
            for k in 0..w {
                acc += g[k] * ext[k * w + j];
            }
            grad.values_mut()[t * w + j] = acc;
        }
    }
    Ok(LossPart { value, grad })
}

/// Squared error between per-step distributions and soft labels
/// `S_hat(y_t, .)` (zero mass on blank). `probs` has one row per target.
pub fn soft_mapping_loss(probs: &ProbMatrix, y: &TargetSeq, s_hat: &NormalizedSimilarity) -> Result<LossPart> {
    check_width(probs, s_hat)?;
    if probs.frames() != y.len() {
        return Err(Error::Dimension { expected: y.len(), got: probs.frames() });
    }
    let labels = labels_of(y, probs.width())?;
    let w = probs.width();
    let mut grad = Matrix::zeros(probs.frames(), w);
    let mut value = 0.0;
    for (t, &label) in labels.iter().enumerate() {
        let soft = s_hat.row(label);
        for j in 0..w {
            let target = soft.get(j).copied().unwrap_or(0.0);
            let d = probs.get(t, j) - target;
            value += d * d;
            grad.values_mut()[t * w + j] = 2.0 * d;
        }
    }
    Ok(LossPart { value, grad })
}

fn from_logits(
    logits: &LogitMatrix,
    f: impl FnOnce(&ProbMatrix) -> Result<LossPart>,
) -> Result<LossPart> {
    let probs = ProbMatrix::softmax(logits);
    let part = f(&probs)?;
    Ok(LossPart { value: part.value, grad: part.logit_grad(&probs) })
}

/// [`standard_ctc_loss`] of `softmax(logits)`, gradient w.r.t. logits.
pub fn standard_ctc_loss_from_logits(logits: &LogitMatrix, y: &TargetSeq) -> Result<LossPart> {
    from_logits(logits, |p| standard_ctc_loss(p, y))
}

/// [`soft_ctc_loss`] of `softmax(logits)`, gradient w.r.t. logits.
pub fn soft_ctc_loss_from_logits(
    logits: &LogitMatrix,
    y: &TargetSeq,
    s_hat: &NormalizedSimilarity,
) -> Result<LossPart> {
    from_logits(logits, |p| soft_ctc_loss(p, y, s_hat))
}

/// [`soft_mapping_loss`] of `softmax(logits)`, gradient w.r.t. logits.
pub fn soft_mapping_loss_from_logits(
    logits: &LogitMatrix,
    y: &TargetSeq,
    s_hat: &NormalizedSimilarity,
) -> Result<LossPart> {
    from_logits(logits, |p| soft_mapping_loss(p, y, s_hat))
}

/// Weighted objective and the gradients of its total.
#[derive(Clone, Debug, PartialEq)]
pub struct CombinedLoss {
    pub value: LossValue,
    /// d(total)/d(frame probabilities)
    pub frame_grad: GradMatrix,
    /// d(total)/d(step probabilities)
    pub step_grad: GradMatrix,
}

/// `lambda_ctc * soft_ctc(frame_probs) + lambda_map * soft_mapping(step_probs)`.
pub fn combined_loss(
    frame_probs: &ProbMatrix,
    step_probs: &ProbMatrix,
    y: &TargetSeq,
    s_hat: &NormalizedSimilarity,
    lambdas: Lambdas,
) -> Result<CombinedLoss> {
    let ctc = soft_ctc_loss(frame_probs, y, s_hat)?;
    let map = soft_mapping_loss(step_probs, y, s_hat)?;
    let scale = |mut g: GradMatrix, c: f64| {
        g.values_mut().iter_mut().for_each(|v| *v *= c);
        g
    };
    Ok(CombinedLoss {
        value: LossValue::new(ctc.value, map.value, lambdas),
        frame_grad: scale(ctc.grad, lambdas.ctc),
        step_grad: scale(map.grad, lambdas.map),
    })
}
