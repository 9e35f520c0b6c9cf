//! Gradient descent on free logits against the combined objective.
//!
//! A stand-in for model training at desk scale: it shows the objective can be
//! driven down from uniform predictions until greedy decoding recovers the
//! target.

use super::{combined_loss, softmax_backward, greedy_decode, Lambdas, LogitMatrix, LossValue, ProbMatrix, TargetSeq};
use crate::inventory::PhonemeId;
use crate::similarity::NormalizedSimilarity;
use crate::{Error, Result};

const MAX_HALVINGS: usize = 40;

/// How loss terms are aggregated for the optimizer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Reduction {
    /// Sums, exactly as the objective is written.
    #[default]
    Sum,
    /// CTC term divided by frame count, mapping term by target length.
    Mean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub frames: usize,
    pub steps: usize,
    pub learning_rate: f64,
    pub lambdas: Lambdas,
    pub reduction: Reduction,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { frames: 12, steps: 500, learning_rate: 1.0, lambdas: Lambdas::DEFAULT, reduction: Reduction::Sum }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub initial: LossValue,
    pub final_loss: LossValue,
    /// Total loss after each accepted step, starting with the initial value.
    pub history: Vec<f64>,
    pub decoded: Vec<PhonemeId>,
    pub frame_logits: LogitMatrix,
    pub step_logits: LogitMatrix,
    /// Number of times the step size was halved.
    pub halvings: usize,
}

struct Eval {
    value: LossValue,
    frame_grad: LogitMatrix,
    step_grad: LogitMatrix,
}

fn evaluate(
    frame_logits: &LogitMatrix,
    step_logits: &LogitMatrix,
    y: &TargetSeq,
    s_hat: &NormalizedSimilarity,
    cfg: &FitConfig,
) -> Result<Eval> {
    let (ctc_scale, map_scale) = match cfg.reduction {
        Reduction::Sum => (1.0, 1.0),
        Reduction::Mean => (1.0 / cfg.frames as f64, 1.0 / y.len() as f64),
    };
    let lambdas = Lambdas { ctc: cfg.lambdas.ctc * ctc_scale, map: cfg.lambdas.map * map_scale };
    let fp = ProbMatrix::softmax(frame_logits);
    let sp = ProbMatrix::softmax(step_logits);
    let c = combined_loss(&fp, &sp, y, s_hat, lambdas)?;
    let value = LossValue::new(c.value.ctc_part * ctc_scale, c.value.map_part * map_scale, cfg.lambdas);
    Ok(Eval {
        value,
        frame_grad: softmax_backward(&fp, &c.frame_grad),
        step_grad: softmax_backward(&sp, &c.step_grad),
    })
}

fn stepped(m: &LogitMatrix, g: &LogitMatrix, lr: f64) -> LogitMatrix {
    let mut out = m.clone();
    out.values_mut().iter_mut().zip(g.values()).for_each(|(v, d)| *v -= lr * d);
    out
}

/// Minimizes the combined loss over a `frames x (N+1)` frame-logit matrix and
/// a `|y| x (N+1)` step-logit matrix, both starting at zero. A step that
/// would raise the loss is retried at half the learning rate, so accepted
/// losses never increase.
pub fn fit_logits_demo(y: &TargetSeq, s_hat: &NormalizedSimilarity, cfg: &FitConfig) -> Result<FitReport> {
    if cfg.steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(Error::InvalidArgument("learning rate must be positive".into()));
    }
    if cfg.frames < y.min_frames() {
        return Err(Error::Infeasible { frames: cfg.frames, required: y.min_frames() });
    }
    let width = s_hat.n() + 1;
    let mut frame_logits = LogitMatrix::zeros(cfg.frames, width);
    let mut step_logits = LogitMatrix::zeros(y.len(), width);
    let mut current = evaluate(&frame_logits, &step_logits, y, s_hat, cfg)?;
    let initial = current.value;
    let mut history = vec![initial.total];
    let mut lr = cfg.learning_rate;
    let mut halvings = 0;

    'outer: for _ in 0..cfg.steps {
        let mut tries = 0;
        loop {
            let fl = stepped(&frame_logits, &current.frame_grad, lr);
            let sl = stepped(&step_logits, &current.step_grad, lr);
            // a candidate with no compatible path mass counts as an increase
            match evaluate(&fl, &sl, y, s_hat, cfg) {
                Ok(cand) if cand.value.total <= current.value.total => {
                    frame_logits = fl;
                    step_logits = sl;
                    current = cand;
                    history.push(current.value.total);
                    break;
                }
                _ => {
                    lr *= 0.5;
                    halvings += 1;
                    tries += 1;
                    if tries >= MAX_HALVINGS {
                        break 'outer;
                    }
                }
            }
        }
    }

    let decoded = greedy_decode(&ProbMatrix::softmax(&frame_logits));
    Ok(FitReport {
        initial,
        final_loss: current.value,
        history,
        decoded,
        frame_logits,
        step_logits,
        halvings,
    })
}
